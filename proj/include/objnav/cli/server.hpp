#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "objnav/cli/log.hpp"
#include "objnav/perception/compress.hpp"

namespace objnav::cli {

// Seeded sample of task indices stratified by goal category: categories take
// turns contributing their next (shuffled) episode until n are chosen.
inline std::vector<int> stratified_subset(const std::vector<eval::EpisodeTask>& tasks, int n, std::uint64_t seed) {
  std::map<int, std::vector<int>> by_cat;
  for (int i = 0; i < static_cast<int>(tasks.size()); ++i)
    by_cat[tasks[static_cast<std::size_t>(i)].spec.goal_category].push_back(i);
  for (auto& [cat, idx] : by_cat) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cat)));
    for (std::size_t k = idx.size(); k > 1; --k) std::swap(idx[k - 1], idx[rng.uniform_int(k)]);
  }
  std::vector<int> out;
  const int want = std::min(n, static_cast<int>(tasks.size()));
  for (std::size_t round = 0; static_cast<int>(out.size()) < want; ++round)
    for (auto& [cat, idx] : by_cat)
      if (round < idx.size() && static_cast<int>(out.size()) < want) out.push_back(idx[round]);
  std::sort(out.begin(), out.end());
  return out;
}

// Shared, read-only state of a session server.
struct ServeContext {
  RunConfig config;
  std::string digest;
  Workload test;
  std::vector<int> subset;  // test episode k is test.tasks[subset[k]]
  std::vector<world::Scene> practice_scenes;
  std::vector<eval::EpisodeTask> practice_tasks;
  eval::PipelineConfig pipeline;  // operator pipeline
  perception::Palette palette;
  std::filesystem::path log_dir;
  std::atomic<int> next_connection{0};
};

inline constexpr int kPracticePool = 16;

inline std::unique_ptr<ServeContext> make_serve_context(const RunConfig& cfg, int subset, const std::filesystem::path& log_dir,
                                                        const std::filesystem::path& base = {}) {
  auto ctx = std::make_unique<ServeContext>();
  ctx->config = cfg;
  ctx->digest = config_digest(cfg);
  ctx->test = build_workload(cfg, base);
  ctx->subset = stratified_subset(ctx->test.tasks, subset, derive_seed(cfg.seed, 3));
  world::GenerationParams gp = cfg.generation ? *cfg.generation : world::GenerationParams{};
  gp.categories = ctx->test.pipeline.detector.categories();
  ctx->practice_scenes = eval::generate_scenes(gp, cfg.practice_scenes, derive_seed(cfg.seed, 2));
  ctx->practice_tasks = build_tasks(cfg, ctx->practice_scenes, kPracticePool, derive_seed(cfg.seed, 4));
  ctx->pipeline = operator_pipeline(ctx->test.pipeline);
  ctx->palette = perception::default_palette(ctx->pipeline.detector.categories());
  ctx->log_dir = log_dir;
  std::filesystem::create_directories(log_dir);
  return ctx;
}

inline json err_frame(const std::string& msg) { return {{"t", "err"}, {"msg", msg}}; }

// One client's protocol state. Feed it request lines, send back the frames.
class ProtocolSession {
 public:
  explicit ProtocolSession(ServeContext& ctx)
      : ctx_(ctx), id_(ctx.next_connection++), unlocked_(ctx.config.practice_episodes == 0) {}

  std::vector<json> handle(const std::string& line) {
    json req;
    try {
      req = json::parse(line);
    } catch (const json::parse_error& e) {
      return {err_frame(std::string("malformed frame: ") + e.what())};
    }
    if (!req.is_object() || !req.contains("t") || !req["t"].is_string())
      return {err_frame("frame needs a string field 't'")};
    const std::string t = req["t"].get<std::string>();
    try {
      if (t == "reset") return reset(req);
      if (t == "action") return action(req);
    } catch (const json::exception& e) {
      return {err_frame(std::string("bad frame: ") + e.what())};
    }
    return {err_frame("unknown frame type '" + t + "'")};
  }

  bool unlocked() const { return unlocked_; }

 private:
  std::vector<json> reset(const json& req) {
    if (!req.contains("episode") || !req["episode"].is_number_integer()) return {err_frame("reset needs an integer 'episode'")};
    const int ep = req["episode"].get<int>();
    std::string phase = unlocked_ ? "test" : "practice";
    if (req.contains("phase")) phase = req["phase"].get<std::string>();
    if (phase != "practice" && phase != "test") return {err_frame("phase must be 'practice' or 'test'")};
    if (phase == "test" && !unlocked_)
      return {err_frame("test episodes unlock after " + std::to_string(ctx_.config.practice_episodes) +
                        " completed practice episodes")};
    const eval::EpisodeTask* task = nullptr;
    if (phase == "test") {
      if (ep < 0 || ep >= static_cast<int>(ctx_.subset.size()))
        return {err_frame("test episode " + std::to_string(ep) + " out of range [0, " +
                          std::to_string(ctx_.subset.size()) + ")")};
      task = &ctx_.test.tasks[static_cast<std::size_t>(ctx_.subset[static_cast<std::size_t>(ep)])];
    } else {
      if (ep < 0) return {err_frame("practice episode must be >= 0")};
      task = &ctx_.practice_tasks[static_cast<std::size_t>(ep) % ctx_.practice_tasks.size()];
    }
    session_ = std::make_unique<eval::EpisodeSession>(*task->scene, task->spec, ctx_.pipeline, ctx_.config.eval);
    episode_ = ep;
    phase_ = phase;
    if (session_->done()) return finish();
    return {obs_frame()};
  }

  std::vector<json> action(const json& req) {
    if (!session_ || session_->done()) return {err_frame("no active episode; send a reset")};
    if (!req.contains("a") || !req["a"].is_string()) return {err_frame("action needs a string field 'a'")};
    const std::string a = req["a"].get<std::string>();
    Action act;
    if (a == "forward") act = Action::Forward;
    else if (a == "left") act = Action::TurnLeft;
    else if (a == "right") act = Action::TurnRight;
    else if (a == "stop") act = Action::Stop;
    else return {err_frame("unknown action '" + a + "'")};
    session_->apply(act);
    if (session_->done()) return finish();
    return {obs_frame()};
  }

  json obs_frame() const {
    const auto& f = session_->frame();
    json labels = json::array();
    for (const auto& l : f.labels) labels.push_back(l ? json(*l) : json(nullptr));
    const auto cm = perception::compress_map(session_->local_map(), ctx_.palette);
    json runs = json::array();
    for (const auto& [cls, n] : perception::run_length_encode(cm.classes)) runs.push_back({cls, n});
    json palette = json::array();
    for (std::size_t k = 0; k < ctx_.palette.classes(); ++k) {
      const auto& c = ctx_.palette.color(static_cast<std::uint8_t>(k));
      palette.push_back({c[0], c[1], c[2]});
    }
    return {{"t", "obs"},
            {"episode", episode_},
            {"phase", phase_},
            {"goal", session_->spec().goal_category},
            {"depth", f.obs.depth},
            {"labels", labels},
            {"map", {{"size", cm.size}, {"rle", runs}}},
            {"palette", palette},
            {"pose", pose_json(session_->pose())},
            {"step", session_->steps()},
            {"budget", session_->step_cap()}};
  }

  std::vector<json> finish() {
    const eval::EpisodeOutcome o = eval::summarize(*session_);
    LogHeader h;
    h.op = "human";
    h.phase = phase_;
    h.digest = ctx_.digest;
    h.episode = episode_;
    h.spec = session_->spec();
    char name[96];
    std::snprintf(name, sizeof name, "%s_c%03d_e%04d_a%d.jsonl", phase_ == "test" ? "human" : "practice", id_,
                  episode_, attempts_++);
    write_text(ctx_.log_dir / name, format_log(h, o));
    const double dts = std::max(0.0, o.fixed.final_distance - ctx_.config.eval.success_radius);
    std::vector<json> frames{{{"t", "result"},
                              {"success", o.fixed.success},
                              {"spl_term", eval::spl_term(o.fixed)},
                              {"dts", number_json(dts)},
                              {"episode", episode_},
                              {"phase", phase_},
                              {"steps", o.fixed.steps_used}}};
    if (phase_ == "practice" && !unlocked_ && ++practice_done_ >= ctx_.config.practice_episodes) {
      unlocked_ = true;
      frames.push_back({{"t", "practice_complete"}, {"test_episodes", ctx_.subset.size()}});
    }
    session_.reset();
    return frames;
  }

  ServeContext& ctx_;
  int id_;
  bool unlocked_;
  int practice_done_ = 0;
  int attempts_ = 0;
  int episode_ = 0;
  std::string phase_;
  std::unique_ptr<eval::EpisodeSession> session_;
};

inline void send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return;
    sent += static_cast<std::size_t>(n);
  }
}

// Newline-delimited JSON over TCP on the loopback interface, one
// ProtocolSession per connection.
class TcpServer {
 public:
  static constexpr std::size_t kMaxLine = 1 << 20;

  TcpServer(ServeContext& ctx, int port) : ctx_(ctx) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
      const int e = errno;
      ::close(fd_);
      if (e == EADDRINUSE) throw Error("port " + std::to_string(port) + " is already in use");
      throw Error("bind port " + std::to_string(port) + ": " + std::strerror(e));
    }
    if (::listen(fd_, 16) < 0) {
      ::close(fd_);
      throw Error(std::string("listen: ") + std::strerror(errno));
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  ~TcpServer() {
    stop();
    if (fd_ >= 0) ::close(fd_);
  }

  int port() const { return port_; }
  void stop() { stop_ = true; }

  // Accepts connections until stop(); returns after every connection closed.
  void run() {
    std::vector<std::thread> workers;
    while (!stop_) {
      pollfd p{fd_, POLLIN, 0};
      if (::poll(&p, 1, 50) <= 0) continue;
      const int client = ::accept(fd_, nullptr, nullptr);
      if (client < 0) continue;
      workers.emplace_back([this, client] { serve_connection(client); });
    }
    for (auto& w : workers) w.join();
  }

 private:
  void serve_connection(int client) {
    ProtocolSession session(ctx_);
    std::string buf;
    char chunk[4096];
    while (!stop_) {
      pollfd p{client, POLLIN, 0};
      if (::poll(&p, 1, 50) <= 0) continue;
      const ssize_t n = ::recv(client, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      buf.append(chunk, static_cast<std::size_t>(n));
      std::size_t nl;
      while ((nl = buf.find('\n')) != std::string::npos) {
        std::string line = buf.substr(0, nl);
        buf.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string out;
        for (const auto& f : session.handle(line)) out += f.dump() + "\n";
        send_all(client, out);
      }
      if (buf.size() > kMaxLine) {
        buf.clear();
        send_all(client, err_frame("frame longer than " + std::to_string(kMaxLine) + " bytes").dump() + "\n");
      }
    }
    ::close(client);
  }

  ServeContext& ctx_;
  int fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stop_{false};
};

}  // namespace objnav::cli
