#pragma once

#include <csignal>
#include <iostream>
#include <ostream>

#include "objnav/cli/server.hpp"

namespace objnav::cli {

namespace fs = std::filesystem;

// '*' and '?' wildcards over a single path component.
inline bool wildcard_match(std::string_view pat, std::string_view s) {
  std::size_t p = 0, i = 0, star = std::string_view::npos, mark = 0;
  while (i < s.size()) {
    if (p < pat.size() && (pat[p] == '?' || pat[p] == s[i])) {
      ++p;
      ++i;
    } else if (p < pat.size() && pat[p] == '*') {
      star = p++;
      mark = i;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      i = ++mark;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

// Files matching each pattern (wildcards in the file name only); a directory
// stands for every .jsonl file in it. Sorted, without duplicates.
inline std::vector<fs::path> expand_globs(const std::vector<std::string>& patterns) {
  std::set<fs::path> out;
  for (const auto& pat : patterns) {
    const fs::path p(pat);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".jsonl") out.insert(e.path());
      continue;
    }
    const std::string name = p.filename().string();
    if (name.find_first_of("*?") == std::string::npos) {
      if (fs::is_regular_file(p)) out.insert(p);
      continue;
    }
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    if (!fs::is_directory(dir)) continue;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && wildcard_match(name, e.path().filename().string())) out.insert(e.path());
  }
  return {out.begin(), out.end()};
}

inline fs::path config_base(const fs::path& config_path) {
  return config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");
}

struct GenerateOptions {
  std::optional<std::string> config;
  std::string out = "scenes";
  std::optional<std::uint64_t> seed;
  std::optional<int> count;
  std::optional<int> floors;
};

inline int cmd_generate(const GenerateOptions& opt, std::ostream& out) {
  world::GenerationParams gp;
  int count = 10;
  std::uint64_t seed = 0;
  if (opt.config) {
    const RunConfig c = load_config(*opt.config);
    if (!c.generation) throw ConfigError(*opt.config + ": no 'generation' section");
    gp = *c.generation;
    count = c.scene_count;
    seed = c.seed;
  }
  if (opt.seed) seed = *opt.seed;
  if (opt.count) count = *opt.count;
  if (opt.floors) gp.floors = *opt.floors;
  if (count < 1) throw ConfigError("generate: count must be >= 1");
  gp.validate();
  fs::create_directories(opt.out);
  const auto scenes = eval::generate_scenes(gp, count, derive_seed(seed, 0));
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%03d.json", i);
    world::save_scene(scenes[static_cast<std::size_t>(i)], fs::path(opt.out) / name);
  }
  out << "wrote " << count << " scenes to " << opt.out << "\n";
  return 0;
}

struct RunOptions {
  std::string config;
  std::optional<std::string> out;
  int workers = 1;
  bool force = false;
};

inline std::string log_name(int episode) {
  char name[32];
  std::snprintf(name, sizeof name, "episode_%04d.jsonl", episode);
  return name;
}

inline eval::MetricsReport report_of(const std::vector<eval::EpisodeResult>& fixed,
                                     const std::vector<eval::EpisodeResult>& dynamic, double success_radius) {
  return eval::aggregate(fixed, dynamic.size() == fixed.size() ? std::span<const eval::EpisodeResult>(dynamic)
                                                               : std::span<const eval::EpisodeResult>(),
                         success_radius);
}

inline int cmd_run(const RunOptions& opt, std::ostream& out) {
  const RunConfig cfg = load_config(opt.config);
  const std::string digest = config_digest(cfg);
  const fs::path dir = opt.out ? fs::path(*opt.out) : fs::path(cfg.out);
  const fs::path manifest = dir / "run.json";
  if (fs::exists(manifest) && !opt.force) {
    std::string existing = "?";
    try {
      existing = json::parse(read_file(manifest)).at("digest").get<std::string>();
    } catch (const std::exception&) {
    }
    throw ConfigError("refusing to overwrite run " + existing + " in " + dir.string() +
                      (existing == digest ? " (same config)" : "") + "; pass --force");
  }
  fs::create_directories(dir);
  if (opt.force)
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".jsonl" && e.path().filename().string().rfind("episode_", 0) == 0) fs::remove(e.path());
  const Workload w = build_workload(cfg, config_base(opt.config));
  const auto outcomes = eval::run_batch(w.tasks, w.pipeline, cfg.eval, opt.workers);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    LogHeader h;
    h.digest = digest;
    h.episode = static_cast<int>(i);
    h.spec = w.tasks[i].spec;
    write_text(dir / log_name(static_cast<int>(i)), format_log(h, outcomes[i]));
  }
  const json m{{"digest", digest}, {"episodes", outcomes.size()}, {"config", to_json(cfg)}};
  write_text(manifest, m.dump(2) + "\n");
  const auto report = report_of(eval::fixed_results(outcomes), eval::dynamic_results(outcomes), cfg.eval.success_radius);
  out << report.to_table();
  out << "logs: " << dir.string() << " (digest " << digest << ")\n";
  return 0;
}

struct EvalOptions {
  std::vector<std::string> logs;
  std::optional<std::string> json_out;
  double success_radius = 1.0;
};

// Metrics over trajectory logs of any operator; the same code path for all.
inline eval::MetricsReport evaluate_logs(const std::vector<fs::path>& files, double success_radius) {
  if (files.empty()) throw ConfigError("eval: no log files matched");
  std::vector<eval::EpisodeResult> fixed, dynamic;
  for (const auto& f : files) {
    const TrajectoryLog log = load_log(f);
    fixed.push_back(log.fixed);
    if (log.dynamic) dynamic.push_back(*log.dynamic);
  }
  return report_of(fixed, dynamic, success_radius);
}

inline int cmd_eval(const EvalOptions& opt, std::ostream& out) {
  const auto report = evaluate_logs(expand_globs(opt.logs), opt.success_radius);
  out << report.to_table();
  const std::string j = report.to_json().dump(2) + "\n";
  if (opt.json_out) write_text(*opt.json_out, j);
  else out << j;
  return 0;
}

struct ReplayOptions {
  std::string config;
  std::vector<std::string> logs;
};

// Replays logs against the configured scenes; nonzero if any log disagrees.
inline int cmd_replay(const ReplayOptions& opt, std::ostream& out) {
  const RunConfig cfg = load_config(opt.config);
  const Workload w = build_workload(cfg, config_base(opt.config));
  const auto files = expand_globs(opt.logs);
  if (files.empty()) throw ConfigError("replay: no log files matched");
  int bad = 0;
  for (const auto& f : files) {
    const TrajectoryLog log = load_log(f);
    const auto rep = replay_log(log, scene_by_id(w.scenes, log.header.spec.scene_id), w.pipeline, cfg.eval);
    const bool same = rep.poses_match && result_json(rep.outcome.fixed) == result_json(log.fixed) &&
                      (!log.dynamic || (rep.outcome.dynamic && result_json(*rep.outcome.dynamic) == result_json(*log.dynamic)));
    if (!same) ++bad;
    out << (same ? "ok       " : "MISMATCH ") << f.string();
    if (!rep.poses_match) out << " (pose differs at step " << rep.first_mismatch << ")";
    out << "\n";
  }
  return bad == 0 ? 0 : 1;
}

struct ExportOptions {
  std::string config;
  std::string log;
  std::string out = "map.ppm";
  std::optional<int> step;  // replay this many steps; default all
};

// Writes the agent's local map, as it stood after `step` actions, as a PPM.
inline int cmd_export_map(const ExportOptions& opt, std::ostream& out) {
  const RunConfig cfg = load_config(opt.config);
  const Workload w = build_workload(cfg, config_base(opt.config));
  const TrajectoryLog log = load_log(opt.log);
  const eval::PipelineConfig pipe = log.header.op == "human" ? operator_pipeline(w.pipeline) : w.pipeline;
  eval::EpisodeSession session(scene_by_id(w.scenes, log.header.spec.scene_id), log.header.spec, pipe, cfg.eval);
  const std::size_t n = opt.step ? static_cast<std::size_t>(std::max(0, *opt.step)) : log.steps.size();
  for (std::size_t i = 0; i < std::min(n, log.steps.size()) && !session.done(); ++i) session.apply(log.steps[i].action);
  const auto cm = perception::compress_map(session.local_map(), perception::default_palette(pipe.detector.categories()));
  perception::write_ppm(cm, opt.out);
  out << "wrote " << opt.out << " (" << cm.size << "x" << cm.size << ", step " << session.steps() << ")\n";
  return 0;
}

struct ServeOptions {
  std::string config;
  int port = 8765;
  int subset = 50;
  std::optional<std::string> out;
};

inline std::atomic<bool>& serve_interrupted() {
  static std::atomic<bool> flag{false};
  return flag;
}

inline int cmd_serve(const ServeOptions& opt, std::ostream& out) {
  const RunConfig cfg = load_config(opt.config);
  const fs::path dir = opt.out ? fs::path(*opt.out) : fs::path(cfg.out) / "human";
  auto ctx = make_serve_context(cfg, opt.subset, dir, config_base(opt.config));
  TcpServer server(*ctx, opt.port);
  out << "serving " << ctx->subset.size() << " test episodes on 127.0.0.1:" << server.port() << ", logs in "
      << dir.string() << std::endl;
  std::signal(SIGINT, [](int) { serve_interrupted() = true; });
  std::signal(SIGTERM, [](int) { serve_interrupted() = true; });
  std::thread watcher([&] {
    while (!serve_interrupted()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
  });
  server.run();
  serve_interrupted() = true;
  watcher.join();
  return 0;
}

}  // namespace objnav::cli
