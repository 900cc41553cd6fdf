#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "objnav/eval/runner.hpp"
#include "objnav/world/generator.hpp"

namespace objnav::eval {

struct EpisodeTask {
  const world::Scene* scene = nullptr;
  world::EpisodeSpec spec;
};

// Episode i runs on scene i % scenes.size(); its goal category is drawn
// uniformly from the categories present in that scene.
inline std::vector<EpisodeTask> make_tasks(const std::vector<world::Scene>& scenes, int episodes, std::uint64_t seed,
                                           const world::SamplingOptions& opts = {}) {
  if (scenes.empty()) throw ConfigError("tasks: no scenes");
  std::vector<EpisodeTask> out;
  out.reserve(static_cast<std::size_t>(episodes));
  for (int i = 0; i < episodes; ++i) {
    const world::Scene& scene = scenes[static_cast<std::size_t>(i) % scenes.size()];
    std::vector<int> cats;
    for (int c = 0; c < scene.category_bound(); ++c)
      if (scene.has_category(c)) cats.push_back(c);
    if (cats.empty()) throw ConfigError("tasks: scene " + scene.id() + " has no objects");
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    Rng rng(s);
    const int cat = cats[rng.uniform_int(cats.size())];
    out.push_back({&scene, world::sample_episode(scene, cat, derive_seed(s, 1), opts)});
  }
  return out;
}

inline std::vector<world::Scene> generate_scenes(world::GenerationParams params, int count, std::uint64_t seed) {
  std::vector<world::Scene> out;
  for (int i = 0; i < count; ++i) {
    params.rng_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    out.push_back(world::generate_scene(params));
  }
  return out;
}

// Calls fn(i) for i in [0, n) on up to `workers` threads. Results must be
// written to per-index slots, so the output never depends on scheduling.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline std::vector<EpisodeOutcome> run_batch(const std::vector<EpisodeTask>& tasks, const PipelineConfig& pipe,
                                             const EvalConfig& eval, int workers = 1) {
  std::vector<EpisodeOutcome> out(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), workers, [&](int i) {
    const auto& t = tasks[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = run_episode(*t.scene, t.spec, pipe, eval);
  });
  return out;
}

inline std::vector<EpisodeResult> fixed_results(const std::vector<EpisodeOutcome>& o) {
  std::vector<EpisodeResult> r;
  for (const auto& e : o) r.push_back(e.fixed);
  return r;
}

inline std::vector<EpisodeResult> dynamic_results(const std::vector<EpisodeOutcome>& o) {
  std::vector<EpisodeResult> r;
  for (const auto& e : o)
    if (e.dynamic) r.push_back(*e.dynamic);
  return r;
}

}  // namespace objnav::eval
