#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "objnav/eval/batch.hpp"
#include "objnav/eval/bootstrap.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace objnav;
using namespace objnav::eval;
using testutil::ascii_floor;
using testutil::room_rows;
using oracle::make_result;
using oracle::recompute;
using oracle::Recomputed;

namespace {

world::Scene small_scene(std::uint64_t seed, int floors = 1) {
  world::GenerationParams gp;
  gp.rng_seed = seed;
  gp.floors = floors;
  gp.rooms_per_floor = 3;
  return world::generate_scene(gp);
}

std::vector<EpisodeTask> small_batch(const std::vector<world::Scene>& scenes, int n, std::uint64_t seed) {
  return make_tasks(scenes, n, seed);
}

}  // namespace

TEST(MaxDynamicSteps, WorkedExample) {
  EXPECT_EQ(max_dynamic_steps(5.0, 0.25, 30.0, 5.0), 160);
  world::MotionParams m;
  EXPECT_EQ(max_dynamic_steps(5.0, m, 5.0), 160);
}

TEST(MaxDynamicSteps, UnitCase) { EXPECT_EQ(max_dynamic_steps(0.25, 0.25, 360.0, 1.0), 2); }

TEST(MaxDynamicSteps, CappedAtFixedBudget) {
  EXPECT_EQ(max_dynamic_steps(50.0, 0.25, 30.0, 5.0, 500), 500);
  EXPECT_EQ(max_dynamic_steps(5.0, 0.25, 30.0, 5.0, 500), 160);
}

TEST(MaxDynamicSteps, RoundsUp) { EXPECT_EQ(max_dynamic_steps(1.1, 0.25, 30.0, 1.0), 17); }

TEST(MaxDynamicSteps, MonotoneInEveryParameter) {
  Rng rng(3);
  const double thetas[] = {10, 15, 20, 30, 45, 60, 90};
  for (int i = 0; i < 1000; ++i) {
    const double D = 0.05 + 20.0 * rng.uniform();
    const double d = 0.05 + 0.5 * rng.uniform();
    const double th = thetas[rng.uniform_int(7)];
    const double a = 1.0 + 9.0 * rng.uniform();
    const double k = 1.0 + rng.uniform();
    const int base = max_dynamic_steps(D, d, th, a);
    EXPECT_LE(base, max_dynamic_steps(D * k, d, th, a));
    EXPECT_LE(base, max_dynamic_steps(D, d, th, a * k));
    EXPECT_GE(base, max_dynamic_steps(D, d * k, th, a));
    EXPECT_GE(base, max_dynamic_steps(D, d, th * k, a));
  }
}

TEST(MaxDynamicSteps, RejectsNonPositive) {
  EXPECT_THROW(max_dynamic_steps(0.0, 0.25, 30.0, 5.0), ConfigError);
  EXPECT_THROW(max_dynamic_steps(5.0, -0.25, 30.0, 5.0), ConfigError);
  EXPECT_THROW(max_dynamic_steps(5.0, 0.25, 0.0, 5.0), ConfigError);
  EXPECT_THROW(max_dynamic_steps(5.0, 0.25, 30.0, 0.0), ConfigError);
}

TEST(Metrics, WorkedExamples) {
  const std::vector<EpisodeResult> optimal{make_result(true, 3.0, 3.0, 0.2)};
  EXPECT_EQ(spl(optimal), 1.0);
  const std::vector<EpisodeResult> failed{make_result(false, 3.0, 3.0, 4.0)};
  EXPECT_EQ(spl(failed), 0.0);
  const std::vector<EpisodeResult> pair{make_result(true, 4.0, 2.0, 0.5), make_result(false, 1.0, 2.0, 3.0)};
  EXPECT_DOUBLE_EQ(spl(pair), 0.25);
  const std::vector<EpisodeResult> successes{make_result(true, 2.0, 2.0, 0.4), make_result(true, 5.0, 2.0, 0.9)};
  EXPECT_EQ(dts(successes, 1.0), 0.0);
  const std::vector<EpisodeResult> one{make_result(false, 1.0, 1.0, 2.0)};
  EXPECT_DOUBLE_EQ(dts(one, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(dts_raw(one), 2.0);
  EXPECT_DOUBLE_EQ(spl_successful_only(pair), 0.5);
}

TEST(Metrics, EmptyInputIsAnError) {
  const std::vector<EpisodeResult> none;
  EXPECT_THROW(spl(none), ConfigError);
  EXPECT_THROW(success_rate(none), ConfigError);
  EXPECT_THROW(dts(none, 1.0), ConfigError);
  EXPECT_THROW(aggregate(none, none, 1.0), ConfigError);
}

TEST(Metrics, HandFixturesMatchRecomputation) {
  const auto fixtures = oracle::metric_fixtures();
  ASSERT_EQ(fixtures.size(), 20u);
  for (const auto& f : fixtures) {
    const Recomputed want = recompute(f, 1.0);
    EXPECT_NEAR(success_rate(f), want.sr, 1e-12);
    EXPECT_NEAR(spl(f), want.spl, 1e-12);
    EXPECT_NEAR(dts(f, 1.0), want.dts, 1e-12);
    const MetricsReport m = aggregate(f, f, 1.0);
    EXPECT_NEAR(m.sr, want.sr, 1e-12);
    EXPECT_NEAR(m.d_spl, want.spl, 1e-12);
  }
}

TEST(Metrics, SplNeverExceedsSrAndClippedDtsNeverExceedsRaw) {
  Rng rng(11);
  for (int set = 0; set < 10000; ++set) {
    std::vector<EpisodeResult> rs;
    const int n = 1 + static_cast<int>(rng.uniform_int(12));
    for (int i = 0; i < n; ++i)
      rs.push_back(make_result(rng.bernoulli(0.5), 10.0 * rng.uniform(), 0.01 + 8.0 * rng.uniform(),
                               6.0 * rng.uniform()));
    ASSERT_LE(spl(rs), success_rate(rs));
    ASSERT_LE(dts(rs, 1.0), dts_raw(rs));
    for (double v : {success_rate(rs), spl(rs)}) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(Metrics, AggregateOfOptimalSuccesses) {
  const std::vector<EpisodeResult> rs{make_result(true, 2.0, 2.0, 0.5), make_result(true, 4.0, 4.0, 0.0)};
  const MetricsReport m = aggregate(rs, {}, 1.0);
  EXPECT_EQ(m.sr, 1.0);
  EXPECT_EQ(m.spl, 1.0);
  EXPECT_EQ(m.dts, 0.0);
  EXPECT_FALSE(m.has_dynamic);
  EXPECT_FALSE(m.to_json().contains("D_SR"));
  EXPECT_NE(m.to_table().find("SPL"), std::string::npos);
  const std::vector<EpisodeResult> short_dyn{rs.front()};
  EXPECT_THROW(aggregate(rs, short_dyn, 1.0), ConfigError);
}

TEST(Metrics, FailureCountsByLabel) {
  std::vector<EpisodeResult> rs(3, make_result(false, 1.0, 1.0, 3.0));
  rs[0].failure_label = FailureLabel::Trapped;
  rs[1].failure_label = FailureLabel::Trapped;
  rs[2].failure_label = FailureLabel::WrongFloor;
  const MetricsReport m = aggregate(rs, {}, 1.0);
  EXPECT_EQ(m.failures.at("trapped"), 2);
  EXPECT_EQ(m.failures.at("wrong_floor"), 1);
  EXPECT_EQ(m.to_json()["failures"]["trapped"], 2);
}

TEST(EvalConfig, Validation) {
  EvalConfig c;
  EXPECT_NO_THROW(c.validate());
  c.alpha = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.success_radius = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.max_steps_fixed = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(eval_mode_from_string("dynamic"), EvalMode::Dynamic);
  EXPECT_THROW(eval_mode_from_string("both "), ConfigError);
}

TEST(SuccessCheck, OnTargetAndAtTheBoundary) {
  // Category-0 object at the west end of a 1 cm corridor.
  std::string corridor = "#0" + std::string(150, '.') + "#";
  const world::Scene s(ascii_floor({std::string(153, '#'), corridor, std::string(153, '#')}, 0.01));
  EvalConfig cfg;
  auto at_col = [&](int c) { return world::AgentPose{cell_center_x({1, c}, 0.01), cell_center_y({1, c}, 0.01), 0.0, 0}; };
  EXPECT_TRUE(success_check(s, at_col(1), 0, false, cfg));
  EXPECT_TRUE(success_check(s, at_col(101), 0, false, cfg));   // 1.00 m
  EXPECT_FALSE(success_check(s, at_col(102), 0, false, cfg));  // 1.01 m
  cfg.require_stop = true;
  EXPECT_FALSE(success_check(s, at_col(2), 0, false, cfg));
  EXPECT_TRUE(success_check(s, at_col(2), 0, true, cfg));
}

TEST(SuccessCheck, MatchesDijkstraOracle) {
  const world::Scene s = small_scene(41, 2);
  EvalConfig cfg;
  Rng rng(8);
  int checked = 0, successes = 0;
  while (checked < 200) {
    const int cat = s.objects()[rng.uniform_int(s.objects().size())].category;
    std::set<std::pair<int, Cell>> targets;
    for (const auto& fc : world::category_cells(s, cat)) targets.insert({fc.floor, fc.cell});
    const int f = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(s.num_floors())));
    const Cell c{static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(s.height()))),
                 static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(s.width())))};
    if (!s.traversable(f, c)) continue;
    // Bias half the samples to the neighbourhood of a target so both outcomes occur.
    world::AgentPose pose{cell_center_x(c, s.cell_size()), cell_center_y(c, s.cell_size()), 0.0, f};
    if (checked % 2 == 0) {
      const auto& [tf, tc] = *std::next(targets.begin(), static_cast<long>(rng.uniform_int(targets.size())));
      const Cell q{tc.row + static_cast<int>(rng.uniform_int(41)) - 20, tc.col + static_cast<int>(rng.uniform_int(41)) - 20};
      if (!s.in_bounds(q) || !s.traversable(tf, q)) continue;
      pose = {cell_center_x(q, s.cell_size()), cell_center_y(q, s.cell_size()), 0.0, tf};
    }
    const double oracle = testutil::oracle_geodesic(s, pose.floor, pose.cell(s.cell_size()), targets);
    const bool want = oracle <= cfg.success_radius;
    EXPECT_EQ(success_check(s, pose, cat, false, cfg), want);
    successes += want ? 1 : 0;
    ++checked;
  }
  EXPECT_GT(successes, 10);
  EXPECT_LT(successes, 190);
}

namespace {

StepRecord plain_step(int i) {
  StepRecord s;
  s.step = i;
  return s;
}

EpisodeResult failed_on_floor(int floor, double final_distance) {
  EpisodeResult r = make_result(false, 5.0, 3.0, final_distance);
  r.final_pose.floor = floor;
  return r;
}

}  // namespace

TEST(ClassifyFailure, SuccessHasNoLabel) {
  EpisodeResult r = make_result(true, 1.0, 1.0, 0.5);
  EXPECT_FALSE(classify_failure(r, {}, {{0}}, EvalConfig{}).has_value());
}

TEST(ClassifyFailure, WrongFloor) {
  std::vector<StepRecord> steps{plain_step(0), plain_step(1)};
  EXPECT_EQ(classify_failure(failed_on_floor(1, 6.0), steps, {{0}}, EvalConfig{}), FailureLabel::WrongFloor);
}

TEST(ClassifyFailure, FallsThroughToIncompleteExploration) {
  std::vector<StepRecord> steps;
  for (int i = 0; i < 500; ++i) steps.push_back(plain_step(i));
  EXPECT_EQ(classify_failure(failed_on_floor(0, 6.0), steps, {{0}}, EvalConfig{}),
            FailureLabel::IncompleteExploration);
}

TEST(ClassifyFailure, CascadeOrder) {
  const EvalConfig cfg;
  std::vector<StepRecord> steps;
  for (int i = 0; i < 100; ++i) steps.push_back(plain_step(i));
  FailureEvidence ev{{0}};

  // Near miss with the target mapped outranks everything else.
  auto near = steps;
  near[10].target_mapped = true;
  near[20].events.push_back("override:false");
  EXPECT_EQ(classify_failure(failed_on_floor(1, 1.2), near, ev, cfg), FailureLabel::FalseNegativeSuccess);
  // Without the target mapped, the false override wins over the wrong floor.
  auto mis = steps;
  mis[20].events.push_back("override:false");
  EXPECT_EQ(classify_failure(failed_on_floor(1, 1.2), mis, ev, cfg), FailureLabel::Misdetection);
  // Trapped: helper activations in the last 50 steps.
  auto trapped = steps;
  ev.untrap_enabled = true;
  for (int i = 90; i < 94; ++i) trapped[static_cast<std::size_t>(i)].untrap_override = true;
  EXPECT_EQ(classify_failure(failed_on_floor(0, 4.0), trapped, ev, cfg), FailureLabel::Trapped);
  trapped[93].untrap_override = false;
  EXPECT_EQ(classify_failure(failed_on_floor(0, 4.0), trapped, ev, cfg), FailureLabel::IncompleteExploration);
  // Trapped with the helper off: repeated collisions.
  ev.untrap_enabled = false;
  auto bumping = steps;
  for (int i = 60; i < 75; ++i) bumping[static_cast<std::size_t>(i)].collided = true;
  EXPECT_EQ(classify_failure(failed_on_floor(0, 4.0), bumping, ev, cfg), FailureLabel::Trapped);
  // Lingering near a mapped target without stopping.
  auto linger = steps;
  linger[0].target_mapped = true;
  for (int i = 40; i < 70; ++i) {
    linger[static_cast<std::size_t>(i)].goal = policy::LongTermGoal{Cell{1, 1}, policy::GoalSource::TargetOverride};
    linger[static_cast<std::size_t>(i)].d_goal = 1.5;
  }
  EXPECT_EQ(classify_failure(failed_on_floor(0, 2.5), linger, ev, cfg), FailureLabel::NoStopNearTarget);
  linger[69].d_goal = 2.5;
  EXPECT_EQ(classify_failure(failed_on_floor(0, 2.5), linger, ev, cfg), FailureLabel::IncompleteExploration);
  // A spurious target cell on the map.
  ev.spurious_target_mapped = true;
  EXPECT_EQ(classify_failure(failed_on_floor(0, 2.5), steps, ev, cfg), FailureLabel::MapError);
}

TEST(Session, StartNextToTargetSucceedsQuickly) {
  // Target object at the west end of a corridor, agent 1.1 m east facing it.
  auto rows = room_rows(9, 60);
  rows[4][1] = '0';
  const world::Scene s(ascii_floor(rows));
  world::EpisodeSpec spec;
  spec.scene_id = s.id();
  spec.goal_category = 0;
  spec.start = {cell_center_x({4, 23}, 0.05), cell_center_y({4, 23}, 0.05), 180.0, 0};
  spec.shortest_distance = world::geodesic_distance(s, spec.start, 0);
  spec.seed = 5;
  ASSERT_NEAR(spec.shortest_distance, 1.1, 1e-9);
  PipelineConfig pipe;
  pipe.detector = perception::identity_detector(1);
  const EpisodeOutcome out = run_episode(s, spec, pipe, EvalConfig{});
  EXPECT_TRUE(out.fixed.success);
  EXPECT_LE(out.fixed.steps_used, 10);
  const std::vector<EpisodeResult> one{out.fixed};
  EXPECT_NEAR(spl(one), 1.0, 1e-9);
  EXPECT_TRUE(out.dynamic->success);
}

TEST(Session, RequireStopNeedsExplicitStop) {
  auto rows = room_rows(9, 60);
  rows[4][1] = '0';
  const world::Scene s(ascii_floor(rows));
  world::EpisodeSpec spec;
  spec.scene_id = s.id();
  spec.start = {cell_center_x({4, 23}, 0.05), cell_center_y({4, 23}, 0.05), 180.0, 0};
  spec.shortest_distance = world::geodesic_distance(s, spec.start, 0);
  PipelineConfig pipe;
  pipe.detector = perception::identity_detector(1);
  EvalConfig ec;
  ec.require_stop = true;
  ec.mode = EvalMode::Fixed;
  EpisodeSession sess(s, spec, pipe, ec);
  sess.apply(Action::Forward);
  EXPECT_FALSE(sess.done());
  EXPECT_FALSE(sess.result().success);
  sess.apply(Action::Stop);
  EXPECT_TRUE(sess.done());
  EXPECT_TRUE(sess.result().success);
}

TEST(Session, StepIndicesContiguousAndCapRespected) {
  const std::vector<world::Scene> scenes{small_scene(3)};
  const auto tasks = small_batch(scenes, 4, 9);
  EvalConfig ec;
  ec.max_steps_fixed = 60;
  for (const auto& o : run_batch(tasks, PipelineConfig{}, ec)) {
    for (std::size_t i = 0; i < o.steps.size(); ++i) EXPECT_EQ(o.steps[i].step, static_cast<int>(i));
    EXPECT_LE(o.fixed.steps_used, 60);
    EXPECT_LE(o.dynamic->steps_used, o.dynamic->step_cap);
    EXPECT_LE(o.dynamic->step_cap, 60);
    if (o.fixed.success) {
      EXPECT_LE(o.fixed.final_distance, ec.success_radius);
    }
  }
}

TEST(Session, DynamicDominanceOnPairedBatch) {
  const auto scenes = generate_scenes(world::GenerationParams{}, 3, 4);
  const auto tasks = small_batch(scenes, 24, 5);
  PipelineConfig pipe;
  pipe.detector = perception::detector_preset("rednet", 6);
  pipe.enhance.untrap = true;
  const auto out = run_batch(tasks, pipe, EvalConfig{}, 4);
  const auto fixed = fixed_results(out), dyn = dynamic_results(out);
  ASSERT_EQ(fixed.size(), dyn.size());
  const MetricsReport m = aggregate(fixed, dyn, 1.0);
  EXPECT_LE(m.d_sr, m.sr);
  EXPECT_LE(m.d_spl, m.spl);
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (dyn[i].success) {
      EXPECT_TRUE(fixed[i].success);
    }
    EXPECT_LE(spl_term(dyn[i]), spl_term(fixed[i]));
  }
}

TEST(Session, PathLengthBoundsDisplacement) {
  const auto scenes = generate_scenes(world::GenerationParams{}, 2, 12);
  const auto tasks = small_batch(scenes, 10, 13);
  PipelineConfig pipe;
  pipe.enhance.untrap = true;
  const auto out = run_batch(tasks, pipe, EvalConfig{}, 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& r = out[i].fixed;
    const world::Scene& s = *tasks[i].scene;
    const world::FloorCell end{r.final_pose.floor, r.final_pose.cell(s.cell_size())};
    // Octile grid distance overstates a straight segment by at most this factor.
    const double octile_excess = std::cos(kPi / 8) + (std::sqrt(2.0) - 1.0) * std::sin(kPi / 8);
    const double moved = world::geodesic_distance(s, r.spec.start, std::span(&end, 1));
    EXPECT_GE(r.path_length, moved / octile_excess - 2.0 * s.cell_size());
    if (r.final_pose.floor == r.spec.start.floor) {
      EXPECT_GE(r.path_length, std::hypot(r.final_pose.x - r.spec.start.x, r.final_pose.y - r.spec.start.y) - 1e-9);
    }
    EXPECT_GE(r.path_length, 0.0);
  }
}

TEST(Session, RemapKeepsOnlyTheCurrentView) {
  world::GenerationParams gp;
  gp.floors = 2;
  gp.rooms_per_floor = 3;
  gp.rng_seed = 6;
  const world::Scene s = world::generate_scene(gp);
  ASSERT_FALSE(s.stair_links().empty());
  const auto& link = s.stair_links().front();
  const Cell stair{(link.region_a.r0 + link.region_a.r1) / 2, (link.region_a.c0 + link.region_a.c1) / 2};
  ASSERT_EQ(s.kind(link.floor_a, stair), world::CellKind::Stair);
  world::EpisodeSpec spec;
  spec.scene_id = s.id();
  spec.goal_category = s.objects().front().category;
  spec.start = {cell_center_x(stair, s.cell_size()), cell_center_y(stair, s.cell_size()), 0.0, link.floor_a};
  spec.shortest_distance = world::geodesic_distance(s, spec.start, spec.goal_category);
  PipelineConfig pipe;
  pipe.enhance.remap = true;
  EvalConfig ec;
  ec.mode = EvalMode::Fixed;
  EpisodeSession sess(s, spec, pipe, ec);
  // Turning in place keeps the agent on the stair; the threshold is reached
  // on the observation after stair_dwell_threshold - 1 turns.
  const int turns = pipe.enhance.stair_dwell_threshold - 1;
  for (int i = 0; i < turns; ++i) {
    EXPECT_EQ(sess.remap_count(), 0);
    sess.apply(Action::TurnLeft);
  }
  ASSERT_EQ(sess.remap_count(), 1);
  perception::SemanticMap fresh = perception::make_global_map(s, pipe.detector.categories());
  perception::project_to_map(fresh, sess.frame().obs, sess.frame().labels, sess.pose());
  EXPECT_EQ(sess.global_map().explored_area(), fresh.explored_area());
  for (int k = 0; k < fresh.channels(); ++k)
    EXPECT_TRUE(std::equal(fresh.channel(k), fresh.channel(k) + fresh.plane(), sess.global_map().channel(k))) << k;
  sess.apply(Action::TurnLeft);
  EXPECT_NE(std::find(sess.records().back().events.begin(), sess.records().back().events.end(), "remap"),
            sess.records().back().events.end());
}

TEST(Session, RemapOffNeverClears) {
  world::GenerationParams gp;
  gp.floors = 2;
  gp.rooms_per_floor = 3;
  gp.rng_seed = 6;
  const world::Scene s = world::generate_scene(gp);
  const auto& link = s.stair_links().front();
  const Cell stair{(link.region_a.r0 + link.region_a.r1) / 2, (link.region_a.c0 + link.region_a.c1) / 2};
  world::EpisodeSpec spec;
  spec.goal_category = s.objects().front().category;
  spec.start = {cell_center_x(stair, s.cell_size()), cell_center_y(stair, s.cell_size()), 0.0, link.floor_a};
  spec.shortest_distance = world::geodesic_distance(s, spec.start, spec.goal_category);
  EpisodeSession sess(s, spec, PipelineConfig{}, EvalConfig{});
  double area = sess.global_map().explored_area();
  for (int i = 0; i < 40 && !sess.done(); ++i) {
    sess.apply(Action::TurnLeft);
    EXPECT_GE(sess.global_map().explored_area(), area);
    area = sess.global_map().explored_area();
  }
  EXPECT_EQ(sess.remap_count(), 0);
}

TEST(Session, DeterministicForSameSeed) {
  const auto scenes = generate_scenes(world::GenerationParams{}, 2, 30);
  const auto tasks = small_batch(scenes, 6, 31);
  PipelineConfig pipe;
  pipe.detector = perception::detector_preset("mrcnn-default", 6);
  pipe.enhance.untrap = pipe.enhance.dynamic_goal = true;
  const auto a = run_batch(tasks, pipe, EvalConfig{}, 1);
  const auto b = run_batch(tasks, pipe, EvalConfig{}, 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].steps.size(), b[i].steps.size());
    for (std::size_t t = 0; t < a[i].steps.size(); ++t) {
      EXPECT_EQ(a[i].steps[t].action, b[i].steps[t].action);
      EXPECT_EQ(a[i].steps[t].pose.x, b[i].steps[t].pose.x);
      EXPECT_EQ(a[i].steps[t].pose.y, b[i].steps[t].pose.y);
      EXPECT_EQ(a[i].steps[t].events, b[i].steps[t].events);
    }
    EXPECT_EQ(a[i].fixed.path_length, b[i].fixed.path_length);
  }
}

TEST(Session, EnhancementsDivergeOnlyAfterActivation) {
  const auto scenes = generate_scenes(world::GenerationParams{}, 3, 50);
  const auto tasks = small_batch(scenes, 12, 51);
  PipelineConfig off;
  PipelineConfig on = off;
  on.enhance.untrap = on.enhance.dynamic_goal = on.enhance.remap = true;
  on.enhance.f_update = off.policy.f_update;
  const auto a = run_batch(tasks, off, EvalConfig{}, 4);
  const auto b = run_batch(tasks, on, EvalConfig{}, 4);
  int diverged = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i].steps;
    const auto& y = b[i].steps;
    bool activated = false;
    for (std::size_t t = 0; t < std::min(x.size(), y.size()); ++t) {
      const auto& s = y[t];
      // An activation: helper override, map clear, or the selector holding a
      // goal other than the one the unfiltered policy follows.
      activated = activated || s.untrap_override || has_event(s, "remap") || !(s.policy_goal == x[t].policy_goal);
      const bool same = x[t].action == y[t].action && x[t].pose.x == y[t].pose.x && x[t].pose.y == y[t].pose.y;
      if (!same) {
        EXPECT_TRUE(activated) << "episode " << i << " step " << t;
        ++diverged;
        break;
      }
    }
  }
  EXPECT_GT(diverged, 0);
}

TEST(Session, GoalSelectorChangesOnlyOnThresholdCrossings) {
  const auto scenes = generate_scenes(world::GenerationParams{}, 3, 60);
  const auto tasks = small_batch(scenes, 15, 61);
  PipelineConfig pipe;
  pipe.policy.kind = policy::PolicyKind::DiscreteCandidate;
  pipe.policy.candidates = policy::default_candidates(pipe.m_local, 24);
  pipe.enhance.dynamic_goal = pipe.enhance.untrap = true;
  const auto out = run_batch(tasks, pipe, EvalConfig{}, 4);
  int changes = 0;
  for (const auto& o : out)
    for (std::size_t t = 1; t < o.steps.size(); ++t) {
      const auto& s = o.steps[t];
      if (*s.policy_goal == *o.steps[t - 1].policy_goal) continue;
      ++changes;
      const double d = s.selector_distance;
      EXPECT_TRUE(d < pipe.enhance.tau_reached || d > pipe.enhance.tau_unreachable) << "d_goal " << d;
      EXPECT_TRUE(has_event(s, "goal_switch"));
    }
  EXPECT_GT(changes, 0);
}

TEST(Batch, SameOutcomesForAnyWorkerCount) {
  const auto scenes = generate_scenes(world::GenerationParams{}, 2, 70);
  const auto tasks = small_batch(scenes, 8, 71);
  EvalConfig ec;
  ec.max_steps_fixed = 120;
  const auto a = run_batch(tasks, PipelineConfig{}, ec, 1);
  const auto b = run_batch(tasks, PipelineConfig{}, ec, 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].fixed.steps_used, b[i].fixed.steps_used);
    EXPECT_EQ(a[i].fixed.final_distance, b[i].fixed.final_distance);
    EXPECT_EQ(a[i].fixed.failure_label, b[i].fixed.failure_label);
  }
}

TEST(Batch, TasksAreSeededAndCoverScenes) {
  const auto scenes = generate_scenes(world::GenerationParams{}, 3, 80);
  const auto a = make_tasks(scenes, 9, 81), b = make_tasks(scenes, 9, 81);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].scene, &scenes[i % 3]);
    EXPECT_EQ(a[i].spec.start.x, b[i].spec.start.x);
    EXPECT_EQ(a[i].spec.goal_category, b[i].spec.goal_category);
    EXPECT_TRUE(a[i].scene->has_category(a[i].spec.goal_category));
  }
  EXPECT_THROW(make_tasks({}, 3, 1), ConfigError);
}

TEST(Batch, ParallelForPropagatesErrors) {
  EXPECT_THROW(parallel_for(16, 4, [](int i) { if (i == 7) throw ConfigError("boom"); }), ConfigError);
}

TEST(ClassifyFailure, TotalOnRealFailuresAndNoiselessBlindRunsAreIncomplete) {
  const auto scenes = generate_scenes(world::GenerationParams{}, 4, 90);
  const auto tasks = small_batch(scenes, 16, 91);
  EvalConfig ec;
  ec.max_steps_fixed = 25;
  const auto out = run_batch(tasks, PipelineConfig{}, ec, 4);
  int blind = 0;
  for (const auto& o : out) {
    EXPECT_EQ(o.fixed.failure_label.has_value(), !o.fixed.success);
    const bool seen = std::any_of(o.steps.begin(), o.steps.end(), [](const StepRecord& s) { return s.target_mapped; });
    if (!o.fixed.success && !seen && o.fixed.final_pose.floor == o.fixed.spec.start.floor) {
      EXPECT_EQ(o.fixed.failure_label, FailureLabel::IncompleteExploration);
      ++blind;
    }
  }
  EXPECT_GT(blind, 0);
}

TEST(ClassifyFailure, MisdetectionIsModalForTheWeakestDetector) {
  const auto scenes = generate_scenes(world::GenerationParams{}, 10, 11);
  const auto tasks = small_batch(scenes, 200, 21);
  PipelineConfig pipe;
  pipe.detector = perception::detector_preset("mrcnn-default", 6);
  pipe.enhance.untrap = true;
  EvalConfig ec;
  ec.mode = EvalMode::Fixed;
  const auto out = run_batch(tasks, pipe, ec, static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  const MetricsReport m = aggregate(fixed_results(out), {}, ec.success_radius);
  ASSERT_FALSE(m.failures.empty());
  const auto modal = std::max_element(m.failures.begin(), m.failures.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
  EXPECT_EQ(modal->first, "misdetection") << m.to_table();
}
