#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "objnav/perception/augment.hpp"
#include "objnav/perception/compress.hpp"
#include "objnav/perception/detector.hpp"
#include "objnav/perception/frontier.hpp"
#include "objnav/world/episode.hpp"
#include "objnav/world/generator.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace objnav;
using namespace objnav::perception;
using objnav::world::AgentPose;
using objnav::world::Observation;
using objnav::world::Scene;
using objnav::world::SensorConfig;
using testutil::ascii_floor;
using testutil::room_rows;
using oracle::brute_frontiers;
using oracle::random_map;

namespace {

Observation fake_obs(std::vector<double> depth, std::vector<std::optional<int>> labels, double max_range = 5.0) {
  Observation o;
  o.depth = std::move(depth);
  o.true_labels = std::move(labels);
  o.angles.assign(o.depth.size(), 0.0);
  o.max_range = max_range;
  return o;
}

}  // namespace

TEST(Detector, NoiselessIsIdentityWithinRange) {
  const auto det = identity_detector(3, 4.0);
  Rng rng(1);
  const auto obs = fake_obs({1.0, 3.9, 4.5, 5.0, 2.0}, {0, 2, 1, std::nullopt, std::nullopt});
  const auto out = detect(obs, det, rng);
  EXPECT_EQ(out[0], 0);
  EXPECT_EQ(out[1], 2);
  EXPECT_EQ(out[2], std::nullopt);
  EXPECT_EQ(out[3], std::nullopt);
  EXPECT_EQ(out[4], std::nullopt);
}

TEST(Detector, ZeroRecallReportsNothing) {
  auto det = tiered_detector("blind", 4, 0.0, 0.0, 0.0);
  Rng rng(2);
  const auto obs = fake_obs(std::vector<double>(100, 1.0), std::vector<std::optional<int>>(100, 1));
  for (const auto& l : detect(obs, det, rng)) EXPECT_FALSE(l.has_value());
}

TEST(Detector, ConfusionFrequencyMatchesRow) {
  auto det = identity_detector(6);
  const int bed = 3, sofa = 1;
  det.confusion[bed][bed] = 0.7;
  det.confusion[bed][sofa] = 0.3;
  det.validate(5.0);
  Rng rng(3);
  const int n = 10000;
  const auto obs = fake_obs(std::vector<double>(n, 2.0), std::vector<std::optional<int>>(n, bed));
  const auto out = detect(obs, det, rng);
  const auto sofas = std::count(out.begin(), out.end(), std::optional<int>(sofa));
  const double sd = std::sqrt(n * 0.3 * 0.7);
  EXPECT_NEAR(static_cast<double>(sofas), 0.3 * n, 4.0 * sd);
  EXPECT_EQ(std::count(out.begin(), out.end(), std::nullopt), 0);
}

TEST(Detector, FalsePositivesOnlyOnReturningRays) {
  auto det = tiered_detector("fp", 4, 1.0, 0.0, 1.0);
  Rng rng(4);
  const auto obs = fake_obs({1.0, 5.0, 4.5}, {std::nullopt, std::nullopt, std::nullopt});
  const auto out = detect(obs, det, rng);
  EXPECT_TRUE(out[0].has_value());
  EXPECT_FALSE(out[1].has_value());
  EXPECT_FALSE(out[2].has_value());
}

TEST(Detector, ValidationAndPresets) {
  auto det = identity_detector(3);
  det.confusion[0][0] = 0.9;
  EXPECT_THROW(det.validate(5.0), ConfigError);
  EXPECT_THROW(identity_detector(3, 6.0).validate(5.0), ConfigError);
  EXPECT_THROW(detector_preset("nope", 3), ConfigError);
  const auto weak = detector_preset("mrcnn-default", 6), mid = detector_preset("rednet", 6),
             strong = detector_preset("ft-mrcnn", 6);
  for (const auto* d : {&weak, &mid, &strong}) d->validate(5.0);
  EXPECT_LT(weak.recall[0], mid.recall[0]);
  EXPECT_LT(mid.recall[0], strong.recall[0]);
  EXPECT_GT(weak.false_positive_rate, mid.false_positive_rate);
  EXPECT_NEAR(1.0 - weak.confusion[2][2], 0.15, 1e-12);
}

TEST(Projection, ClippedRayAddsNoObstacles) {
  const Scene s(ascii_floor(room_rows(300, 300)));
  SemanticMap map = make_global_map(s, 2);
  SensorConfig sensor;
  sensor.ray_count = 2;
  sensor.fov_degrees = 0.001;
  const AgentPose p{2.0, 7.525, 0.0, 0};
  const auto obs = world::render_observation(s, p, sensor);
  ASSERT_EQ(obs.depth[0], 5.0);
  project_to_map(map, obs, {std::nullopt, std::nullopt}, p);
  EXPECT_EQ(map.count(kObstacle), 0u);
  EXPECT_GE(map.count(kExplored), 100u);
  EXPECT_LE(map.count(kExplored), 104u);
  EXPECT_TRUE(map.explored({150, 40}));
  EXPECT_TRUE(map.explored({150, 139}));
  EXPECT_FALSE(map.explored({151, 60}));
}

TEST(Projection, LabelledHitSetsCategory) {
  auto rows = room_rows(20, 80);
  rows[10][50] = '1';
  const Scene s(ascii_floor(rows));
  SemanticMap map = make_global_map(s, 3);
  const AgentPose p{0.525, 0.525, 0.0, 0};
  const auto obs = world::render_observation(s, p, SensorConfig{});
  Rng rng(0);
  const auto labels = detect(obs, identity_detector(3), rng);
  project_to_map(map, obs, labels, p);
  EXPECT_TRUE(map.category(1, {10, 50}));
  EXPECT_TRUE(map.obstacle({10, 50}));
  EXPECT_EQ(map.count(kFirstCategory + 1), 1u);
  EXPECT_TRUE(map.explored({10, 30}));
}

TEST(Projection, SpinInConvexRoomSeesEveryInteriorCell) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 10 + static_cast<int>(rng.uniform_int(30)), w = 10 + static_cast<int>(rng.uniform_int(30));
    const Scene s(ascii_floor(room_rows(h, w)));
    SemanticMap map = make_global_map(s, 1);
    const AgentPose start{(1.0 + rng.uniform() * (w - 2)) * 0.05, (1.0 + rng.uniform() * (h - 2)) * 0.05, 0.0, 0};
    SensorConfig sensor;
    sensor.fov_degrees = 30.0;
    sensor.ray_count = 121;
    AgentPose p = start;
    std::set<Cell> walls_seen;
    const double x0 = 0.05, x1 = (w - 1) * 0.05, y0 = 0.05, y1 = (h - 1) * 0.05;
    for (int k = 0; k < 12; ++k) {
      const auto obs = world::render_observation(s, p, sensor);
      project_to_map(map, obs, std::vector<std::optional<int>>(obs.size()), p);
      // Exit point of each ray from the interior rectangle names the wall cell it sees.
      for (double ang : obs.angles) {
        const double dx = std::cos(deg_to_rad(ang)), dy = std::sin(deg_to_rad(ang));
        const double tx = dx > 0 ? (x1 - p.x) / dx : (dx < 0 ? (x0 - p.x) / dx : kInf);
        const double ty = dy > 0 ? (y1 - p.y) / dy : (dy < 0 ? (y0 - p.y) / dy : kInf);
        const double t = std::min(tx, ty);
        const double ex = p.x + t * dx, ey = p.y + t * dy;
        if (tx < ty) walls_seen.insert({static_cast<int>(std::floor(ey / 0.05)), dx > 0 ? w - 1 : 0});
        else walls_seen.insert({dy > 0 ? h - 1 : 0, static_cast<int>(std::floor(ex / 0.05))});
      }
      p.heading = normalize_degrees(p.heading + 30.0);
    }
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const bool interior = r > 0 && c > 0 && r < h - 1 && c < w - 1;
        if (interior) {
          ASSERT_TRUE(map.explored({r, c})) << trial << " " << r << "," << c;
          ASSERT_FALSE(map.obstacle({r, c}));
        } else {
          ASSERT_EQ(map.obstacle({r, c}), walls_seen.count({r, c}) == 1) << trial << " wall " << r << "," << c;
          ASSERT_EQ(map.explored({r, c}), map.obstacle({r, c}));
        }
      }
  }
}

TEST(Projection, NoiselessDetectorNeverInventsSemantics) {
  world::GenerationParams gp;
  gp.rng_seed = 4;
  const Scene s = world::generate_scene(gp);
  SemanticMap map = make_global_map(s, gp.categories);
  const auto det = identity_detector(gp.categories);
  Rng rng(6);
  const auto spec = world::sample_episode(s, s.objects().front().category, 3);
  AgentPose p = spec.start;
  std::size_t explored_before = 0;
  for (int i = 0; i < 400; ++i) {
    const auto obs = world::render_observation(s, p, SensorConfig{});
    project_to_map(map, obs, detect(obs, det, rng), p);
    ASSERT_GE(map.count(kExplored), explored_before);
    explored_before = map.count(kExplored);
    const Action a = rng.uniform() < 0.6 ? Action::Forward : (rng.uniform() < 0.5 ? Action::TurnLeft : Action::TurnRight);
    p = world::step(s, p, a, world::MotionParams{}).pose;
  }
  for (int r = 0; r < map.size(); ++r)
    for (int c = 0; c < map.size(); ++c) {
      for (int k = 0; k < gp.categories; ++k)
        if (map.category(k, {r, c})) {
          ASSERT_EQ(s.category_at(0, {r, c}), k);
        }
      if (map.obstacle({r, c}) || map.get(kFirstCategory, r, c)) {
        ASSERT_TRUE(map.explored({r, c}));
      }
    }
}

TEST(Augment, IsolatedObstacleRemoved) {
  SemanticMap map(1, 16, Cell{0, 0}, 0.05);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) map.mark_explored({r, c});
  map.mark_obstacle({5, 5});
  map.mark_obstacle({10, 10});
  map.mark_obstacle({10, 11});
  const auto out = augment_map(map, AugmentConfig{2, 0, 0});
  EXPECT_FALSE(out.obstacle({5, 5}));
  EXPECT_TRUE(out.obstacle({10, 10}));
  EXPECT_TRUE(out.explored({5, 5}));
}

TEST(Augment, ZeroConfigIsIdentity) {
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const auto map = random_map(rng, 24, 3, 0.6);
    EXPECT_TRUE(augment_map(map, AugmentConfig{0, 0, 0}) == map);
  }
}

TEST(Augment, DilationMatchesNaiveOracle) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    SemanticMap map(2, 40, Cell{0, 0}, 0.05);
    for (int r = 5; r < 35; ++r)
      for (int c = 5; c < 35; ++c) {
        map.mark_explored({r, c});
        if (rng.bernoulli(0.03)) map.mark_obstacle({r, c});
      }
    const int n = 1 + static_cast<int>(rng.uniform_int(3));
    const auto out = augment_map(map, AugmentConfig{0, n, 0});
    std::size_t expected = 0;
    for (int r = 0; r < 40; ++r)
      for (int c = 0; c < 40; ++c) {
        bool any = false;
        for (int dr = -n; dr <= n && !any; ++dr)
          for (int dc = -n; dc <= n && !any; ++dc)
            any = map.in_bounds(r + dr, c + dc) && map.obstacle({r + dr, c + dc});
        ASSERT_EQ(out.obstacle({r, c}), any) << r << "," << c;
        expected += any;
      }
    EXPECT_EQ(out.count(kObstacle), expected);
    for (int k = 0; k < 2; ++k) EXPECT_EQ(out.count(kFirstCategory + k), map.count(kFirstCategory + k));
  }
}

TEST(Augment, FillsOnlySmallEnclosedHoles) {
  SemanticMap map(1, 30, Cell{0, 0}, 0.05);
  for (int r = 2; r < 28; ++r)
    for (int c = 2; c < 28; ++c) map.mark_explored({r, c});
  map.put(kExplored, 10, 10, 0);
  map.put(kExplored, 10, 11, 0);
  for (int r = 15; r < 25; ++r)
    for (int c = 15; c < 25; ++c) map.put(kExplored, r, c, 0);
  map.put(kExplored, 2, 20, 0);  // notch open to the outside
  const auto out = augment_map(map, AugmentConfig{0, 0, 10});
  EXPECT_TRUE(out.explored({10, 10}));
  EXPECT_TRUE(out.explored({10, 11}));
  EXPECT_FALSE(out.explored({20, 20}));
  EXPECT_FALSE(out.explored({2, 20}));
  EXPECT_FALSE(out.explored({0, 0}));
}

TEST(Compress, UnknownMapIsUniform) {
  const SemanticMap map(4, 8, Cell{0, 0}, 0.05);
  const auto cm = compress_map(map, default_palette(4));
  for (auto cls : cm.classes) EXPECT_EQ(cls, kUnknownClass);
  const auto planes = cm.planes();
  EXPECT_EQ(planes.size(), 3u * 64u);
  EXPECT_EQ(planes[0], 255);
}

TEST(Compress, CategoryBeatsObstacle) {
  SemanticMap map(4, 8, Cell{0, 0}, 0.05);
  map.mark_obstacle({1, 1});
  map.mark_category(0, {1, 1});
  map.mark_category(2, {2, 2});
  map.mark_category(3, {2, 2});
  map.mark_obstacle({3, 3});
  map.mark_explored({4, 4});
  const auto cm = compress_map(map, default_palette(4));
  EXPECT_EQ(cm.classes[1 * 8 + 1], kCategoryClass + 0);
  EXPECT_EQ(cm.classes[2 * 8 + 2], kCategoryClass + 3);
  EXPECT_EQ(cm.classes[3 * 8 + 3], kObstacleClass);
  EXPECT_EQ(cm.classes[4 * 8 + 4], kFreeClass);
}

TEST(Compress, RoundTripRecoversClasses) {
  Rng rng(9);
  const auto palette = default_palette(6);
  for (int i = 0; i < 50; ++i) {
    const auto map = random_map(rng, 20, 6, 0.5);
    const auto cm = compress_map(map, palette);
    const auto back = decompress_classes(cm.planes(), cm.size, palette);
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 20; ++c) {
        std::uint8_t expect = kUnknownClass;
        if (map.explored({r, c})) expect = kFreeClass;
        if (map.obstacle({r, c})) expect = kObstacleClass;
        for (int k = 0; k < 6; ++k)
          if (map.category(k, {r, c})) expect = static_cast<std::uint8_t>(kCategoryClass + k);
        ASSERT_EQ(back[static_cast<std::size_t>(r * 20 + c)], expect);
      }
    EXPECT_EQ(run_length_decode(run_length_encode(cm.classes)), cm.classes);
  }
}

TEST(Compress, PaletteChecks) {
  const SemanticMap map(5, 4, Cell{0, 0}, 0.05);
  EXPECT_THROW(compress_map(map, default_palette(3)), ConfigError);
  auto p = default_palette(5);
  p.categories[4] = p.free;
  EXPECT_THROW(p.validate(5), ConfigError);
  default_palette(40).validate(40);
}

TEST(Compress, PpmLayout) {
  SemanticMap map(1, 2, Cell{0, 0}, 0.05);
  map.mark_obstacle({0, 1});
  const auto palette = default_palette(1);
  const std::string ppm = to_ppm(compress_map(map, palette));
  const std::string header = "P6\n2 2\n255\n";
  ASSERT_EQ(ppm.size(), header.size() + 12);
  EXPECT_EQ(ppm.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<std::uint8_t>(ppm[header.size() + 3]), palette.obstacle[0]);
}

TEST(Crop, CenteredFullCropIsIdentity) {
  Rng rng(10);
  const auto global = random_map(rng, 40, 2, 0.5);
  const AgentPose p{20 * 0.05 + 0.01, 20 * 0.05 + 0.01, 0.0, 0};
  EXPECT_TRUE(crop_local(global, p, 40) == global);
}

TEST(Crop, CornerLeavesThreeQuadrantsUnknown) {
  SemanticMap global(1, 40, Cell{0, 0}, 0.05);
  for (int r = 0; r < 40; ++r)
    for (int c = 0; c < 40; ++c) global.mark_explored({r, c});
  const AgentPose p{0.01, 0.01, 0.0, 0};
  const auto local = crop_local(global, p, 40);
  EXPECT_EQ(local.count(kExplored), 400u);
  EXPECT_TRUE(local.explored({20, 20}));
  EXPECT_FALSE(local.explored({19, 20}));
  EXPECT_FALSE(local.explored({20, 19}));
}

TEST(Crop, MatchesIndexOracleAndNestedSizes) {
  Rng rng(11);
  const auto global = random_map(rng, 64, 2, 0.5);
  for (int i = 0; i < 100; ++i) {
    const AgentPose p{rng.uniform() * 64 * 0.05, rng.uniform() * 64 * 0.05, 0.0, 0};
    const auto big = crop_local(global, p, 48);
    const auto small = crop_local(global, p, 24);
    const Cell a = global.agent_cell(p);
    for (int k = 0; k < big.channels(); ++k)
      for (int r = 0; r < 48; ++r)
        for (int c = 0; c < 48; ++c) {
          const int gr = a.row - 24 + r, gc = a.col - 24 + c;
          const std::uint8_t want = global.in_bounds(gr, gc) ? global.get(k, gr, gc) : 0;
          ASSERT_EQ(big.get(k, r, c), want);
          if (r >= 12 && r < 36 && c >= 12 && c < 36) {
            ASSERT_EQ(small.get(k, r - 12, c - 12), want);
          }
        }
    EXPECT_EQ(big.to_world({24, 24}), p.cell(0.05));
  }
  EXPECT_THROW(crop_local(global, AgentPose{}, 25), ConfigError);
}

TEST(Frontier, FullyExploredHasNone) {
  SemanticMap map(1, 16, Cell{0, 0}, 0.05);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) map.mark_explored({r, c});
  EXPECT_TRUE(extract_frontiers(map).empty());
}

TEST(Frontier, HalfExploredGivesOneVerticalCluster) {
  SemanticMap map(1, 20, Cell{0, 0}, 0.05);
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 10; ++c) map.mark_explored({r, c});
  const auto fs = extract_frontiers(map);
  ASSERT_EQ(fs.clusters.size(), 1u);
  EXPECT_EQ(fs.clusters[0].size(), 20);
  EXPECT_DOUBLE_EQ(fs.clusters[0].centroid_col, 9.0);
  EXPECT_DOUBLE_EQ(fs.clusters[0].centroid_row, 9.5);
  EXPECT_TRUE(extract_frontiers(map, 21).empty());
}

TEST(Frontier, MatchesBruteForceUnionFind) {
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    const auto map = random_map(rng, 32, 1, 0.3 + 0.5 * rng.uniform());
    const int min_size = 1 + static_cast<int>(rng.uniform_int(3));
    const auto fs = extract_frontiers(map, min_size);
    std::set<std::set<Cell>> got;
    for (const auto& cl : fs.clusters) got.insert(std::set<Cell>(cl.cells.begin(), cl.cells.end()));
    ASSERT_EQ(got, brute_frontiers(map, min_size));
  }
}
