#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "objnav/perception/frontier.hpp"

namespace objnav::policy {

using perception::SemanticMap;

enum class GoalSource : std::uint8_t { Corner, Frontier, Discrete, Continuous, TargetOverride };

inline std::string_view to_string(GoalSource s) {
  switch (s) {
    case GoalSource::Corner: return "corner";
    case GoalSource::Frontier: return "frontier";
    case GoalSource::Discrete: return "discrete";
    case GoalSource::Continuous: return "continuous";
    case GoalSource::TargetOverride: return "target";
  }
  return "corner";
}

inline GoalSource goal_source_from_string(std::string_view s) {
  if (s == "corner") return GoalSource::Corner;
  if (s == "frontier") return GoalSource::Frontier;
  if (s == "discrete") return GoalSource::Discrete;
  if (s == "continuous") return GoalSource::Continuous;
  if (s == "target") return GoalSource::TargetOverride;
  throw ParseError("goal.source", "unknown goal source '" + std::string(s) + "'");
}

// A map coordinate in the local frame.
struct LongTermGoal {
  Cell cell;
  GoalSource source = GoalSource::Corner;
  bool operator==(const LongTermGoal&) const = default;
};

// Corners in the order top-left, top-right, bottom-left, bottom-right.
inline std::vector<Cell> corner_cells(int m, int margin) {
  const int lo = std::clamp(margin, 0, m - 1), hi = std::clamp(m - 1 - margin, 0, m - 1);
  return {Cell{lo, lo}, Cell{lo, hi}, Cell{hi, lo}, Cell{hi, hi}};
}

inline LongTermGoal corner_goal(int m_local, int margin, Rng& rng) {
  const auto corners = corner_cells(m_local, margin);
  return LongTermGoal{corners[rng.uniform_int(corners.size())], GoalSource::Corner};
}

inline LongTermGoal corner_goal(const SemanticMap& local, int margin, Rng& rng) {
  return corner_goal(local.size(), margin, rng);
}

inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

inline std::optional<LongTermGoal> frontier_goal(const perception::FrontierSet& frontiers, Rng& rng) {
  if (frontiers.empty()) return std::nullopt;
  const auto& cl = frontiers.clusters[rng.uniform_int(frontiers.clusters.size())];
  return LongTermGoal{Cell{round_half_up(cl.centroid_row), round_half_up(cl.centroid_col)}, GoalSource::Frontier};
}

// Highest score wins; the first index wins ties.
inline LongTermGoal discrete_goal(std::span<const Cell> candidates, std::span<const double> scores) {
  if (candidates.empty()) throw ConfigError("discrete goal: empty candidate set");
  if (candidates.size() != scores.size())
    throw ConfigError("discrete goal: " + std::to_string(scores.size()) + " scores for " +
                      std::to_string(candidates.size()) + " candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return LongTermGoal{candidates[best], GoalSource::Discrete};
}

inline LongTermGoal continuous_goal(double a1, double a2, int m_local) {
  if (!(a1 >= 0.0 && a1 <= 1.0) || !(a2 >= 0.0 && a2 <= 1.0))
    throw ConfigError("continuous goal: action components must lie in [0, 1]");
  return LongTermGoal{Cell{round_half_up(a1 * (m_local - 1)), round_half_up(a2 * (m_local - 1))},
                      GoalSource::Continuous};
}

// Nearest mapped cell of the goal category to the map centre (the agent);
// ties resolve to the first cell in row-major order.
inline std::optional<LongTermGoal> target_override(const SemanticMap& local, int goal_category) {
  if (goal_category < 0 || goal_category >= local.categories()) return std::nullopt;
  const int m = local.size(), center = m / 2;
  const std::uint8_t* ch = local.channel(perception::kFirstCategory + goal_category);
  std::optional<LongTermGoal> best;
  long long best_d = 0;
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      if (!ch[static_cast<std::size_t>(r) * static_cast<std::size_t>(m) + static_cast<std::size_t>(c)]) continue;
      const long long d = static_cast<long long>(r - center) * (r - center) + static_cast<long long>(c - center) * (c - center);
      if (!best || d < best_d) {
        best = LongTermGoal{Cell{r, c}, GoalSource::TargetOverride};
        best_d = d;
      }
    }
  return best;
}

// Plug-in points for learned policies. The shipped implementations draw
// uniformly at random.
class CandidateScorer {
 public:
  virtual ~CandidateScorer() = default;
  virtual std::vector<double> score(const SemanticMap& local, std::span<const Cell> candidates) = 0;
};

class CoordinateProducer {
 public:
  virtual ~CoordinateProducer() = default;
  virtual std::pair<double, double> produce(const SemanticMap& local) = 0;
};

class UniformScorer : public CandidateScorer {
 public:
  explicit UniformScorer(Rng& rng) : rng_(rng) {}
  std::vector<double> score(const SemanticMap&, std::span<const Cell> candidates) override {
    std::vector<double> out(candidates.size());
    for (double& s : out) s = rng_.uniform();
    return out;
  }

 private:
  Rng& rng_;
};

class UniformCoordinates : public CoordinateProducer {
 public:
  explicit UniformCoordinates(Rng& rng) : rng_(rng) {}
  std::pair<double, double> produce(const SemanticMap&) override {
    const double a1 = rng_.uniform();
    return {a1, rng_.uniform()};
  }

 private:
  Rng& rng_;
};

enum class PolicyKind : std::uint8_t { CornerRandom, FrontierRandom, DiscreteCandidate, ContinuousScripted };

inline std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::CornerRandom: return "corner";
    case PolicyKind::FrontierRandom: return "frontier";
    case PolicyKind::DiscreteCandidate: return "discrete";
    case PolicyKind::ContinuousScripted: return "continuous";
  }
  return "corner";
}

inline PolicyKind policy_kind_from_string(std::string_view s) {
  if (s == "corner") return PolicyKind::CornerRandom;
  if (s == "frontier") return PolicyKind::FrontierRandom;
  if (s == "discrete") return PolicyKind::DiscreteCandidate;
  if (s == "continuous") return PolicyKind::ContinuousScripted;
  throw ConfigError("unknown policy kind '" + std::string(s) + "'");
}

struct PolicyConfig {
  PolicyKind kind = PolicyKind::FrontierRandom;
  int f_update = 25;
  std::vector<Cell> candidates;  // discrete policy; see default_candidates
  int corner_margin = 24;
  int frontier_min_cluster = 3;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (f_update < 1) throw ConfigError("policy: f_update must be >= 1");
    if (corner_margin < 0) throw ConfigError("policy: corner_margin must be >= 0");
    if (frontier_min_cluster < 1) throw ConfigError("policy: frontier_min_cluster must be >= 1");
    if (kind == PolicyKind::DiscreteCandidate && candidates.empty())
      throw ConfigError("policy: discrete policy needs a nonempty candidate set");
  }
};

// The four inset corners of an m-cell local map.
inline std::vector<Cell> default_candidates(int m, int margin) { return corner_cells(m, margin); }

// Long-term goal producer for one episode.
class GoalPolicy {
 public:
  GoalPolicy(const PolicyConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), rng_(seed), scorer_(std::make_unique<UniformScorer>(rng_)),
        producer_(std::make_unique<UniformCoordinates>(rng_)) {
    cfg_.validate();
  }
  GoalPolicy(const GoalPolicy&) = delete;
  GoalPolicy& operator=(const GoalPolicy&) = delete;

  void set_scorer(std::unique_ptr<CandidateScorer> s) { scorer_ = std::move(s); }
  void set_producer(std::unique_ptr<CoordinateProducer> p) { producer_ = std::move(p); }
  const PolicyConfig& config() const { return cfg_; }

  LongTermGoal predict(const SemanticMap& local) {
    const int m = local.size();
    switch (cfg_.kind) {
      case PolicyKind::CornerRandom:
        return corner_goal(local, cfg_.corner_margin, rng_);
      case PolicyKind::FrontierRandom: {
        if (auto g = frontier_goal(perception::extract_frontiers(local, cfg_.frontier_min_cluster), rng_)) return *g;
        return corner_goal(local, cfg_.corner_margin, rng_);
      }
      case PolicyKind::DiscreteCandidate: {
        std::vector<Cell> cands = cfg_.candidates;
        for (Cell& c : cands) c = Cell{std::clamp(c.row, 0, m - 1), std::clamp(c.col, 0, m - 1)};
        const auto scores = scorer_->score(local, cands);
        return discrete_goal(cands, scores);
      }
      case PolicyKind::ContinuousScripted: {
        const auto [a1, a2] = producer_->produce(local);
        return continuous_goal(a1, a2, m);
      }
    }
    return corner_goal(local, cfg_.corner_margin, rng_);
  }

 private:
  PolicyConfig cfg_;
  Rng rng_;
  std::unique_ptr<CandidateScorer> scorer_;
  std::unique_ptr<CoordinateProducer> producer_;
};

}  // namespace objnav::policy
