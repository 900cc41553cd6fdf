#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "objnav/world/sensor.hpp"

namespace objnav::perception {

// Parametric stand-in for an object detector: per-category recall, a
// row-stochastic confusion matrix (true -> reported), a range limit and a
// per-ray false positive rate.
struct DetectorModel {
  std::string name;
  std::vector<double> recall;
  std::vector<std::vector<double>> confusion;
  double max_detect_range = 4.0;
  double false_positive_rate = 0.0;

  int categories() const { return static_cast<int>(recall.size()); }

  void validate(double sensor_max_range) const {
    const std::size_t c = recall.size();
    if (c == 0) throw ConfigError("detector " + name + ": no categories");
    if (confusion.size() != c) throw ConfigError("detector " + name + ": confusion must be C x C");
    for (std::size_t i = 0; i < c; ++i) {
      if (!(recall[i] >= 0.0 && recall[i] <= 1.0)) throw ConfigError("detector " + name + ": recall outside [0, 1]");
      if (confusion[i].size() != c) throw ConfigError("detector " + name + ": confusion must be C x C");
      double sum = 0.0;
      for (double p : confusion[i]) {
        if (!(p >= 0.0)) throw ConfigError("detector " + name + ": negative confusion entry");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("detector " + name + ": confusion row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
    if (!(max_detect_range > 0.0) || max_detect_range > sensor_max_range)
      throw ConfigError("detector " + name + ": max_detect_range must be in (0, sensor max_range]");
    if (!(false_positive_rate >= 0.0 && false_positive_rate <= 1.0))
      throw ConfigError("detector " + name + ": false_positive_rate outside [0, 1]");
  }
};

// Uniform recall; `off_diagonal` confusion mass spread evenly over the other
// categories.
inline DetectorModel tiered_detector(std::string name, int categories, double recall, double off_diagonal,
                                     double false_positive_rate, double max_detect_range = 4.0) {
  DetectorModel d;
  d.name = std::move(name);
  d.recall.assign(static_cast<std::size_t>(categories), recall);
  d.confusion.assign(static_cast<std::size_t>(categories), std::vector<double>(static_cast<std::size_t>(categories), 0.0));
  for (int i = 0; i < categories; ++i) {
    auto& row = d.confusion[static_cast<std::size_t>(i)];
    if (categories == 1) {
      row[0] = 1.0;
      continue;
    }
    for (int j = 0; j < categories; ++j)
      row[static_cast<std::size_t>(j)] = i == j ? 1.0 - off_diagonal : off_diagonal / (categories - 1);
  }
  d.false_positive_rate = false_positive_rate;
  d.max_detect_range = max_detect_range;
  return d;
}

inline DetectorModel identity_detector(int categories, double max_detect_range = 4.0) {
  return tiered_detector("identity", categories, 1.0, 0.0, 0.0, max_detect_range);
}

// Synthetic quality tiers, ordered weakest to strongest. The numbers are
// tuning knobs, not measurements of any real detector.
inline std::vector<std::string> preset_names() { return {"mrcnn-default", "rednet", "ft-mrcnn", "identity"}; }

inline DetectorModel detector_preset(const std::string& name, int categories, double max_detect_range = 4.0) {
  if (name == "mrcnn-default") return tiered_detector(name, categories, 0.70, 0.15, 0.02, max_detect_range);
  if (name == "rednet") return tiered_detector(name, categories, 0.82, 0.08, 0.01, max_detect_range);
  if (name == "ft-mrcnn") return tiered_detector(name, categories, 0.93, 0.03, 0.005, max_detect_range);
  if (name == "identity") return identity_detector(categories, max_detect_range);
  throw ConfigError("unknown detector preset '" + name + "'");
}

inline int sample_row(const std::vector<double>& row, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    acc += row[j];
    if (u < acc) return static_cast<int>(j);
  }
  for (std::size_t j = row.size(); j-- > 0;)
    if (row[j] > 0.0) return static_cast<int>(j);
  return 0;
}

// Reported label per ray. Only rays that return within max_detect_range can
// carry a label; true objects are kept with probability recall and then
// relabelled through the confusion row, other returns hallucinate a uniform
// category with probability false_positive_rate.
inline std::vector<std::optional<int>> detect(const world::Observation& obs, const DetectorModel& det, Rng& rng) {
  std::vector<std::optional<int>> out(obs.size());
  const auto c = static_cast<std::uint64_t>(det.categories());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!obs.ray_hit(i) || obs.depth[i] > det.max_detect_range) continue;
    const auto& truth = obs.true_labels[i];
    if (truth && *truth >= 0 && *truth < det.categories()) {
      const auto t = static_cast<std::size_t>(*truth);
      if (rng.uniform() < det.recall[t]) out[i] = sample_row(det.confusion[t], rng.uniform());
    } else if (rng.uniform() < det.false_positive_rate) {
      out[i] = static_cast<int>(rng.uniform_int(c));
    }
  }
  return out;
}

}  // namespace objnav::perception
