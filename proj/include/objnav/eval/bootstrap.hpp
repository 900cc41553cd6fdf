#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "objnav/core.hpp"

namespace objnav::eval {

struct BootstrapInterval {
  double mean = 0.0;
  double lower = 0.0;  // one-sided lower bound at the requested confidence
  double upper = 0.0;  // one-sided upper bound at the requested confidence
};

// Percentile bootstrap of the sample mean.
inline BootstrapInterval bootstrap_mean(std::span<const double> values, double confidence = 0.95,
                                        int resamples = 10000, std::uint64_t seed = 1) {
  if (values.empty()) throw ConfigError("bootstrap: no values");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigError("bootstrap: confidence must lie in (0, 1)");
  const std::size_t n = values.size();
  double total = 0.0;
  for (double v : values) total += v;
  Rng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (double& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[rng.uniform_int(n)];
    m = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  auto quantile = [&](double q) {
    const auto k = static_cast<std::size_t>(std::clamp(std::floor(q * (resamples - 1)), 0.0, double(resamples - 1)));
    return means[k];
  };
  return {total / static_cast<double>(n), quantile(1.0 - confidence), quantile(confidence)};
}

// Bootstrap of the mean paired difference a_i - b_i.
inline BootstrapInterval paired_gap(std::span<const double> a, std::span<const double> b, double confidence = 0.95,
                                    int resamples = 10000, std::uint64_t seed = 1) {
  if (a.size() != b.size()) throw ConfigError("bootstrap: paired samples differ in length");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return bootstrap_mean(d, confidence, resamples, seed);
}

}  // namespace objnav::eval
