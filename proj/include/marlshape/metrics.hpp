#pragma once

#include <span>
#include <vector>

namespace marlshape::metrics {

struct NormalizeResult {
  std::vector<double> values;
  bool constant_input = false;  // min == max; values pinned to 0.5 by convention
};

// Affine rescale so that `lo` maps to 0 and `hi` to 1.
NormalizeResult normalize(std::span<const double> series, double lo, double hi);

// Trailing rolling mean; prefix positions use the data available so far.
std::vector<double> rolling_mean(std::span<const double> series, int window);
// Trailing rolling population standard deviation.
std::vector<double> rolling_std(std::span<const double> series, int window);

inline constexpr int kDefaultWindow = 1000;

// Per-episode returns for one training run, indexed [agent][episode].
using RunReturns = std::vector<std::vector<double>>;

struct MethodCurves {
  double raw_min = 0.0;
  double raw_max = 0.0;
  bool constant = false;
  // Per-episode mean over agents and seeds of the normalized returns.
  std::vector<double> mean_normalized;
  std::vector<double> smoothed;
  std::vector<double> roll_std;

  double final_smoothed() const { return smoothed.empty() ? 0.0 : smoothed.back(); }
  double final_raw_mean = 0.0;  // trailing-window mean of raw returns
  // Mean rolling std over the last quarter of the episodes.
  double final_quartile_std() const;
};

// Normalization bounds are taken over every (seed, agent, episode) return of
// the method's own runs.
MethodCurves aggregate(std::span<const RunReturns> runs, int window = kDefaultWindow);

}  // namespace marlshape::metrics
