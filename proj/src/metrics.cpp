#include "marlshape/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marlshape::metrics {

NormalizeResult normalize(std::span<const double> series, double lo, double hi) {
  if (series.empty()) throw std::invalid_argument("cannot normalize an empty series");
  NormalizeResult out;
  out.values.reserve(series.size());
  if (lo == hi) {
    out.constant_input = true;
    out.values.assign(series.size(), 0.5);
    return out;
  }
  for (double v : series) out.values.push_back((v - lo) / (hi - lo));
  return out;
}

std::vector<double> rolling_mean(std::span<const double> series, int window) {
  if (window <= 0) throw std::invalid_argument("window must be positive");
  std::vector<double> out(series.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    sum += series[t];
    if (t >= static_cast<std::size_t>(window)) sum -= series[t - window];
    const std::size_t len = std::min<std::size_t>(t + 1, window);
    out[t] = sum / static_cast<double>(len);
  }
  return out;
}

std::vector<double> rolling_std(std::span<const double> series, int window) {
  if (window <= 0) throw std::invalid_argument("window must be positive");
  std::vector<double> out(series.size());
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    sum += series[t];
    sumsq += series[t] * series[t];
    if (t >= static_cast<std::size_t>(window)) {
      sum -= series[t - window];
      sumsq -= series[t - window] * series[t - window];
    }
    const double len = static_cast<double>(std::min<std::size_t>(t + 1, window));
    const double mean = sum / len;
    const double var = std::max(0.0, sumsq / len - mean * mean);
    out[t] = std::sqrt(var);
  }
  return out;
}

double MethodCurves::final_quartile_std() const {
  if (roll_std.empty()) return 0.0;
  const std::size_t from = roll_std.size() - std::max<std::size_t>(1, roll_std.size() / 4);
  double sum = 0.0;
  for (std::size_t t = from; t < roll_std.size(); ++t) sum += roll_std[t];
  return sum / static_cast<double>(roll_std.size() - from);
}

MethodCurves aggregate(std::span<const RunReturns> runs, int window) {
  MethodCurves out;
  std::size_t episodes = 0;
  bool any = false;
  for (const auto& run : runs) {
    for (const auto& series : run) {
      if (!any) {
        episodes = series.size();
        if (!series.empty()) {
          out.raw_min = out.raw_max = series[0];
        }
        any = true;
      }
      if (series.size() != episodes)
        throw std::invalid_argument("all runs must have the same episode count");
      for (double v : series) {
        out.raw_min = std::min(out.raw_min, v);
        out.raw_max = std::max(out.raw_max, v);
      }
    }
  }
  if (!any || episodes == 0) return out;
  out.constant = (out.raw_min == out.raw_max);

  std::vector<double> mean_raw(episodes, 0.0);
  out.mean_normalized.assign(episodes, 0.0);
  double count = 0.0;
  for (const auto& run : runs)
    for (const auto& series : run) {
      count += 1.0;
      for (std::size_t t = 0; t < episodes; ++t) {
        mean_raw[t] += series[t];
        out.mean_normalized[t] +=
            out.constant ? 0.5 : (series[t] - out.raw_min) / (out.raw_max - out.raw_min);
      }
    }
  for (std::size_t t = 0; t < episodes; ++t) {
    mean_raw[t] /= count;
    out.mean_normalized[t] /= count;
  }
  out.smoothed = rolling_mean(out.mean_normalized, window);
  out.roll_std = rolling_std(out.mean_normalized, window);
  out.final_raw_mean = rolling_mean(mean_raw, window).back();
  return out;
}

}  // namespace marlshape::metrics
