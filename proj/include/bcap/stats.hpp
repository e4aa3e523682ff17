#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace bcap {

/// Monte Carlo estimate. stderr = sample sd / sqrt(samples).
struct McEstimate {
  double mean = 0;
  double stderr = 0;
  std::int64_t samples = 0;
  double bias_bound = 0;  // absolute, >= 0
  double variance = 0;    // sample variance of one draw
  std::string meta;       // parameter echo

  static McEstimate exact(double value) { return {value, 0.0, 0, 0.0, 0.0, {}}; }
};

/// Pairwise (cascade) summation; result independent of how the span was produced.
double pairwise_sum(std::span<const double> xs);

/// Mean, variance and stderr of xs with pairwise sums in index order.
McEstimate summarize(std::span<const double> xs);

/// Sample covariance of two equally sized sequences.
double covariance(std::span<const double> xs, std::span<const double> ys);

/// Sum of independent estimates; variances add.
McEstimate sum_independent(std::span<const McEstimate> parts);

/// Runs body(i) for i in [0, count) on `workers` threads. Task i always
/// writes its own slot, so the output order is independent of scheduling.
void parallel_for(std::int64_t count, int workers, const std::function<void(std::int64_t)>& body);

template <class T, class F>
std::vector<T> parallel_map(std::int64_t count, int workers, F&& f) {
  std::vector<T> out(static_cast<std::size_t>(count));
  parallel_for(count, workers, [&](std::int64_t i) { out[static_cast<std::size_t>(i)] = f(i); });
  return out;
}

/// Ordinary least squares y = a + b x. Returns {a, b, rss}.
struct LineFit {
  double intercept = 0;
  double slope = 0;
  double rss = 0;
  double slope_stderr = 0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);
/// Weighted least squares with weights w_i = 1 / sigma_i^2.
LineFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                          std::span<const double> sigma);

}  // namespace bcap
