#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcap/capacity.hpp"
#include "bcap/offspring.hpp"
#include "bcap/stats.hpp"

namespace bcap {

/// Per-sample truncation: r = max(radius_factor * M, min_radius) with M the
/// walk's maximal displacement.
struct RangeOptions {
  double radius_factor = 4.0;
  double min_radius = 16.0;
  /// See TubeFilter; 0 keeps every past vertex inside the ball.
  double tube_alpha = 0.0;
  std::int64_t node_cap = 1'000'000;
  int workers = 1;
};

/// Unbiased (up to truncation) estimator of E[BCap(R_n)], R_n = R[0, n]:
/// k uniform on {0..n}, fixed-length walk R[-k, n-k], past tree at 0,
/// statistic (n+1) 1{past avoids the window} 1{0 not in R[1, n-k]}.
/// Sample s uses rng.split(s).
McEstimate estimate_mean_bcap_range(int d, std::int64_t n, const OffspringLaw& law,
                                    const RangeOptions& opt, std::int64_t samples,
                                    const RandomStream& rng);

/// Per-sample values of the estimator above for sample indices [first, first + count).
std::vector<double> mean_bcap_range_samples(int d, std::int64_t n, const OffspringLaw& law,
                                            const RangeOptions& opt, std::int64_t first,
                                            std::int64_t count, const RandomStream& rng);

inline constexpr std::int64_t kDirectBcapMaxN = 4096;

/// BCap of one sampled range R[0, n] (walk from rng.split(0), estimator from
/// rng.split(1)); conditional on that range.
McEstimate direct_bcap_range(int d, std::int64_t n, const OffspringLaw& law, const CapacityOptions& opt,
                             std::int64_t per_point_samples, const RandomStream& rng);

struct ScalingRow {
  int d = 0;
  std::int64_t n = 0;
  std::string estimator;
  double value = 0, stderr = 0, bias = 0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

enum class ScalingModel { linear, n_over_log, sqrt };

ScalingModel parse_scaling_model(const std::string& s);
const char* to_string(ScalingModel m);

/// value ~ constant * f(n), f in {n, n / log n, sqrt n}, least squares
/// through the origin; exponent from the log-log fit of value against n.
struct ScalingFit {
  ScalingModel model = ScalingModel::linear;
  double constant = 0;
  double exponent = 0;
  double residual = 0;
  double constant_stderr = 0;  // bootstrap over rows
};

ScalingFit fit_scaling(const std::vector<ScalingRow>& rows, ScalingModel model,
                       int bootstrap = 1000, std::uint64_t bootstrap_seed = 1);

/// Budget per row: a pilot of `pilot` samples, then enough to bring the
/// stderr to rel_stderr * value, capped at max_samples.
struct SweepBudget {
  std::int64_t pilot = 1000;
  double rel_stderr = 0.05;
  std::int64_t max_samples = 200000;
};

struct SweepResult {
  std::vector<ScalingRow> rows;
  /// d = 5: value / sqrt n; d = 6: value log n / n; d >= 7: value / n.
  std::vector<double> normalized;
  std::vector<double> normalized_stderr;
  ScalingFit fit;  // sqrt (d = 5), n / log n (d = 6), linear (d >= 7)
};

/// Row k uses rng.split(k); `seed` is recorded in the rows.
SweepResult scaling_sweep(int d, const std::vector<std::int64_t>& n_list, const OffspringLaw& law,
                          const RangeOptions& opt, const SweepBudget& budget, const RandomStream& rng,
                          std::uint64_t seed);

}  // namespace bcap
