#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bcap/rng.hpp"

namespace bcap {

/// Absolute tolerance on |mean - 1| for a law to count as critical.
inline constexpr double kCriticalityTol = 1e-12;

/// Size-biased law q_i = i p_i of a critical offspring law.
struct SizeBiasedLaw {
  std::vector<double> pmf;  // pmf[i] = q_i; pmf[0] = 0
  double mean() const;
};

/// Children of a spine vertex other than its spine successor, split by
/// sibling order: indices below the successor are past, above are future.
struct SpineSplit {
  int past_count = 0;
  int future_count = 0;
};

/// Critical offspring pmf p_0..p_K with cached moments and samplers.
class OffspringLaw {
 public:
  /// Rejects negative mass, non-criticality beyond kCriticalityTol and zero
  /// variance. Entries are renormalized to sum 1 before the checks.
  static OffspringLaw validate(std::vector<double> pmf);

  /// p_0 = p_2 = 1/2; sigma^2 = 1.
  static OffspringLaw binary();
  /// p_k = 2^-(k+1) for k <= max_k, renormalized, mean restored by moving
  /// mass between p_0 and p_1. sigma^2 -> 2 as max_k grows.
  static OffspringLaw geometric(int max_k = 40);
  /// One probability per line, index = line number - 1. Blank lines and
  /// lines starting with '#' are skipped.
  static OffspringLaw from_file(const std::filesystem::path& path);
  /// "builtin:binary", "builtin:geometric", or a file path.
  static OffspringLaw from_spec(const std::string& spec);

  /// Truncate to [0, max_k], renormalize, then shift mass between p_0 and p_1
  /// so that the mean is exactly 1 (up to rounding).
  static std::vector<double> make_critical(std::vector<double> pmf, std::size_t max_k);

  const std::vector<double>& pmf() const { return pmf_; }
  int max_children() const { return static_cast<int>(pmf_.size()) - 1; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double third_moment() const { return third_moment_; }
  /// P(d_i = k) = sum_{j >= k+1} p_j, the law of the future (or past) count
  /// of a spine vertex.
  double spine_count_pmf(int k) const;
  const std::string& name() const { return name_; }

  int sample(RandomStream& rng) const { return sample_cdf(cdf_, rng); }
  int sample_size_biased(RandomStream& rng) const { return sample_cdf(sb_cdf_, rng); }

  std::string describe() const;

 private:
  OffspringLaw() = default;
  /// Inversion on a 2^-32 grid of uniforms.
  static int sample_cdf(const std::vector<double>& cdf, RandomStream& rng) {
    const double u = rng.uniform32();
    int k = 0;
    const int last = static_cast<int>(cdf.size()) - 1;
    while (k < last && u > cdf[k]) ++k;
    return k;
  }

  std::vector<double> pmf_;
  std::vector<double> cdf_;
  std::vector<double> sb_cdf_;
  double mean_ = 0, variance_ = 0, third_moment_ = 0;
  std::string name_ = "custom";
};

SizeBiasedLaw size_biased(const OffspringLaw& law);

/// K ~ size-biased law, J uniform on {1..K}: past = J-1, future = K-J.
SpineSplit spine_split(const OffspringLaw& law, RandomStream& rng);

/// The root has K children with P(K = i) = p_{i-1}; its first child is the
/// spine successor and the remaining K-1 are all future. Returns K-1.
int root_offspring(const OffspringLaw& law, RandomStream& rng);

}  // namespace bcap
