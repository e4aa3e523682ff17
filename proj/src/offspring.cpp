#include "bcap/offspring.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bcap/error.hpp"

namespace bcap {

double SizeBiasedLaw::mean() const {
  double m = 0;
  for (std::size_t i = 0; i < pmf.size(); ++i) m += static_cast<double>(i) * pmf[i];
  return m;
}

OffspringLaw OffspringLaw::validate(std::vector<double> pmf) {
  if (pmf.empty()) throw ConfigError("offspring pmf is empty");
  for (double p : pmf) {
    if (!std::isfinite(p)) throw ConfigError("offspring pmf has a non-finite entry");
    if (p < 0) throw ConfigError("offspring pmf has negative mass");
  }
  while (pmf.size() > 1 && pmf.back() == 0.0) pmf.pop_back();
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  if (!(total > 0)) throw ConfigError("offspring pmf has zero total mass");
  for (double& p : pmf) p /= total;

  OffspringLaw law;
  double m1 = 0, m2 = 0, m3 = 0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const double k = static_cast<double>(i);
    m1 += k * pmf[i];
    m2 += k * k * pmf[i];
    m3 += k * k * k * pmf[i];
  }
  if (std::abs(m1 - 1.0) > kCriticalityTol) {
    std::ostringstream os;
    os.precision(17);
    os << "offspring law is not critical: mean = " << m1;
    throw ConfigError(os.str());
  }
  law.mean_ = m1;
  law.variance_ = m2 - m1 * m1;
  law.third_moment_ = m3;
  if (!(law.variance_ > 1e-14)) throw ConfigError("offspring law has zero variance");

  law.pmf_ = std::move(pmf);
  law.cdf_.resize(law.pmf_.size());
  std::partial_sum(law.pmf_.begin(), law.pmf_.end(), law.cdf_.begin());
  law.cdf_.back() = 1.0;

  const SizeBiasedLaw sb = size_biased(law);
  law.sb_cdf_.resize(sb.pmf.size());
  std::partial_sum(sb.pmf.begin(), sb.pmf.end(), law.sb_cdf_.begin());
  for (auto& c : law.sb_cdf_) c /= law.sb_cdf_.back();
  return law;
}

std::vector<double> OffspringLaw::make_critical(std::vector<double> pmf, std::size_t max_k) {
  if (pmf.size() > max_k + 1) pmf.resize(max_k + 1);
  if (pmf.size() < 2) pmf.resize(2, 0.0);
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  if (!(total > 0)) throw ConfigError("cannot renormalize a zero-mass pmf");
  for (double& p : pmf) p /= total;
  double mean = 0;
  for (std::size_t i = 0; i < pmf.size(); ++i) mean += static_cast<double>(i) * pmf[i];
  // Moving delta from p_0 to p_1 raises the mean by delta.
  const double delta = 1.0 - mean;
  pmf[1] += delta;
  pmf[0] -= delta;
  if (pmf[0] < 0 || pmf[1] < 0) throw ConfigError("criticality correction produced negative mass");
  return pmf;
}

OffspringLaw OffspringLaw::binary() {
  OffspringLaw law = validate({0.5, 0.0, 0.5});
  law.name_ = "builtin:binary";
  return law;
}

OffspringLaw OffspringLaw::geometric(int max_k) {
  if (max_k < 2) throw ConfigError("geometric truncation must be >= 2");
  std::vector<double> pmf(static_cast<std::size_t>(max_k) + 1);
  for (int k = 0; k <= max_k; ++k) pmf[k] = std::ldexp(1.0, -(k + 1));
  OffspringLaw law = validate(make_critical(std::move(pmf), static_cast<std::size_t>(max_k)));
  law.name_ = "builtin:geometric";
  return law;
}

OffspringLaw OffspringLaw::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open offspring law file: " + path.string());
  std::vector<double> pmf;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream is(line);
    double p;
    if (!(is >> p)) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": not a number");
    std::string rest;
    if (is >> rest) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": trailing text");
    pmf.push_back(p);
  }
  OffspringLaw law = validate(std::move(pmf));
  law.name_ = "file:" + path.string();
  return law;
}

OffspringLaw OffspringLaw::from_spec(const std::string& spec) {
  if (spec == "builtin:binary") return binary();
  if (spec == "builtin:geometric") return geometric();
  if (spec.rfind("builtin:", 0) == 0) throw ConfigError("unknown builtin law: " + spec);
  return from_file(spec);
}

double OffspringLaw::spine_count_pmf(int k) const {
  if (k < 0) return 0.0;
  double s = 0;
  for (std::size_t j = static_cast<std::size_t>(k) + 1; j < pmf_.size(); ++j) s += pmf_[j];
  return s;
}

std::string OffspringLaw::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << name_ << " [";
  for (std::size_t i = 0; i < pmf_.size(); ++i) os << (i ? "," : "") << pmf_[i];
  os << "] sigma2=" << variance_;
  return os.str();
}

SizeBiasedLaw size_biased(const OffspringLaw& law) {
  SizeBiasedLaw sb;
  sb.pmf.resize(law.pmf().size());
  for (std::size_t i = 0; i < sb.pmf.size(); ++i) sb.pmf[i] = static_cast<double>(i) * law.pmf()[i];
  return sb;
}

SpineSplit spine_split(const OffspringLaw& law, RandomStream& rng) {
  const int k = law.sample_size_biased(rng);
  const int j = 1 + static_cast<int>(rng.below32(static_cast<std::uint32_t>(k)));
  return {j - 1, k - j};
}

int root_offspring(const OffspringLaw& law, RandomStream& rng) { return law.sample(rng); }

}  // namespace bcap
