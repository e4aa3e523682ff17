#include "bcap/capacity.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bcap/error.hpp"

namespace bcap {

TruncationPolicy capacity_policy(const SiteSet& A, const CapacityOptions& opt) {
  TruncationPolicy p;
  p.spine_exit_radius = std::max(opt.radius_factor * A.diameter(), opt.min_radius);
  p.subtree_node_cap = opt.node_cap;
  return p;
}

double truncation_bias_order(double diam, double r, int d) {
  return std::pow(std::max(diam, 1.0) / r, d - 4);
}

namespace {

struct AvoidVisitor {
  const SiteSet* A;
  BallKeep ball;
  bool hit = false;
  bool vertex(const std::int64_t* p) {
    if (A->contains(p)) {
      hit = true;
      return true;
    }
    return false;
  }
  bool keep(const std::int64_t*, std::int64_t d2) const { return ball(d2); }
  void cut(const std::int64_t*) {}
};

}  // namespace

bool past_avoids(const OffspringLaw& law, const LatticePoint& start, const SiteSet& A,
                 const TruncationPolicy& policy, const RandomStream& tree_stream) {
  if (A.empty()) return true;
  TreeStreams streams(tree_stream);
  const SpineSample sp =
      sample_spine(law, start, policy.spine_exit_radius, policy.spine_step_cap, streams.spine);
  AvoidVisitor v{&A, BallKeep{policy.kill_radius2()}};
  thread_local GwScratch sc;
  grow_past(law, sp, policy, streams.past, v, sc);
  return !v.hit;
}

McEstimate estimate_equilibrium(const SiteSet& A, const LatticePoint& x, const OffspringLaw& law,
                                const TruncationPolicy& policy, std::int64_t samples,
                                const RandomStream& rng, int workers) {
  if (samples < 1) throw ConfigError("samples must be >= 1");
  policy.validate();
  if (!A.contains(x)) return McEstimate::exact(0.0);
  const auto vals = parallel_map<double>(samples, workers, [&](std::int64_t s) {
    return past_avoids(law, x, A, policy, rng.split(static_cast<std::uint64_t>(s))) ? 1.0 : 0.0;
  });
  McEstimate e = summarize(vals);
  e.bias_bound = e.mean * truncation_bias_order(A.diameter(), policy.spine_exit_radius, x.dim());
  std::ostringstream os;
  os << "r=" << policy.spine_exit_radius << " kill=" << policy.effective_kill_radius()
     << " cap=" << policy.subtree_node_cap;
  e.meta = os.str();
  return e;
}

EquilibriumProfile estimate_bcap(const SiteSet& A, const OffspringLaw& law,
                                 const TruncationPolicy& policy, std::int64_t per_point_samples,
                                 const RandomStream& rng, int workers) {
  EquilibriumProfile prof{A, {}, McEstimate::exact(0.0)};
  if (A.empty()) return prof;
  policy.validate();
  if (per_point_samples < 1) throw ConfigError("samples must be >= 1");
  const auto n = static_cast<std::int64_t>(A.size());
  // Flatten (point, sample) so parallelism does not depend on |A|.
  const auto vals = parallel_map<double>(n * per_point_samples, workers, [&](std::int64_t t) {
    const std::int64_t i = t / per_point_samples, s = t % per_point_samples;
    const RandomStream point_stream = rng.split(static_cast<std::uint64_t>(i));
    return past_avoids(law, A.point(static_cast<std::size_t>(i)), A, policy,
                       point_stream.split(static_cast<std::uint64_t>(s)))
               ? 1.0
               : 0.0;
  });
  const double order = truncation_bias_order(A.diameter(), policy.spine_exit_radius, A.dim());
  prof.e_values.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    McEstimate e = summarize(std::span<const double>(vals).subspan(
        static_cast<std::size_t>(i * per_point_samples), static_cast<std::size_t>(per_point_samples)));
    e.bias_bound = e.mean * order;
    prof.e_values.push_back(e);
  }
  prof.bcap = sum_independent(prof.e_values);
  return prof;
}

std::vector<std::size_t> inner_boundary(const SiteSet& A) {
  std::vector<std::size_t> out;
  const int d = A.dim();
  std::array<std::int64_t, kMaxDim> y{};
  for (std::size_t i = 0; i < A.size(); ++i) {
    const std::int64_t* x = A.coords(i);
    bool interior = true;
    for (int code = 0; code < 2 * d && interior; ++code) {
      std::copy(x, x + d, y.begin());
      apply_step(y.data(), static_cast<unsigned>(code));
      interior = A.contains(y.data());
    }
    if (!interior) out.push_back(i);
  }
  return out;
}

McEstimate estimate_bcap_sampled(const SiteSet& A, const OffspringLaw& law,
                                 const TruncationPolicy& policy, std::int64_t samples,
                                 const RandomStream& rng, int workers) {
  if (A.empty()) return McEstimate::exact(0.0);
  if (samples < 1) throw ConfigError("samples must be >= 1");
  policy.validate();
  const std::vector<std::size_t> bd = inner_boundary(A);
  const auto nb = static_cast<double>(bd.size());
  const auto vals = parallel_map<double>(samples, workers, [&](std::int64_t s) {
    RandomStream st = rng.split(static_cast<std::uint64_t>(s));
    RandomStream pick = st.split(0);
    const std::size_t i = bd[pick.below(bd.size())];
    return past_avoids(law, A.point(i), A, policy, st.split(1)) ? nb : 0.0;
  });
  McEstimate e = summarize(vals);
  e.bias_bound = e.mean * truncation_bias_order(A.diameter(), policy.spine_exit_radius, A.dim());
  std::ostringstream os;
  os << "boundary=" << bd.size() << " r=" << policy.spine_exit_radius;
  e.meta = os.str();
  return e;
}

McEstimate estimate_bcap_via_hitting(const SiteSet& A, const OffspringLaw& law,
                                     const TruncationPolicy& policy, const LatticePoint& x_far,
                                     std::int64_t samples, const GreenTable* table,
                                     const RandomStream& rng, int workers) {
  if (A.empty()) return McEstimate::exact(0.0);
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (x_far.norm2() == 0) throw DomainError("x_far must differ from the origin");
  policy.validate();
  const double Gx = table ? table->G(x_far) : asymptotic_G(x_far.dim(), x_far);
  const double denom = 0.5 * law.variance() * Gx;
  const auto vals = parallel_map<double>(samples, workers, [&](std::int64_t s) {
    return past_avoids(law, x_far, A, policy, rng.split(static_cast<std::uint64_t>(s))) ? 0.0 : 1.0;
  });
  McEstimate p = summarize(vals);
  McEstimate e;
  e.samples = p.samples;
  const double diam = A.diameter();
  // Bias: truncation of the tree seen from x_far, plus the asymptotic error order.
  const double reach = std::max(diam, 1.0) + x_far.norm();
  const double lemma_err = std::pow(std::max(diam, 1.0), 3) / std::pow(x_far.norm(), 2.0 / 3.0);
  std::ostringstream os;
  os << "x_far=" << x_far.to_string() << " G=" << Gx << " p_hit=" << p.mean << " lemma_error_order="
     << lemma_err;
  if (p.mean == 0) {
    e.mean = std::numeric_limits<double>::quiet_NaN();
    e.stderr = std::numeric_limits<double>::infinity();
    os << " noninformative=1";
  } else {
    e.mean = p.mean / denom;
    e.stderr = p.stderr / denom;
    e.variance = p.variance / (denom * denom);
    e.bias_bound = e.mean * truncation_bias_order(reach, policy.spine_exit_radius, A.dim());
  }
  e.meta = os.str();
  return e;
}

}  // namespace bcap
