#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bcap/green.hpp"
#include "bcap/gwtree.hpp"
#include "bcap/lattice.hpp"
#include "bcap/offspring.hpp"
#include "bcap/stats.hpp"

namespace bcap {

/// Exit radius r = max(radius_factor * diam(A), min_radius).
struct CapacityOptions {
  double radius_factor = 4.0;
  double min_radius = 16.0;
  std::int64_t node_cap = 1'000'000;
  int workers = 1;
};

TruncationPolicy capacity_policy(const SiteSet& A, const CapacityOptions& opt);

/// Relative truncation bias order (max(diam, 1) / r)^(d-4).
double truncation_bias_order(double diam, double r, int d);

/// True iff the truncated past of the invariant tree started at `start`
/// avoids A. Stops at the first hit.
bool past_avoids(const OffspringLaw& law, const LatticePoint& start, const SiteSet& A,
                 const TruncationPolicy& policy, const RandomStream& tree_stream);

/// e_A(x): fraction of pasts from x avoiding A. Sample s uses rng.split(s).
McEstimate estimate_equilibrium(const SiteSet& A, const LatticePoint& x, const OffspringLaw& law,
                                const TruncationPolicy& policy, std::int64_t samples,
                                const RandomStream& rng, int workers = 1);

struct EquilibriumProfile {
  SiteSet A;
  std::vector<McEstimate> e_values;  // aligned with A.point(i)
  McEstimate bcap;
};

/// Point i of A uses rng.split(i).
EquilibriumProfile estimate_bcap(const SiteSet& A, const OffspringLaw& law,
                                 const TruncationPolicy& policy, std::int64_t per_point_samples,
                                 const RandomStream& rng, int workers = 1);

/// Points of A with a neighbour outside A. e_A vanishes at every other point.
std::vector<std::size_t> inner_boundary(const SiteSet& A);

/// |dA| * mean of e_A(X) over X uniform on the inner boundary dA.
McEstimate estimate_bcap_sampled(const SiteSet& A, const OffspringLaw& law,
                                 const TruncationPolicy& policy, std::int64_t samples,
                                 const RandomStream& rng, int workers = 1);

/// P(past from x_far hits A) / ((sigma^2/2) G(x_far)). A zero hit count is
/// flagged "noninformative" in meta with a NaN mean.
McEstimate estimate_bcap_via_hitting(const SiteSet& A, const OffspringLaw& law,
                                     const TruncationPolicy& policy, const LatticePoint& x_far,
                                     std::int64_t samples, const GreenTable* table,
                                     const RandomStream& rng, int workers = 1);

// ---------------------------------------------------------------------------
// Energy minimization.

struct EnergyResult {
  std::vector<LatticePoint> points;
  std::vector<double> nu;  // probability weights aligned with points
  double energy = 0;
  double fw_gap = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy_trace;  // energy after each iteration
};

/// Frank-Wolfe with away steps and exact line search for
/// min_{nu in simplex} nu^T K nu. K is dense, symmetric and positive.
/// Returns weights, energy, gap and iteration count.
struct SimplexQpResult {
  std::vector<double> x;
  double value = 0;
  double gap = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};
SimplexQpResult minimize_simplex_qp(const std::vector<double>& K, std::size_t n, double tol,
                                    int max_iters, const std::vector<double>* start = nullptr);

/// Energy minimization over probability measures on A with kernel G(x - y).
/// If A is invariant under coordinate permutations and sign flips the
/// problem is solved on orbits exactly.
EnergyResult energy_minimize(const SiteSet& A, const GreenTable& table, double tol, int max_iters);

bool is_symmetric_set(const SiteSet& A);

double capacity_proxy(const EnergyResult& result);

}  // namespace bcap
