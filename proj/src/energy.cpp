#include <algorithm>
#include <cmath>

#include "bcap/capacity.hpp"
#include "bcap/error.hpp"

namespace bcap {

SimplexQpResult minimize_simplex_qp(const std::vector<double>& K, std::size_t n, double tol,
                                    int max_iters, const std::vector<double>* start) {
  if (n == 0) throw ConfigError("energy minimization over an empty set");
  if (K.size() != n * n) throw ConfigError("kernel matrix has wrong size");
  SimplexQpResult r;
  r.x.assign(n, 1.0 / static_cast<double>(n));
  if (start) {
    if (start->size() != n) throw ConfigError("start point has wrong size");
    r.x = *start;
  }
  std::vector<double> Kx(n);
  auto recompute = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      const double* row = K.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) s += row[j] * r.x[j];
      Kx[i] = s;
    }
    double f = 0;
    for (std::size_t i = 0; i < n; ++i) f += r.x[i] * Kx[i];
    return f;
  };
  double f = recompute();
  if (n == 1) {
    r.value = f;
    r.converged = true;
    return r;
  }
  for (int it = 0;; ++it) {
    std::size_t s = 0, v = n;
    for (std::size_t i = 1; i < n; ++i)
      if (Kx[i] < Kx[s]) s = i;
    for (std::size_t i = 0; i < n; ++i)
      if (r.x[i] > 0 && (v == n || Kx[i] > Kx[v])) v = i;
    // Gradient is 2 Kx; gaps below are in units of the gradient.
    const double fw_gap = 2.0 * (f - Kx[s]);
    const double away_gap = 2.0 * (Kx[v] - f);
    r.gap = std::max(fw_gap, 0.0);
    if (r.gap <= tol * f) {
      r.converged = true;
      break;
    }
    if (it >= max_iters) break;
    double slope, curv, gmax;
    const bool fw = fw_gap >= away_gap;
    if (fw) {
      slope = Kx[s] - f;
      curv = K[s * n + s] - 2.0 * Kx[s] + f;
      gmax = 1.0;
    } else {
      slope = f - Kx[v];
      curv = f - 2.0 * Kx[v] + K[v * n + v];
      gmax = r.x[v] < 1.0 ? r.x[v] / (1.0 - r.x[v]) : 1e300;
    }
    double gamma = curv > 0 ? -slope / curv : gmax;
    gamma = std::clamp(gamma, 0.0, gmax);
    if (gamma <= 0) {
      r.converged = r.gap <= tol * f;
      break;
    }
    if (fw) {
      for (std::size_t i = 0; i < n; ++i) {
        r.x[i] *= 1.0 - gamma;
        Kx[i] = (1.0 - gamma) * Kx[i] + gamma * K[i * n + s];
      }
      r.x[s] += gamma;
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        r.x[i] *= 1.0 + gamma;
        Kx[i] = (1.0 + gamma) * Kx[i] - gamma * K[i * n + v];
      }
      r.x[v] -= gamma * 1.0;
      if (gamma == gmax || r.x[v] < 1e-300) r.x[v] = 0.0;
    }
    // Keep the iterate exactly on the simplex.
    double sum = 0;
    for (double& xi : r.x) {
      xi = std::max(xi, 0.0);
      sum += xi;
    }
    for (double& xi : r.x) xi /= sum;
    for (double& k : Kx) k /= sum;
    f = (it + 1) % 64 == 0 ? recompute() : (f + 2 * gamma * slope + gamma * gamma * curv) / (sum * sum);
    r.trace.push_back(f);
    r.iterations = it + 1;
  }
  r.value = recompute();
  return r;
}

bool is_symmetric_set(const SiteSet& A) {
  if (A.empty()) return true;
  const int d = A.dim();
  SiteCounts orbits(d);
  std::array<std::int64_t, kMaxDim> c{};
  for (std::size_t i = 0; i < A.size(); ++i) {
    std::copy(A.coords(i), A.coords(i) + d, c.begin());
    canonicalize(c.data(), d);
    orbits.add(c.data());
  }
  for (std::size_t o = 0; o < orbits.size(); ++o) {
    const LatticePoint rep = orbits.point(o);
    if (static_cast<double>(orbits.count_at(o)) != orbit_size(rep.data(), d)) return false;
  }
  return true;
}

namespace {

EnergyResult from_qp(const SiteSet& A, std::vector<double> nu, const SimplexQpResult& qp) {
  EnergyResult e;
  e.points = A.points();
  e.nu = std::move(nu);
  e.energy = qp.value;
  e.fw_gap = qp.gap;
  e.iterations = qp.iterations;
  e.converged = qp.converged;
  e.energy_trace = qp.trace;
  return e;
}

}  // namespace

EnergyResult energy_minimize(const SiteSet& A, const GreenTable& table, double tol, int max_iters) {
  if (A.empty()) throw ConfigError("energy minimization over an empty set");
  if (A.dim() != table.dim()) throw ConfigError("energy: table dimension mismatch");
  if (!(tol > 0)) throw ConfigError("energy: tolerance must be > 0");
  const int d = A.dim();
  const std::size_t n = A.size();
  if (n == 1) {
    SimplexQpResult qp;
    qp.x = {1.0};
    qp.value = table.G0();
    qp.converged = true;
    return from_qp(A, {1.0}, qp);
  }
  if (is_symmetric_set(A) && n > 64) {
    // Orbit masses m_o; Kbar(o, o') = |o'|^{-1} sum_{y in o'} G(x_o - y).
    SiteIndex orbits(d);
    std::vector<std::size_t> orbit_of(n);
    std::vector<std::size_t> rep;
    std::array<std::int64_t, kMaxDim> c{};
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(A.coords(i), A.coords(i) + d, c.begin());
      canonicalize(c.data(), d);
      const auto [id, inserted] = orbits.insert(c.data());
      if (inserted) rep.push_back(i);
      orbit_of[i] = id;
    }
    const std::size_t m = orbits.size();
    std::vector<double> size(m);
    for (std::size_t o = 0; o < m; ++o) size[o] = orbit_size(orbits.coords(o), d);
    std::vector<double> K(m * m, 0.0);
    for (std::size_t o = 0; o < m; ++o) {
      const std::int64_t* x = A.coords(rep[o]);
      for (std::size_t j = 0; j < n; ++j) K[o * m + orbit_of[j]] += table.G_diff(x, A.coords(j));
      for (std::size_t p = 0; p < m; ++p) K[o * m + p] /= size[p];
    }
    for (std::size_t o = 0; o < m; ++o)
      for (std::size_t p = o + 1; p < m; ++p) {
        const double s = 0.5 * (K[o * m + p] + K[p * m + o]);
        K[o * m + p] = K[p * m + o] = s;
      }
    const SimplexQpResult qp = minimize_simplex_qp(K, m, tol, max_iters);
    std::vector<double> nu(n);
    for (std::size_t i = 0; i < n; ++i) nu[i] = qp.x[orbit_of[i]] / size[orbit_of[i]];
    return from_qp(A, std::move(nu), qp);
  }
  if (n > 6000) throw ConfigError("energy: dense kernel too large for a non-symmetric set");
  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) K[i * n + j] = K[j * n + i] = table.G_diff(A.coords(i), A.coords(j));
  const SimplexQpResult qp = minimize_simplex_qp(K, n, tol, max_iters);
  return from_qp(A, qp.x, qp);
}

double capacity_proxy(const EnergyResult& result) {
  if (!(result.energy > 0)) throw DomainError("capacity proxy needs positive energy");
  return 1.0 / result.energy;
}

}  // namespace bcap
