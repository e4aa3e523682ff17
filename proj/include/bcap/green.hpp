#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bcap/lattice.hpp"

namespace bcap {

/// a_d = (d/2) Gamma(d/2 - 1) pi^{-d/2};  c_d = d^2 / (2(d-4)) pi^{-d/2} Gamma(d/2 - 1).
struct AsymptoticConstants {
  double a_d = 0;
  double green_c_d = 0;
  static AsymptoticConstants for_dim(int d);
};

/// a_d / |z|^{d-2}; z != 0.
double asymptotic_g(int d, const LatticePoint& z);
/// c_d / |z|^{d-4}; z != 0, d >= 5.
double asymptotic_G(int d, const LatticePoint& z);
double asymptotic_g_norm2(int d, double norm2);
double asymptotic_G_norm2(int d, double norm2);

struct GreenBuildOptions {
  int d = 6;
  int radius = 12;        // stored radius R
  int solve_radius = 0;   // Dirichlet domain radius; 0 -> max(2R, R + 24)
  int max_iters = 20000;  // N: iteration budget per solve
  double rel_tol = 1e-10; // target bound on |error| / g(0)
};

/// g(z) = sum_n p_n(z) and G(z) = sum_n (n+1) p_n(z) on B(0, R), stored once
/// per orbit of the coordinate permutation / sign-flip group. Values outside
/// B(0, R) fall back to the asymptotic forms.
class GreenTable {
 public:
  GreenTable() = default;

  /// Solves (I - P) g = delta_0 and (I - P) G = g by conjugate gradients on
  /// B(0, L) with asymptotic Dirichlet data outside. Throws ConfigError with a
  /// required-iteration estimate when the budget cannot meet rel_tol.
  static GreenTable build(const GreenBuildOptions& opt);

  static GreenTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Loads `dir/green_d{d}_R{R}_N{N}_tol{tol}.tbl`, building and saving it on a miss.
  static GreenTable cached(const std::filesystem::path& dir, const GreenBuildOptions& opt);

  int dim() const { return d_; }
  int radius() const { return radius_; }
  int solve_radius() const { return solve_radius_; }
  int n_steps() const { return n_steps_; }
  double tail_bound() const { return tail_bound_; }
  std::size_t orbit_count() const { return index_.size(); }

  bool in_table(const std::int64_t* z) const;
  bool in_table(const LatticePoint& z) const { return in_table(z.data()); }

  double g(const std::int64_t* z) const;
  double G(const std::int64_t* z) const;
  double g(const LatticePoint& z) const { return g(z.data()); }
  double G(const LatticePoint& z) const { return G(z.data()); }
  /// g(a - b), G(a - b).
  double g_diff(const std::int64_t* a, const std::int64_t* b) const;
  double G_diff(const std::int64_t* a, const std::int64_t* b) const;

  double g0() const { return g_vals_.empty() ? 0.0 : g_vals_[0]; }
  double G0() const { return G_vals_.empty() ? 0.0 : G_vals_[0]; }

  /// Canonical representative (coordinates sorted by absolute value,
  /// descending, all >= 0) of orbit i.
  LatticePoint representative(std::size_t i) const { return index_.point(i); }
  double g_at(std::size_t i) const { return g_vals_[i]; }
  double G_at(std::size_t i) const { return G_vals_[i]; }

  bool operator==(const GreenTable& o) const;

 private:
  std::size_t lookup(const std::int64_t* z) const;

  int d_ = 0;
  int radius_ = 0;
  int solve_radius_ = 0;
  int n_steps_ = 0;
  double tail_bound_ = 0;
  std::int64_t radius2_ = 0;
  SiteIndex index_;
  std::vector<double> g_vals_, G_vals_;
};

/// Sorts |z_i| into descending order in place.
void canonicalize(std::int64_t* z, int d);
/// Number of lattice points in the orbit of a canonical point.
double orbit_size(const std::int64_t* canonical, int d);

/// |G(z+h)/G(z) - 1| * |z| / |h|; requires |h| <= |z|/2 with z, z+h in the table.
double gradient_ratio_check(const GreenTable& table, const LatticePoint& z, const LatticePoint& h);

}  // namespace bcap
