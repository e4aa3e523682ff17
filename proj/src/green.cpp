#include "bcap/green.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bcap/error.hpp"

namespace bcap {

AsymptoticConstants AsymptoticConstants::for_dim(int d) {
  if (d < 5) throw ConfigError("asymptotic constants need d >= 5");
  const double half = 0.5 * d;
  const double gam = std::tgamma(half - 1.0);
  const double pi_term = std::pow(M_PI, -half);
  AsymptoticConstants c;
  c.a_d = half * gam * pi_term;
  c.green_c_d = static_cast<double>(d) * d / (2.0 * (d - 4)) * pi_term * gam;
  return c;
}

namespace {

const AsymptoticConstants& cached_constants(int d) {
  static const auto table = [] {
    std::array<AsymptoticConstants, kMaxDim + 1> t{};
    for (int k = 5; k <= kMaxDim; ++k) t[k] = AsymptoticConstants::for_dim(k);
    return t;
  }();
  if (d < 5 || d > kMaxDim) throw ConfigError("asymptotic constants need 5 <= d <= " + std::to_string(kMaxDim));
  return table[d];
}

/// norm2^(-k/2) for integer k >= 0.
double inv_pow_half(double norm2, int k) {
  const double inv = 1.0 / norm2;
  double r = 1.0;
  for (int i = 0; i < k / 2; ++i) r *= inv;
  return k % 2 ? r / std::sqrt(norm2) : r;
}

}  // namespace

double asymptotic_g_norm2(int d, double norm2) {
  if (!(norm2 > 0)) throw DomainError("asymptotic_g undefined at z = 0");
  return cached_constants(d).a_d * inv_pow_half(norm2, d - 2);
}

double asymptotic_G_norm2(int d, double norm2) {
  if (!(norm2 > 0)) throw DomainError("asymptotic_G undefined at z = 0");
  return cached_constants(d).green_c_d * inv_pow_half(norm2, d - 4);
}

double asymptotic_g(int d, const LatticePoint& z) {
  return asymptotic_g_norm2(d, static_cast<double>(z.norm2()));
}

double asymptotic_G(int d, const LatticePoint& z) {
  return asymptotic_G_norm2(d, static_cast<double>(z.norm2()));
}

void canonicalize(std::int64_t* z, int d) {
  for (int k = 0; k < d; ++k) z[k] = z[k] < 0 ? -z[k] : z[k];
  // Insertion sort, descending; d <= 16.
  for (int i = 1; i < d; ++i) {
    const std::int64_t v = z[i];
    int j = i - 1;
    while (j >= 0 && z[j] < v) {
      z[j + 1] = z[j];
      --j;
    }
    z[j + 1] = v;
  }
}

double orbit_size(const std::int64_t* c, int d) {
  double size = 1;
  for (int k = 2; k <= d; ++k) size *= k;
  int run = 1;
  for (int k = 1; k <= d; ++k) {
    if (k < d && c[k] == c[k - 1]) {
      ++run;
      continue;
    }
    for (int m = 2; m <= run; ++m) size /= m;
    run = 1;
  }
  for (int k = 0; k < d; ++k)
    if (c[k] != 0) size *= 2;
  return size;
}

namespace {

struct OrbitGraph {
  int d = 0;
  std::int64_t L2 = 0;
  SiteIndex index;
  std::vector<double> weight;
  std::vector<std::int32_t> nbr;   // 2d per orbit, -1 outside
  std::vector<double> out_g;       // (1/2d) sum of boundary g data
  std::vector<double> out_G;       // (1/2d) sum of boundary G data
  std::vector<double> norm2;
};

void enumerate(int d, std::int64_t L2, SiteIndex& idx) {
  std::array<std::int64_t, kMaxDim> c{};
  const auto L = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(L2))));
  // c[0] >= c[1] >= ... >= c[d-1] >= 0.
  auto rec = [&](auto&& self, int k, std::int64_t bound, std::int64_t partial) -> void {
    if (k == d) {
      idx.insert(c.data());
      return;
    }
    for (std::int64_t v = 0; v <= bound; ++v) {
      const std::int64_t s = partial + v * v;
      if (s > L2) break;
      c[k] = v;
      self(self, k + 1, v, s);
    }
  };
  // Origin first.
  idx.insert(c.data());
  rec(rec, 0, L, 0);
}

OrbitGraph build_graph(int d, std::int64_t L2) {
  OrbitGraph gr;
  gr.d = d;
  gr.L2 = L2;
  gr.index = SiteIndex(d);
  enumerate(d, L2, gr.index);
  const std::size_t n = gr.index.size();
  gr.weight.resize(n);
  gr.norm2.resize(n);
  gr.nbr.assign(n * 2 * d, -1);
  gr.out_g.assign(n, 0.0);
  gr.out_G.assign(n, 0.0);
  const double inv2d = 1.0 / (2.0 * d);
  std::array<std::int64_t, kMaxDim> y{};
  for (std::size_t o = 0; o < n; ++o) {
    const std::int64_t* x = gr.index.coords(o);
    gr.weight[o] = orbit_size(x, d);
    std::int64_t nx = 0;
    for (int k = 0; k < d; ++k) nx += x[k] * x[k];
    gr.norm2[o] = static_cast<double>(nx);
    for (int code = 0; code < 2 * d; ++code) {
      std::copy(x, x + d, y.begin());
      apply_step(y.data(), static_cast<unsigned>(code));
      std::int64_t ny = 0;
      for (int k = 0; k < d; ++k) ny += y[k] * y[k];
      if (ny <= L2) {
        canonicalize(y.data(), d);
        const std::size_t id = gr.index.find(y.data());
        gr.nbr[o * 2 * d + code] = static_cast<std::int32_t>(id);
      } else {
        gr.out_g[o] += inv2d * asymptotic_g_norm2(d, static_cast<double>(ny));
        gr.out_G[o] += inv2d * asymptotic_G_norm2(d, static_cast<double>(ny));
      }
    }
  }
  return gr;
}

// y = (I - P_in) x.
void apply_op(const OrbitGraph& gr, const std::vector<double>& x, std::vector<double>& y) {
  const int deg = 2 * gr.d;
  const double inv = 1.0 / deg;
  const std::size_t n = x.size();
  for (std::size_t o = 0; o < n; ++o) {
    double s = 0;
    const std::int32_t* nb = gr.nbr.data() + o * deg;
    for (int k = 0; k < deg; ++k)
      if (nb[k] >= 0) s += x[static_cast<std::size_t>(nb[k])];
    y[o] = x[o] - inv * s;
  }
}

double wdot(const std::vector<double>& w, const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(w[i] * a[i] * b[i]);
  return static_cast<double>(s);
}

struct SolveResult {
  int iterations = 0;
  double resid_inf = 0;
};

// Conjugate gradients in the orbit-weighted inner product, where I - P is
// self-adjoint. Stops once scale * ||r||_inf <= target(x).
template <class Target>
SolveResult cg_solve(const OrbitGraph& gr, const std::vector<double>& b, std::vector<double>& x,
                     int max_iters, double scale, Target target, const char* what) {
  const std::size_t n = b.size();
  std::vector<double> r(n), p(n), ap(n);
  apply_op(gr, x, ap);
  double rinf = 0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = b[i] - ap[i];
    rinf = std::max(rinf, std::abs(r[i]));
  }
  const double r0 = std::max(rinf, 1e-300);
  p = r;
  double rr = wdot(gr.weight, r, r);
  int it = 0;
  while (scale * rinf > target(x)) {
    if (it >= max_iters) {
      const double rate = std::log(rinf / r0) / std::max(it, 1);
      const double need = rate < 0 ? std::log(target(x) / (scale * r0)) / rate : -1;
      std::ostringstream os;
      os << "green table: " << what << " solve did not reach tolerance in N=" << max_iters
         << " iterations (residual bound " << scale * rinf << " vs target " << target(x) << ")";
      if (need > 0) os << "; estimated required N ~ " << static_cast<long long>(std::ceil(need * 1.1));
      throw ConfigError(os.str());
    }
    apply_op(gr, p, ap);
    const double alpha = rr / wdot(gr.weight, p, ap);
    rinf = 0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rinf = std::max(rinf, std::abs(r[i]));
    }
    const double rr_new = wdot(gr.weight, r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    ++it;
    if (it % 50 == 0) {
      // Refresh the recursive residual against drift.
      apply_op(gr, x, ap);
      rinf = 0;
      for (std::size_t i = 0; i < n; ++i) {
        r[i] = b[i] - ap[i];
        rinf = std::max(rinf, std::abs(r[i]));
      }
    }
  }
  return {it, rinf};
}

// max over orbits with |x| in [lo, hi] of |v / asym - 1| * |x|^2.
double correction_constant(const OrbitGraph& gr, const std::vector<double>& v, bool big, double lo,
                           double hi) {
  double k = 0;
  for (std::size_t o = 1; o < v.size(); ++o) {
    const double r2 = gr.norm2[o];
    if (r2 < lo * lo || r2 > hi * hi) continue;
    const double a = big ? asymptotic_G_norm2(gr.d, r2) : asymptotic_g_norm2(gr.d, r2);
    k = std::max(k, std::abs(v[o] / a - 1.0) * r2);
  }
  return k;
}

std::string fixed17(double v) {
  if (v == 0) return "0";
  const int e = static_cast<int>(std::floor(std::log10(std::abs(v))));
  const int decimals = std::max(0, 16 - e);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

GreenTable GreenTable::build(const GreenBuildOptions& opt) {
  if (opt.d < 5 || opt.d > kMaxDim) throw ConfigError("green table needs 5 <= d <= 16");
  if (opt.radius < 1) throw ConfigError("green table radius must be >= 1");
  if (opt.max_iters < 1) throw ConfigError("green table iteration budget N must be >= 1");
  if (!(opt.rel_tol > 0)) throw ConfigError("green table tolerance must be > 0");
  const int L = opt.solve_radius > 0 ? opt.solve_radius : std::max(2 * opt.radius, opt.radius + 24);
  if (L < opt.radius) throw ConfigError("solve radius must be >= table radius");
  const int d = opt.d;
  const OrbitGraph gr = build_graph(d, static_cast<std::int64_t>(L) * L);
  const std::size_t n = gr.index.size();
  const double scale = (L + 1.0) * (L + 1.0);

  // g: (I - P) g = delta_0.
  std::vector<double> bg(n), g(n), bG(n), G(n);
  for (std::size_t o = 0; o < n; ++o) {
    bg[o] = gr.out_g[o] + (o == 0 ? 1.0 : 0.0);
    g[o] = o == 0 ? 1.0 : asymptotic_g_norm2(d, gr.norm2[o]);
  }
  const SolveResult sg = cg_solve(
      gr, bg, g, opt.max_iters, scale, [&](const std::vector<double>& x) { return 0.5 * opt.rel_tol * x[0]; },
      "g");
  // G: (I - P) G = g.
  for (std::size_t o = 0; o < n; ++o) {
    bG[o] = gr.out_G[o] + g[o];
    G[o] = o == 0 ? 2.0 : asymptotic_G_norm2(d, gr.norm2[o]);
  }
  const SolveResult sG = cg_solve(
      gr, bG, G, opt.max_iters, scale, [&](const std::vector<double>& x) { return 0.5 * opt.rel_tol * x[0]; },
      "G");

  // Dirichlet data error: asymptotic forms are exact up to O(|w|^{-2}) relative;
  // the constant is read off the solution at half the solve radius.
  const double kg = correction_constant(gr, g, false, 0.5 * L - 2, 0.5 * L);
  const double kG = correction_constant(gr, G, true, 0.5 * L - 2, 0.5 * L);
  const double Lsq = static_cast<double>(L) * L;
  const double err_g = scale * sg.resid_inf + kg * asymptotic_g_norm2(d, Lsq) / Lsq;
  const double err_G = scale * sG.resid_inf + kG * asymptotic_G_norm2(d, Lsq) / Lsq + scale * err_g;

  GreenTable t;
  t.d_ = d;
  t.radius_ = opt.radius;
  t.solve_radius_ = L;
  t.n_steps_ = opt.max_iters;
  t.tail_bound_ = std::max(err_g, err_G);
  t.radius2_ = static_cast<std::int64_t>(opt.radius) * opt.radius;
  t.index_ = SiteIndex(d);
  for (std::size_t o = 0; o < n; ++o) {
    if (gr.norm2[o] > static_cast<double>(t.radius2_)) continue;
    t.index_.insert(gr.index.coords(o));
    t.g_vals_.push_back(g[o]);
    t.G_vals_.push_back(G[o]);
  }
  return t;
}

void GreenTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write green table: " + path.string());
  out << "GREENTABLE v1 " << d_ << ' ' << radius_ << ' ' << n_steps_ << ' ' << fixed17(tail_bound_)
      << '\n';
  std::string line;
  for (std::size_t i = 0; i < index_.size(); ++i) {
    line.clear();
    const std::int64_t* c = index_.coords(i);
    for (int k = 0; k < d_; ++k) {
      line += std::to_string(c[k]);
      line += ' ';
    }
    line += fixed17(g_vals_[i]);
    line += ' ';
    line += fixed17(G_vals_[i]);
    line += '\n';
    out << line;
  }
  if (!out) throw ConfigError("error writing green table: " + path.string());
}

namespace {
double parse_double(const std::string& s, const std::string& ctx) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ConfigError("malformed number '" + s + "' in " + ctx);
  return v;
}
}  // namespace

GreenTable GreenTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open green table: " + path.string());
  std::string magic, version, tail;
  GreenTable t;
  if (!(in >> magic >> version >> t.d_ >> t.radius_ >> t.n_steps_ >> tail) || magic != "GREENTABLE" ||
      version != "v1")
    throw ConfigError("bad green table header: " + path.string());
  if (t.d_ < 5 || t.d_ > kMaxDim || t.radius_ < 1) throw ConfigError("bad green table dimensions");
  t.tail_bound_ = parse_double(tail, path.string());
  t.radius2_ = static_cast<std::int64_t>(t.radius_) * t.radius_;
  t.solve_radius_ = 0;
  t.index_ = SiteIndex(t.d_);
  std::array<std::int64_t, kMaxDim> c{};
  std::string gs, Gs;
  while (true) {
    if (!(in >> c[0])) break;
    for (int k = 1; k < t.d_; ++k)
      if (!(in >> c[k])) throw ConfigError("truncated green table record");
    if (!(in >> gs >> Gs)) throw ConfigError("truncated green table record");
    std::array<std::int64_t, kMaxDim> cc = c;
    canonicalize(cc.data(), t.d_);
    if (!std::equal(cc.begin(), cc.begin() + t.d_, c.begin()))
      throw ConfigError("green table record is not a canonical representative");
    if (!t.index_.insert(c.data()).second) throw ConfigError("duplicate green table record");
    t.g_vals_.push_back(parse_double(gs, path.string()));
    t.G_vals_.push_back(parse_double(Gs, path.string()));
  }
  if (!in.eof()) throw ConfigError("malformed green table body: " + path.string());
  if (t.index_.empty()) throw ConfigError("empty green table");
  return t;
}

GreenTable GreenTable::cached(const std::filesystem::path& dir, const GreenBuildOptions& opt) {
  std::ostringstream name;
  name << "green_d" << opt.d << "_R" << opt.radius << "_L" << opt.solve_radius << "_N" << opt.max_iters
       << "_tol" << opt.rel_tol << ".tbl";
  const auto path = dir / name.str();
  if (std::filesystem::exists(path)) {
    try {
      return load(path);
    } catch (const ConfigError&) {
      // Corrupt cache entry: rebuild below.
    }
  }
  GreenTable t = build(opt);
  std::filesystem::create_directories(dir);
  const auto tmp = path.string() + ".tmp";
  t.save(tmp);
  std::filesystem::rename(tmp, path);
  return t;
}

std::size_t GreenTable::lookup(const std::int64_t* z) const {
  std::array<std::int64_t, kMaxDim> c{};
  std::int64_t n2 = 0;
  for (int k = 0; k < d_; ++k) {
    c[k] = z[k];
    n2 += z[k] * z[k];
  }
  if (n2 > radius2_) return SiteIndex::npos;
  canonicalize(c.data(), d_);
  return index_.find(c.data());
}

bool GreenTable::in_table(const std::int64_t* z) const { return lookup(z) != SiteIndex::npos; }

double GreenTable::g(const std::int64_t* z) const {
  const std::size_t i = lookup(z);
  if (i != SiteIndex::npos) return g_vals_[i];
  std::int64_t n2 = 0;
  for (int k = 0; k < d_; ++k) n2 += z[k] * z[k];
  return asymptotic_g_norm2(d_, static_cast<double>(n2));
}

double GreenTable::G(const std::int64_t* z) const {
  const std::size_t i = lookup(z);
  if (i != SiteIndex::npos) return G_vals_[i];
  std::int64_t n2 = 0;
  for (int k = 0; k < d_; ++k) n2 += z[k] * z[k];
  return asymptotic_G_norm2(d_, static_cast<double>(n2));
}

double GreenTable::g_diff(const std::int64_t* a, const std::int64_t* b) const {
  std::array<std::int64_t, kMaxDim> z{};
  for (int k = 0; k < d_; ++k) z[k] = a[k] - b[k];
  return g(z.data());
}

double GreenTable::G_diff(const std::int64_t* a, const std::int64_t* b) const {
  std::array<std::int64_t, kMaxDim> z{};
  for (int k = 0; k < d_; ++k) z[k] = a[k] - b[k];
  return G(z.data());
}

bool GreenTable::operator==(const GreenTable& o) const {
  if (d_ != o.d_ || radius_ != o.radius_ || n_steps_ != o.n_steps_ || tail_bound_ != o.tail_bound_ ||
      index_.size() != o.index_.size())
    return false;
  for (std::size_t i = 0; i < index_.size(); ++i) {
    const std::size_t j = o.index_.find(index_.coords(i));
    if (j == SiteIndex::npos || g_vals_[i] != o.g_vals_[j] || G_vals_[i] != o.G_vals_[j]) return false;
  }
  return true;
}

double gradient_ratio_check(const GreenTable& table, const LatticePoint& z, const LatticePoint& h) {
  if (z.dim() != table.dim() || h.dim() != table.dim()) throw DomainError("dimension mismatch");
  if (4 * h.norm2() > z.norm2()) throw DomainError("gradient check needs |h| <= |z|/2");
  const LatticePoint zh = z + h;
  if (!table.in_table(z) || !table.in_table(zh)) throw DomainError("gradient check outside table");
  if (h.norm2() == 0) return 0.0;
  return std::abs(table.G(zh) / table.G(z) - 1.0) * z.norm() / h.norm();
}

}  // namespace bcap
