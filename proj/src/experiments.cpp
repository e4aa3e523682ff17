#include "bcap/experiments.hpp"

#include <cmath>
#include <sstream>

#include "bcap/error.hpp"

namespace bcap {

namespace {

struct WindowAvoid {
  const SiteSet* range;
  BallKeep ball;
  const TubeFilter* tube;
  bool hit = false;
  bool vertex(const std::int64_t* p) {
    hit = range->contains(p);
    return hit;
  }
  bool keep(const std::int64_t* p, std::int64_t d2) const {
    return ball(d2) && (!tube->enabled() || tube->keep(p, d2));
  }
  void cut(const std::int64_t*) {}
};

double one_sample(int d, std::int64_t n, const OffspringLaw& law, const RangeOptions& opt,
                  const RandomStream& st) {
  RandomStream pick = st.split(0);
  const auto k = static_cast<std::int64_t>(pick.below(static_cast<std::uint64_t>(n) + 1));
  RandomStream walk_stream = st.split(1);
  const TwoSidedWalk walk = sample_two_sided_fixed(d, k, n - k, walk_stream);
  const std::int64_t* origin = walk.position_data(0);
  for (std::int64_t j = 1; j <= walk.right_len(); ++j) {
    const std::int64_t* p = walk.position_data(j);
    bool same = true;
    for (int a = 0; a < d && same; ++a) same = p[a] == origin[a];
    if (same) return 0.0;
  }
  const SiteSet range = range_window(walk, -k, n - k);
  TruncationPolicy pol;
  pol.spine_exit_radius = std::max(opt.radius_factor * std::max(walk.max_displacement(), 1.0), opt.min_radius);
  pol.subtree_node_cap = opt.node_cap;
  const TreeStreams streams(st.split(2));
  RandomStream spine_stream = streams.spine;
  const LatticePoint o = LatticePoint::origin(d);
  const SpineSample sp = sample_spine(law, o, pol.spine_exit_radius, pol.spine_step_cap, spine_stream);
  const TubeFilter tube = opt.tube_alpha > 0 ? TubeFilter(d, range.coords(0), range.size(), opt.tube_alpha,
                                                          pol.spine_exit_radius)
                                             : TubeFilter();
  WindowAvoid v{&range, BallKeep{pol.kill_radius2()}, &tube};
  thread_local GwScratch sc;
  grow_past(law, sp, pol, streams.past, v, sc);
  return v.hit ? 0.0 : static_cast<double>(n + 1);
}

}  // namespace

std::vector<double> mean_bcap_range_samples(int d, std::int64_t n, const OffspringLaw& law,
                                            const RangeOptions& opt, std::int64_t first,
                                            std::int64_t count, const RandomStream& rng) {
  check_dimension(d);
  if (n < 0) throw ConfigError("n must be >= 0");
  if (!(opt.radius_factor > 0)) throw ConfigError("radius factor must be > 0");
  return parallel_map<double>(count, opt.workers, [&](std::int64_t i) {
    return one_sample(d, n, law, opt, rng.split(static_cast<std::uint64_t>(first + i)));
  });
}

McEstimate estimate_mean_bcap_range(int d, std::int64_t n, const OffspringLaw& law,
                                    const RangeOptions& opt, std::int64_t samples,
                                    const RandomStream& rng) {
  if (samples < 1) throw ConfigError("samples must be >= 1");
  const std::vector<double> vals = mean_bcap_range_samples(d, n, law, opt, 0, samples, rng);
  McEstimate e = summarize(vals);
  e.bias_bound = e.mean * std::pow(opt.radius_factor, -(d - 4));
  std::ostringstream os;
  os << "n=" << n << " radius_factor=" << opt.radius_factor << " min_radius=" << opt.min_radius
     << " tube_alpha=" << opt.tube_alpha;
  e.meta = os.str();
  return e;
}

McEstimate direct_bcap_range(int d, std::int64_t n, const OffspringLaw& law, const CapacityOptions& opt,
                             std::int64_t per_point_samples, const RandomStream& rng) {
  check_dimension(d);
  if (n < 0) throw ConfigError("n must be >= 0");
  if (n > kDirectBcapMaxN) throw ConfigError("direct_bcap_range: n exceeds the cost guard (4096)");
  RandomStream walk_stream = rng.split(0);
  const WalkPath walk = sample_walk(d, n, walk_stream);
  const SiteSet A = range_window(walk, 0, n);
  const TruncationPolicy pol = capacity_policy(A, opt);
  EquilibriumProfile prof = estimate_bcap(A, law, pol, per_point_samples, rng.split(1), opt.workers);
  std::ostringstream os;
  os << "n=" << n << " |R|=" << A.size() << " r=" << pol.spine_exit_radius;
  prof.bcap.meta = os.str();
  return prof.bcap;
}

ScalingModel parse_scaling_model(const std::string& s) {
  if (s == "linear") return ScalingModel::linear;
  if (s == "n/log n" || s == "n_over_log") return ScalingModel::n_over_log;
  if (s == "sqrt") return ScalingModel::sqrt;
  throw ConfigError("unknown scaling model: " + s);
}

const char* to_string(ScalingModel m) {
  switch (m) {
    case ScalingModel::linear: return "linear";
    case ScalingModel::n_over_log: return "n/log n";
    case ScalingModel::sqrt: return "sqrt";
  }
  return "?";
}

namespace {

double shape(ScalingModel m, double n) {
  switch (m) {
    case ScalingModel::linear: return n;
    case ScalingModel::n_over_log: return n / std::log(n);
    case ScalingModel::sqrt: return std::sqrt(n);
  }
  return 0;
}

/// Least squares value = c f(n) through the origin; returns {c, rss}.
std::pair<double, double> origin_fit(const std::vector<double>& f, const std::vector<double>& v,
                                     const std::vector<std::size_t>& idx) {
  double ff = 0, fv = 0;
  for (std::size_t i : idx) {
    ff += f[i] * f[i];
    fv += f[i] * v[i];
  }
  if (!(ff > 0)) throw ConfigError("fit_scaling: degenerate design");
  const double c = fv / ff;
  double rss = 0;
  for (std::size_t i : idx) rss += (v[i] - c * f[i]) * (v[i] - c * f[i]);
  return {c, rss};
}

}  // namespace

ScalingFit fit_scaling(const std::vector<ScalingRow>& rows, ScalingModel model, int bootstrap,
                       std::uint64_t bootstrap_seed) {
  if (rows.size() < 3) throw ConfigError("fit_scaling needs at least 3 rows");
  std::vector<double> f, v, lx, ly;
  bool positive = true;
  for (const ScalingRow& r : rows) {
    if (r.n < 2 && model == ScalingModel::n_over_log) throw ConfigError("fit_scaling: n/log n needs n >= 2");
    const auto n = static_cast<double>(r.n);
    f.push_back(shape(model, n));
    v.push_back(r.value);
    positive = positive && r.value > 0 && r.n > 0;
    if (positive) {
      lx.push_back(std::log(n));
      ly.push_back(std::log(r.value));
    }
  }
  std::vector<std::size_t> all(rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  ScalingFit out;
  out.model = model;
  std::tie(out.constant, out.residual) = origin_fit(f, v, all);
  out.exponent = positive ? fit_line(lx, ly).slope : std::nan("");
  if (bootstrap > 1) {
    RandomStream rng(bootstrap_seed);
    std::vector<double> cs;
    std::vector<std::size_t> idx(rows.size());
    for (int b = 0; b < bootstrap; ++b) {
      for (auto& i : idx) i = static_cast<std::size_t>(rng.below(rows.size()));
      double ff = 0;
      for (std::size_t i : idx) ff += f[i] * f[i];
      if (ff > 0) cs.push_back(origin_fit(f, v, idx).first);
    }
    if (cs.size() > 1) out.constant_stderr = std::sqrt(summarize(cs).variance);
  }
  return out;
}

SweepResult scaling_sweep(int d, const std::vector<std::int64_t>& n_list, const OffspringLaw& law,
                          const RangeOptions& opt, const SweepBudget& budget, const RandomStream& rng,
                          std::uint64_t seed) {
  check_dimension(d);
  if (d < 5 || d > 8) throw ConfigError("scaling_sweep: d must be in {5, 6, 7, 8}");
  if (n_list.empty()) throw ConfigError("scaling_sweep: empty n list");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw ConfigError("scaling_sweep: n list must be increasing");
  if (budget.pilot < 2) throw ConfigError("scaling_sweep: pilot must be >= 2");
  SweepResult out;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    const std::int64_t n = n_list[k];
    const RandomStream row = rng.split(k);
    std::vector<double> vals = mean_bcap_range_samples(d, n, law, opt, 0, budget.pilot, row);
    const McEstimate pilot = summarize(vals);
    std::int64_t target = budget.pilot;
    if (pilot.mean > 0) {
      const double need = pilot.variance / std::pow(budget.rel_stderr * pilot.mean, 2);
      target = std::clamp(static_cast<std::int64_t>(std::ceil(need)), budget.pilot, budget.max_samples);
    } else {
      target = budget.max_samples;
    }
    if (target > budget.pilot) {
      const std::vector<double> more =
          mean_bcap_range_samples(d, n, law, opt, budget.pilot, target - budget.pilot, row);
      vals.insert(vals.end(), more.begin(), more.end());
    }
    const McEstimate e = summarize(vals);
    ScalingRow r;
    r.d = d;
    r.n = n;
    r.estimator = "mean_bcap_range";
    r.value = e.mean;
    r.stderr = e.stderr;
    r.bias = e.mean * std::pow(opt.radius_factor, -(d - 4));
    r.samples = e.samples;
    r.seed = seed;
    out.rows.push_back(r);
    const auto nn = static_cast<double>(n);
    const double scale = d == 5 ? 1.0 / std::sqrt(nn) : d == 6 ? std::log(nn) / nn : 1.0 / nn;
    out.normalized.push_back(r.value * scale);
    out.normalized_stderr.push_back(r.stderr * scale);
  }
  if (out.rows.size() >= 3) {
    const ScalingModel m = d == 5 ? ScalingModel::sqrt : d == 6 ? ScalingModel::n_over_log : ScalingModel::linear;
    out.fit = fit_scaling(out.rows, m);
  }
  return out;
}

}  // namespace bcap
