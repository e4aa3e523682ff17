#include "bcap/lawler.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "bcap/error.hpp"
#include "bcap/potential.hpp"

namespace bcap {

namespace {

/// Distinct sites of the window with multiplicities; right[id] marks sites of R[0, right_len].
struct WalkSites {
  SiteIndex index;
  std::vector<double> mult;
  std::vector<char> right;

  const std::int64_t* flat() const { return index.coords(0); }
  std::size_t find(const std::int64_t* p) const {
    return index.in_box(p) ? index.find(p) : SiteIndex::npos;
  }
};

WalkSites index_walk(const TwoSidedWalk& w) {
  WalkSites ws{SiteIndex(w.dim()), {}, {}};
  ws.index.reserve(w.size());
  for (std::int64_t j = -w.left_len(); j <= w.right_len(); ++j) {
    const auto [id, inserted] = ws.index.insert(w.position_data(j));
    if (inserted) {
      ws.mult.push_back(0.0);
      ws.right.push_back(0);
    }
    ws.mult[id] += 1.0;
    if (j >= 0) ws.right[id] = 1;
  }
  return ws;
}

struct PastVisitor {
  const WalkSites* ws;
  BallKeep ball;
  const TubeFilter* tube;
  bool need_B;
  bool hit_A = false, hit_B = false;
  bool vertex(const std::int64_t* p) {
    const std::size_t id = ws->find(p);
    if (id == SiteIndex::npos) return false;
    hit_A = true;
    if (ws->right[id]) hit_B = true;
    return need_B ? hit_B : true;
  }
  bool keep(const std::int64_t* p, std::int64_t d2) const { return ball(d2) && (!tube->enabled() || tube->keep(p, d2)); }
  void cut(const std::int64_t*) {}
};

/// Future visits to the window; a killed or cut vertex v contributes its
/// subtree's conditional mean sum_w m_w g(w - v).
struct FutureVisitor {
  const WalkSites* ws;
  BallKeep ball;
  const GreenPotential* pot;
  double visits = 0;
  double correction = 0;
  bool vertex(const std::int64_t* p) {
    const std::size_t id = ws->find(p);
    if (id != SiteIndex::npos) visits += ws->mult[id];
    return false;
  }
  bool keep(const std::int64_t* p, std::int64_t d2) {
    if (ball(d2)) return true;
    correction += pot->g_sum(p);
    return false;
  }
  void cut(const std::int64_t* p) { correction += pot->g_sum(p); }
};

std::vector<double> flat_weights(const WalkSites& ws) { return ws.mult; }

std::vector<std::int64_t> flat_coords(const WalkSites& ws) {
  const std::size_t n = ws.index.size() * static_cast<std::size_t>(ws.index.dim());
  return std::vector<std::int64_t>(ws.flat(), ws.flat() + n);
}

/// sum_w m_w K(w - y) for K in {g, G}, by direct table lookups.
double direct_sum(const WalkSites& ws, const GreenTable& table, const std::int64_t* y, bool big) {
  double s = 0;
  for (std::size_t i = 0; i < ws.index.size(); ++i) {
    const std::int64_t* w = ws.index.coords(i);
    s += ws.mult[i] * (big ? table.G_diff(w, y) : table.g_diff(w, y));
  }
  return s;
}

struct Potentials {
  double U = 0, Z = 0, tail_G = 0, tail_g = 0;
};

/// U and Z from the weighted spine sites (d_i at X~_i, i < T) plus the
/// conditional-mean tail from X~_T.
/// Spine vertices with d_i > 0, in spine order.
struct SpineWeights {
  int dim;
  std::vector<std::int64_t> pos;
  std::vector<double> w;
  void add(const std::int64_t* p, int k) {
    pos.insert(pos.end(), p, p + dim);
    w.push_back(static_cast<double>(k));
  }
};

Potentials spine_potentials(const WalkSites& ws, const SpineWeights& spine_w, const std::int64_t* x_T,
                            double half_var, const GreenTable& table, const LawlerOptions& opt) {
  Potentials out;
  const int d = ws.index.dim();
  std::unique_ptr<GreenPotential> pot;
  if (static_cast<std::int64_t>(ws.index.size()) > opt.multipole_threshold)
    pot = std::make_unique<GreenPotential>(d, flat_coords(ws), flat_weights(ws), table, opt.multipole_theta,
                                           opt.multipole_min_far);
  std::vector<double> terms(spine_w.w.size());
  double z = 0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const std::int64_t* s = spine_w.pos.data() + k * d;
    const double w = spine_w.w[k];
    terms[k] = w * (pot ? pot->g_sum(s) : direct_sum(ws, table, s, false));
    const std::size_t id = ws.find(s);
    if (id != SiteIndex::npos) z += w * ws.mult[id];
  }
  out.tail_G = direct_sum(ws, table, x_T, true);
  out.tail_g = direct_sum(ws, table, x_T, false);
  out.U = pairwise_sum(terms) + half_var * out.tail_G;
  out.Z = z + half_var * out.tail_g;
  return out;
}

}  // namespace

double lawler_bias_order(int d, double radius_factor) { return std::pow(radius_factor, -(d - 4)); }

LawlerTrial run_trial(std::int64_t n, const OffspringLaw& law, const GreenTable& table,
                      const LawlerOptions& opt, const TrialParts& parts, const RandomStream& rng) {
  if (n < 1) throw ConfigError("lawler: n must be >= 1");
  if (!(opt.radius_factor > 0)) throw ConfigError("lawler: radius factor must be > 0");
  const int d = table.dim();
  RandomStream walk_stream = rng.split(0);
  const TwoSidedWalk walk = sample_two_sided(d, n, walk_stream);
  LawlerTrial t;
  t.n = n;
  t.left_len = walk.left_len();
  t.right_len = walk.right_len();
  t.max_displacement = walk.max_displacement();
  t.radius = opt.radius_factor * std::max(t.max_displacement, 1.0);
  const WalkSites ws = index_walk(walk);
  const std::int64_t* origin = walk.position_data(0);
  t.N_n = static_cast<std::int64_t>(ws.mult[ws.find(origin)]);
  t.e_n = 1;
  for (std::int64_t j = 1; j <= walk.right_len() && t.e_n; ++j) {
    const std::int64_t* p = walk.position_data(j);
    bool same = true;
    for (int k = 0; k < d && same; ++k) same = p[k] == origin[k];
    if (same) t.e_n = 0;
  }
  const double half_var = 0.5 * law.variance();

  TruncationPolicy pol;
  pol.spine_exit_radius = t.radius;
  pol.subtree_node_cap = opt.node_cap;
  const TreeStreams streams(rng.split(1));
  const LatticePoint o = LatticePoint::origin(d);
  const bool need_tree = parts.identity || parts.escape;

  SpineWeights spine_w{d, {}, {}};
  std::array<std::int64_t, kMaxDim> x_T{};
  SpineSample sp;
  RandomStream spine_stream = streams.spine;
  if (need_tree) {
    sp = sample_spine(law, o, pol.spine_exit_radius, pol.spine_step_cap, spine_stream);
    for (std::int64_t i = 0; i < sp.T(); ++i)
      if (sp.future[i] > 0) spine_w.add(sp.at(i), sp.future[i]);
    std::copy(sp.at(sp.T()), sp.at(sp.T()) + d, x_T.begin());
    t.spine_T = sp.T();
    t.truncated = sp.truncated;
  } else {
    bool trunc = false;
    t.spine_T = walk_spine(
        law, o, pol.spine_exit_radius, pol.spine_step_cap, spine_stream,
        [&](std::int64_t, const std::int64_t* p, int, int future) {
          if (future > 0) spine_w.add(p, future);
          if (future < 0) std::copy(p, p + d, x_T.begin());
        },
        trunc);
    t.truncated = trunc;
  }

  thread_local GwScratch sc;
  if (need_tree) {
    const TubeFilter tube = parts.escape && opt.tube_alpha > 0
                                ? TubeFilter(d, ws.flat(), ws.index.size(), opt.tube_alpha, t.radius)
                                : TubeFilter();
    PastVisitor pv{&ws, BallKeep{pol.kill_radius2()}, &tube, parts.escape};
    const ForestStats pf = grow_past(law, sp, pol, streams.past, pv, sc);
    t.past_nodes = pf.nodes;
    t.truncated = t.truncated || pf.capped_trees > 0;
    t.indicator_A = pv.hit_A ? 0 : 1;
    t.indicator_B = pv.hit_B ? 0 : 1;
  }

  const bool active = parts.identity && t.indicator_A && t.e_n;
  if (parts.potentials || active) {
    const Potentials pt = spine_potentials(ws, spine_w, x_T.data(), half_var, table, opt);
    t.U_n = pt.U;
    t.Z_n = pt.Z;
    double G_terms = 0, g_terms = 0;
    std::vector<double> Gs(ws.index.size()), gs(ws.index.size());
    for (std::size_t i = 0; i < ws.index.size(); ++i) {
      Gs[i] = ws.mult[i] * table.G(ws.index.coords(i));
      gs[i] = ws.mult[i] * table.g(ws.index.coords(i));
    }
    G_terms = pairwise_sum(Gs);
    g_terms = pairwise_sum(gs);
    t.G_n = G_terms;
    t.g_n = g_terms;
    t.potentials_valid = true;
    if (active) {
      const GreenPotential pot(d, flat_coords(ws), flat_weights(ws), table, 0.5, 16.0);
      FutureVisitor fv{&ws, BallKeep{pol.kill_radius2()}, &pot};
      const ForestStats ff = grow_future(law, sp, pol, streams.future, fv, sc);
      t.future_nodes = ff.nodes;
      t.truncated = t.truncated || ff.capped_trees > 0;
      t.L_n = fv.visits + fv.correction + half_var * (pt.tail_G - pt.tail_g);
    }
  }
  return t;
}

bool identity_gate(const McEstimate& e) {
  return std::abs(e.mean - 1.0) <= 3.0 * e.stderr + e.bias_bound;
}

namespace {

struct FormSamples {
  std::vector<double> L, U, L_lit, U_lit, root;
  std::int64_t truncated = 0;
};

FormSamples identity_samples(std::int64_t n, const OffspringLaw& law, const GreenTable& table,
                             const LawlerOptions& opt, std::int64_t samples, const RandomStream& rng,
                             bool want_L, bool want_U) {
  if (samples < 1) throw ConfigError("samples must be >= 1");
  const TrialParts parts{true, false, false};
  const auto trials = parallel_map<LawlerTrial>(samples, opt.workers, [&](std::int64_t s) {
    return run_trial(n, law, table, opt, parts, rng.split(static_cast<std::uint64_t>(s)));
  });
  FormSamples out;
  for (const LawlerTrial& t : trials) {
    const double on = t.indicator_A * t.e_n;
    const double root = on * static_cast<double>(t.N_n);
    out.root.push_back(root);
    if (want_L) {
      out.L_lit.push_back(on * t.L_n);
      out.L.push_back(out.L_lit.back() + root);
    }
    if (want_U) {
      out.U_lit.push_back(on * (t.U_n - t.Z_n));
      out.U.push_back(out.U_lit.back() + root);
    }
    out.truncated += t.truncated ? 1 : 0;
  }
  return out;
}

McEstimate finish(const std::vector<double>& xs, int d, const LawlerOptions& opt, std::int64_t n,
                  std::int64_t truncated) {
  McEstimate e = summarize(xs);
  e.bias_bound = std::abs(e.mean) * lawler_bias_order(d, opt.radius_factor);
  std::ostringstream os;
  os << "n=" << n << " radius_factor=" << opt.radius_factor << " truncated=" << truncated;
  e.meta = os.str();
  return e;
}

}  // namespace

McEstimate check_identity_L(std::int64_t n, const OffspringLaw& law, const GreenTable& table,
                            const LawlerOptions& opt, std::int64_t samples, const RandomStream& rng) {
  const FormSamples fs = identity_samples(n, law, table, opt, samples, rng, true, false);
  return finish(fs.L, table.dim(), opt, n, fs.truncated);
}

McEstimate check_identity_U(std::int64_t n, const OffspringLaw& law, const GreenTable& table,
                            const LawlerOptions& opt, std::int64_t samples, const RandomStream& rng) {
  const FormSamples fs = identity_samples(n, law, table, opt, samples, rng, false, true);
  return finish(fs.U, table.dim(), opt, n, fs.truncated);
}

IdentityCheck check_identity(std::int64_t n, const OffspringLaw& law, const GreenTable& table,
                             const LawlerOptions& opt, std::int64_t samples, const RandomStream& rng) {
  IdentityCheck c;
  LawlerOptions cur = opt;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const FormSamples fs = identity_samples(n, law, table, cur, samples, rng, true, true);
    c.L_form = finish(fs.L, table.dim(), cur, n, fs.truncated);
    c.U_form = finish(fs.U, table.dim(), cur, n, fs.truncated);
    c.L_literal = finish(fs.L_lit, table.dim(), cur, n, fs.truncated);
    c.U_literal = finish(fs.U_lit, table.dim(), cur, n, fs.truncated);
    c.root_term = finish(fs.root, table.dim(), cur, n, fs.truncated);
    c.radius_factor = cur.radius_factor;
    c.pass_L = identity_gate(c.L_form);
    c.pass_U = identity_gate(c.U_form);
    c.variance_ok = c.U_form.variance <= 1.05 * c.L_form.variance;
    if ((c.pass_L && c.pass_U) || attempt == 1) break;
    c.rerun = true;
    cur.radius_factor *= 2.0;
  }
  return c;
}

UnGnStats stats_un_gn(const std::vector<std::int64_t>& n_list, const OffspringLaw& law,
                      const GreenTable& table, const LawlerOptions& opt, std::int64_t samples,
                      const RandomStream& rng) {
  if (samples < 2) throw ConfigError("stats: samples must be >= 2");
  UnGnStats out;
  const TrialParts parts{false, false, true};
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    const std::int64_t n = n_list[k];
    const RandomStream row = rng.split(k);
    const auto trials = parallel_map<LawlerTrial>(samples, opt.workers, [&](std::int64_t s) {
      return run_trial(n, law, table, opt, parts, row.split(static_cast<std::uint64_t>(s)));
    });
    std::vector<double> U, G, g, dev2;
    for (const LawlerTrial& t : trials) {
      U.push_back(t.U_n);
      G.push_back(t.G_n);
      g.push_back(t.g_n);
    }
    UnGnRow r;
    r.n = n;
    r.U = summarize(U);
    r.G = summarize(G);
    r.g = summarize(g);
    r.var_U = r.U.variance;
    r.var_G = r.G.variance;
    // Stderr of the sample variance from the squared deviations.
    for (double u : U) dev2.push_back((u - r.U.mean) * (u - r.U.mean));
    r.var_U_stderr = summarize(dev2).stderr;
    out.rows.push_back(r);
  }
  if (out.rows.size() >= 2) {
    std::vector<double> x, yu, yg, su, sg;
    bool weighted = true;
    for (const UnGnRow& r : out.rows) {
      x.push_back(std::log(static_cast<double>(r.n)));
      yu.push_back(r.U.mean);
      yg.push_back(r.G.mean);
      su.push_back(r.U.stderr);
      sg.push_back(r.G.stderr);
      weighted = weighted && r.U.stderr > 0 && r.G.stderr > 0;
    }
    out.U_fit = weighted ? fit_line_weighted(x, yu, su) : fit_line(x, yu);
    out.G_fit = weighted ? fit_line_weighted(x, yg, sg) : fit_line(x, yg);
  }
  return out;
}

EscapeEstimate estimate_escape(std::int64_t n, const OffspringLaw& law, const GreenTable& table,
                               const LawlerOptions& opt, std::int64_t samples, const RandomStream& rng) {
  if (samples < 1) throw ConfigError("samples must be >= 1");
  const TrialParts parts{false, true, false};
  const auto trials = parallel_map<LawlerTrial>(samples, opt.workers, [&](std::int64_t s) {
    return run_trial(n, law, table, opt, parts, rng.split(static_cast<std::uint64_t>(s)));
  });
  std::vector<double> a, b;
  EscapeEstimate out;
  for (const LawlerTrial& t : trials) {
    a.push_back(t.indicator_A);
    b.push_back(t.indicator_B);
    if (t.indicator_A && !t.indicator_B) ++out.inclusion_violations;
  }
  out.pA = summarize(a);
  out.pB = summarize(b);
  // Missed far hits only inflate the avoidance probabilities.
  const double order = lawler_bias_order(table.dim(), opt.radius_factor);
  out.pA.bias_bound = out.pA.mean * order;
  out.pB.bias_bound = out.pB.mean * order;
  std::ostringstream os;
  os << "n=" << n << " radius_factor=" << opt.radius_factor << " tube_alpha=" << opt.tube_alpha;
  out.pA.meta = out.pB.meta = os.str();
  return out;
}

}  // namespace bcap
