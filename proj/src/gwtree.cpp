#include "bcap/gwtree.hpp"

#include <cmath>
#include <ostream>

#include "bcap/error.hpp"

namespace bcap {

void TruncationPolicy::validate() const {
  if (!(spine_exit_radius > 0)) throw ConfigError("spine_exit_radius must be > 0");
  if (subtree_node_cap < 1) throw ConfigError("subtree_node_cap must be >= 1");
  if (spine_step_cap < 1) throw ConfigError("spine_step_cap must be >= 1");
}

std::int64_t TruncationPolicy::kill_radius2() const {
  const double r = effective_kill_radius();
  // Smallest integer strictly above r^2 - eps: d2 < ceil(r^2) <=> sqrt(d2) < r.
  return static_cast<std::int64_t>(std::ceil(r * r - 1e-9));
}

SpineSample sample_spine(const OffspringLaw& law, const LatticePoint& start, double exit_radius,
                         std::int64_t step_cap, RandomStream& rng) {
  const int d = start.dim();
  SpineSample sp;
  sp.dim = d;
  walk_spine(
      law, start, exit_radius, step_cap, rng,
      [&](std::int64_t, const std::int64_t* p, int past, int future) {
        sp.pos.insert(sp.pos.end(), p, p + d);
        if (future >= 0) {
          sp.past.push_back(past);
          sp.future.push_back(future);
        }
      },
      sp.truncated);
  return sp;
}

TubeFilter::TubeFilter(int dim, const std::int64_t* coords, std::size_t count, double alpha,
                       double max_radius, int min_level)
    : dim_(dim), alpha_(alpha), min_level_(min_level) {
  if (!(alpha > 0)) return;
  const double top = std::max(alpha * max_radius, 1.0);
  max_level_ = std::max(min_level, static_cast<int>(std::floor(std::log2(top))));
  std::array<std::int64_t, kMaxDim> cell{}, nb{};
  for (int l = min_level_; l <= max_level_; ++l) {
    SiteIndex occupied(dim);
    for (std::size_t i = 0; i < count; ++i) {
      for (int k = 0; k < dim; ++k) cell[k] = coords[i * dim + k] >> l;
      occupied.insert(cell.data());
    }
    SiteIndex dil(dim);
    dil.reserve(occupied.size() * 8);
    std::int64_t combos = 1;
    for (int k = 0; k < dim; ++k) combos *= 3;
    for (std::size_t c = 0; c < occupied.size(); ++c) {
      const std::int64_t* base = occupied.coords(c);
      for (std::int64_t m = 0; m < combos; ++m) {
        std::int64_t t = m;
        for (int k = 0; k < dim; ++k) {
          nb[k] = base[k] + (t % 3) - 1;
          t /= 3;
        }
        dil.insert(nb.data());
      }
    }
    dilated_.push_back(std::move(dil));
  }
}

bool TubeFilter::keep(const std::int64_t* p, std::int64_t d2) const {
  if (alpha_ <= 0) return true;
  const double delta = alpha_ * std::sqrt(static_cast<double>(d2));
  if (delta < static_cast<double>(std::int64_t{1} << min_level_)) return true;
  const int l = std::min(max_level_, static_cast<int>(std::floor(std::log2(delta))));
  std::array<std::int64_t, kMaxDim> cell{};
  for (int k = 0; k < dim_; ++k) cell[k] = p[k] >> l;
  return dilated_[l - min_level_].contains(cell.data());
}

namespace {

struct OccupationVisitor {
  SiteCounts* counts;
  bool vertex(const std::int64_t* p) {
    counts->add(p);
    return false;
  }
  bool keep(const std::int64_t*, std::int64_t) const { return true; }
  void cut(const std::int64_t*) {}
};

struct PastSetVisitor {
  SiteSet* sites;
  BallKeep ball;
  std::int64_t killed = 0;
  bool vertex(const std::int64_t* p) {
    sites->insert(p);
    return false;
  }
  bool keep(const std::int64_t*, std::int64_t d2) {
    if (ball(d2)) return true;
    ++killed;
    return false;
  }
  void cut(const std::int64_t*) {}
};

struct FutureTargetVisitor {
  const SiteSet* targets;
  SiteCounts* counts;
  BallKeep ball;
  std::int64_t killed = 0;
  bool vertex(const std::int64_t* p) {
    if (targets->contains(p)) counts->add(p);
    return false;
  }
  bool keep(const std::int64_t*, std::int64_t d2) {
    if (ball(d2)) return true;
    ++killed;
    return false;
  }
  void cut(const std::int64_t*) {}
};

}  // namespace

GwOccupation sample_gw_occupation(const OffspringLaw& law, const LatticePoint& start,
                                  bool include_root, std::int64_t cap, RandomStream& rng) {
  if (cap < 1) throw ConfigError("node cap must be >= 1");
  GwOccupation occ{SiteCounts(start.dim()), 0, false};
  OccupationVisitor v{&occ.visits};
  GwScratch sc;
  const GrowStats st = grow_gw(law, start.dim(), start.data(), 0, start.data(), include_root, cap, v, rng, sc);
  occ.node_count = st.nodes;
  occ.truncated = st.capped;
  return occ;
}

PastSample sample_past(const OffspringLaw& law, const LatticePoint& start,
                       const TruncationPolicy& policy, RandomStream& rng) {
  policy.validate();
  TreeStreams streams(rng);
  PastSample out;
  out.spine = sample_spine(law, start, policy.spine_exit_radius, policy.spine_step_cap, streams.spine);
  out.past_sites = SiteSet(start.dim());
  PastSetVisitor v{&out.past_sites, BallKeep{policy.kill_radius2()}};
  GwScratch sc;
  const ForestStats fs = grow_past(law, out.spine, policy, streams.past, v, sc);
  out.killed = v.killed;
  out.truncated = out.spine.truncated || fs.capped_trees > 0;
  out.bias_note = std::pow(policy.spine_exit_radius, -(start.dim() - 4));
  return out;
}

InvariantTreeSample sample_invariant_tree(const OffspringLaw& law, const LatticePoint& start,
                                          const SiteSet& targets, const TruncationPolicy& policy,
                                          RandomStream& rng) {
  policy.validate();
  TreeStreams streams(rng);
  InvariantTreeSample out;
  out.spine = sample_spine(law, start, policy.spine_exit_radius, policy.spine_step_cap, streams.spine);
  out.past_sites = SiteSet(start.dim());
  out.future_occupation = SiteCounts(start.dim());
  GwScratch sc;
  PastSetVisitor pv{&out.past_sites, BallKeep{policy.kill_radius2()}};
  const ForestStats pf = grow_past(law, out.spine, policy, streams.past, pv, sc);
  FutureTargetVisitor fv{&targets, &out.future_occupation, BallKeep{policy.kill_radius2()}};
  ForestStats ff;
  if (!targets.empty()) ff = grow_future(law, out.spine, policy, streams.future, fv, sc);
  out.past_killed = pv.killed;
  out.future_killed = fv.killed;
  out.truncated = out.spine.truncated || pf.capped_trees > 0 || ff.capped_trees > 0;
  out.bias_note = std::pow(policy.spine_exit_radius, -(start.dim() - 4));
  return out;
}

namespace {

struct DumpVisitor {
  std::ostream* out;
  const char* side;
  std::int64_t index;
  int dim;
  BallKeep ball;
  void line(const std::int64_t* p) {
    *out << side << ' ' << index;
    for (int k = 0; k < dim; ++k) *out << ' ' << p[k];
    *out << '\n';
  }
  bool vertex(const std::int64_t* p) {
    line(p);
    return false;
  }
  bool keep(const std::int64_t*, std::int64_t d2) const { return ball(d2); }
  void cut(const std::int64_t*) {}
};

}  // namespace

void dump_invariant_tree(const OffspringLaw& law, const LatticePoint& start,
                         const TruncationPolicy& policy, RandomStream& rng, std::ostream& out) {
  policy.validate();
  TreeStreams streams(rng);
  const SpineSample sp =
      sample_spine(law, start, policy.spine_exit_radius, policy.spine_step_cap, streams.spine);
  DumpVisitor v{&out, "root", 0, sp.dim, BallKeep{policy.kill_radius2()}};
  v.line(sp.at(0));
  GwScratch sc;
  ForestStats fs;
  for (std::int64_t i = 0; i <= sp.T(); ++i) {
    if (i > 0) {
      v.side = "spine";
      v.index = i;
      v.line(sp.at(i));
    }
    if (i == sp.T()) break;
    v.index = i;
    v.side = "past";
    if (sp.past[i] > 0)
      detail::grow_hanging(law, sp, i, sp.past[i], sp.at(0), policy.subtree_node_cap, v,
                           streams.past.split(static_cast<std::uint64_t>(i)), sc, fs);
    v.side = "future";
    if (sp.future[i] > 0)
      detail::grow_hanging(law, sp, i, sp.future[i], sp.at(0), policy.subtree_node_cap, v,
                           streams.future.split(static_cast<std::uint64_t>(i)), sc, fs);
  }
}

}  // namespace bcap
