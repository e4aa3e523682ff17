#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bcap/lattice.hpp"
#include "bcap/offspring.hpp"
#include "bcap/rng.hpp"

namespace bcap {

/// Controls the finite approximation of the invariant tree.
struct TruncationPolicy {
  double spine_exit_radius = 64.0;
  /// Forest vertices at distance >= kill_radius from the start are not grown.
  /// <= 0 means "same as spine_exit_radius".
  double kill_radius = 0.0;
  std::int64_t subtree_node_cap = 1'000'000;
  std::int64_t spine_step_cap = 100'000'000;

  void validate() const;
  double effective_kill_radius() const { return kill_radius > 0 ? kill_radius : spine_exit_radius; }
  std::int64_t kill_radius2() const;
};

/// Spine X~_0..X~_T with X~_0 = start; T is the first index with
/// ||X~_T - start|| >= spine_exit_radius (or the step cap).
/// future[i] = d_i and past[i] for i < T; past[0] = 0.
struct SpineSample {
  int dim = 0;
  std::vector<std::int64_t> pos;
  std::vector<int> future;
  std::vector<int> past;
  bool truncated = false;

  std::int64_t T() const { return static_cast<std::int64_t>(pos.size() / dim) - 1; }
  const std::int64_t* at(std::int64_t i) const { return pos.data() + i * dim; }
  LatticePoint point(std::int64_t i) const {
    return LatticePoint(std::span<const std::int64_t>(at(i), static_cast<std::size_t>(dim)));
  }
};

/// Stream layout of one invariant tree drawn from `s`:
/// s.split(0) spine, s.split(1).split(i) past trees at spine index i,
/// s.split(2).split(i) future trees at spine index i (i = 0 is the root).
struct TreeStreams {
  RandomStream spine, past, future;
  explicit TreeStreams(const RandomStream& s) : spine(s.split(0)), past(s.split(1)), future(s.split(2)) {}
};

/// Streams the spine: f(i, pos, past_i, future_i) for 0 <= i < T, then
/// f(T, pos, -1, -1). Draw order: d_0, then per index a step and, unless the
/// walk has exited, a spine split. Returns T; sets `truncated` on the step cap.
template <class F>
std::int64_t walk_spine(const OffspringLaw& law, const LatticePoint& start, double exit_radius,
                        std::int64_t step_cap, RandomStream& rng, F&& f, bool& truncated) {
  const int d = start.dim();
  std::array<std::int64_t, kMaxDim> cur{};
  std::copy(start.data(), start.data() + d, cur.begin());
  f(std::int64_t{0}, static_cast<const std::int64_t*>(cur.data()), 0, root_offspring(law, rng));
  const double r2 = exit_radius * exit_radius;
  std::int64_t d2 = 0;
  const auto two_d = static_cast<std::uint32_t>(2 * d);
  truncated = false;
  for (std::int64_t i = 1;; ++i) {
    const auto code = static_cast<unsigned>(rng.below32(two_d));
    const unsigned axis = code >> 1;
    const std::int64_t rel = cur[axis] - start[static_cast<int>(axis)];
    d2 += (code & 1u) ? 1 - 2 * rel : 1 + 2 * rel;
    apply_step(cur.data(), code);
    const bool exited = static_cast<double>(d2) >= r2 - 1e-9;
    if (exited || i >= step_cap) {
      truncated = !exited;
      f(i, static_cast<const std::int64_t*>(cur.data()), -1, -1);
      return i;
    }
    const SpineSplit s = spine_split(law, rng);
    f(i, static_cast<const std::int64_t*>(cur.data()), s.past_count, s.future_count);
  }
}

SpineSample sample_spine(const OffspringLaw& law, const LatticePoint& start, double exit_radius,
                         std::int64_t step_cap, RandomStream& rng);

struct GrowStats {
  std::int64_t nodes = 0;
  std::int64_t killed = 0;
  bool capped = false;
  bool stopped = false;
};

/// Reusable generation buffers.
struct GwScratch {
  std::vector<std::int64_t> cur, next;
  std::vector<std::int64_t> cur_d2, next_d2;
};

/// Visitor contract for the growth routines:
///   bool vertex(const int64_t* p)       counted vertex; true stops everything
///   bool keep(const int64_t* p, int64_t d2)  false kills p and its subtree
///   void cut(const int64_t* p)          p dropped by the node cap
/// d2 is the squared distance of p from the tree's center.
template <class V>
GrowStats grow_gw(const OffspringLaw& law, int dim, const std::int64_t* root, std::int64_t root_d2,
                  const std::int64_t* center, bool include_root, std::int64_t cap, V& v,
                  RandomStream& rng, GwScratch& sc) {
  GrowStats st;
  sc.cur.assign(root, root + dim);
  sc.cur_d2.assign(1, root_d2);
  bool first = true;
  const auto two_d = static_cast<std::uint32_t>(2 * dim);
  std::array<std::uint32_t, 33> packed{1};
  int pack = 0;
  while (pack < 32 && std::uint64_t{packed[pack]} * two_d <= 0xFFFFFFFFull) {
    packed[pack + 1] = packed[pack] * two_d;
    ++pack;
  }
  while (!sc.cur_d2.empty()) {
    sc.next.clear();
    sc.next_d2.clear();
    const std::size_t m = sc.cur_d2.size();
    for (std::size_t a = 0; a < m; ++a) {
      const std::int64_t* p = sc.cur.data() + a * dim;
      const bool counted = include_root || !first;
      if (counted) {
        if (st.nodes >= cap) {
          st.capped = true;
          for (std::size_t b = a; b < m; ++b) v.cut(sc.cur.data() + b * dim);
          for (std::size_t b = 0; b < sc.next_d2.size(); ++b) v.cut(sc.next.data() + b * dim);
          return st;
        }
        ++st.nodes;
        if (v.vertex(p)) {
          st.stopped = true;
          return st;
        }
      }
      const int k = law.sample(rng);
      std::uint32_t codes = 0;
      for (int c = 0; c < k; ++c) {
        // Step codes of up to `pack` children share one exact 32-bit draw.
        if (c % pack == 0) codes = rng.below32(packed[std::min(k - c, pack)]);
        const unsigned code = codes % two_d;
        codes /= two_d;
        const std::size_t off = sc.next.size();
        sc.next.insert(sc.next.end(), p, p + dim);
        std::int64_t* q = sc.next.data() + off;
        const unsigned axis = code >> 1;
        const std::int64_t rel = q[axis] - center[axis];
        const std::int64_t d2 = sc.cur_d2[a] + ((code & 1u) ? 1 - 2 * rel : 1 + 2 * rel);
        apply_step(q, code);
        if (!v.keep(q, d2)) {
          ++st.killed;
          sc.next.resize(off);
          continue;
        }
        sc.next_d2.push_back(d2);
      }
    }
    first = false;
    sc.cur.swap(sc.next);
    sc.cur_d2.swap(sc.next_d2);
  }
  return st;
}

struct ForestStats {
  std::int64_t nodes = 0;
  std::int64_t killed = 0;
  std::int64_t capped_trees = 0;
  bool stopped = false;
};

namespace detail {
inline std::int64_t dist2(const std::int64_t* a, const std::int64_t* b, int dim) {
  std::int64_t s = 0;
  for (int k = 0; k < dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

template <class V>
bool grow_hanging(const OffspringLaw& law, const SpineSample& sp, std::int64_t i, int count,
                  const std::int64_t* center, std::int64_t cap, V& v, RandomStream rng,
                  GwScratch& sc, ForestStats& fs) {
  const int d = sp.dim;
  std::array<std::int64_t, kMaxDim> root{};
  const auto two_d = static_cast<std::uint32_t>(2 * d);
  for (int t = 0; t < count; ++t) {
    std::copy(sp.at(i), sp.at(i) + d, root.begin());
    apply_step(root.data(), static_cast<unsigned>(rng.below32(two_d)));
    const std::int64_t d2 = dist2(root.data(), center, d);
    if (!v.keep(root.data(), d2)) {
      ++fs.killed;
      continue;
    }
    const GrowStats st = grow_gw(law, d, root.data(), d2, center, true, cap, v, rng, sc);
    fs.nodes += st.nodes;
    fs.killed += st.killed;
    fs.capped_trees += st.capped ? 1 : 0;
    if (st.stopped) {
      fs.stopped = true;
      return true;
    }
  }
  return false;
}
}  // namespace detail

/// Visits spine vertices 1..T (the spine part of the past) and grows the past
/// trees hanging at indices 1..T-1, in spine order. `past_stream` is the
/// TreeStreams::past stream.
template <class V>
ForestStats grow_past(const OffspringLaw& law, const SpineSample& sp, const TruncationPolicy& pol,
                      const RandomStream& past_stream, V& v, GwScratch& sc) {
  ForestStats fs;
  const std::int64_t* center = sp.at(0);
  const std::int64_t T = sp.T();
  for (std::int64_t i = 1; i <= T; ++i) {
    ++fs.nodes;
    if (v.vertex(sp.at(i))) {
      fs.stopped = true;
      return fs;
    }
    if (i < T && sp.past[i] > 0 &&
        detail::grow_hanging(law, sp, i, sp.past[i], center, pol.subtree_node_cap, v,
                             past_stream.split(static_cast<std::uint64_t>(i)), sc, fs))
      return fs;
  }
  return fs;
}

/// Grows the future trees hanging at spine indices 0..T-1 (root excluded).
template <class V>
ForestStats grow_future(const OffspringLaw& law, const SpineSample& sp, const TruncationPolicy& pol,
                        const RandomStream& future_stream, V& v, GwScratch& sc) {
  ForestStats fs;
  const std::int64_t* center = sp.at(0);
  for (std::int64_t i = 0; i < sp.T(); ++i) {
    if (sp.future[i] > 0 &&
        detail::grow_hanging(law, sp, i, sp.future[i], center, pol.subtree_node_cap, v,
                             future_stream.split(static_cast<std::uint64_t>(i)), sc, fs))
      return fs;
  }
  return fs;
}

/// Ball kill rule around a center with squared radius r2.
struct BallKeep {
  std::int64_t r2;
  bool operator()(std::int64_t d2) const { return d2 < r2; }
};

/// Scale-adaptive neighbourhood of a finite site set: p at distance
/// rho = sqrt(d2) from the center is kept iff its cell of side
/// 2^l <= alpha * rho (l >= min_level) touches a cell holding a site.
/// Dropped points lie at distance >= 2^l >= alpha * rho / 2 from every site.
class TubeFilter {
 public:
  TubeFilter() = default;
  TubeFilter(int dim, const std::int64_t* coords, std::size_t count, double alpha, double max_radius,
             int min_level = 3);
  bool enabled() const { return alpha_ > 0; }
  bool keep(const std::int64_t* p, std::int64_t d2) const;

 private:
  int dim_ = 0;
  double alpha_ = 0;
  int min_level_ = 0, max_level_ = -1;
  std::vector<SiteIndex> dilated_;  // indexed by level - min_level
};

// ---------------------------------------------------------------------------
// Materialized samples.

struct GwOccupation {
  SiteCounts visits;
  std::int64_t node_count = 0;
  bool truncated = false;
};

/// mu-GW tree rooted at `start` with uniform unit increments along edges.
GwOccupation sample_gw_occupation(const OffspringLaw& law, const LatticePoint& start,
                                  bool include_root, std::int64_t cap, RandomStream& rng);

struct PastSample {
  SiteSet past_sites;
  SpineSample spine;
  bool truncated = false;
  double bias_note = 0;
  std::int64_t killed = 0;
};

PastSample sample_past(const OffspringLaw& law, const LatticePoint& start,
                       const TruncationPolicy& policy, RandomStream& rng);

struct InvariantTreeSample {
  SpineSample spine;
  SiteSet past_sites;
  SiteCounts future_occupation;  // restricted to targets, root excluded
  bool truncated = false;
  double bias_note = 0;
  std::int64_t past_killed = 0;
  std::int64_t future_killed = 0;

  const std::vector<int>& d() const { return spine.future; }
};

InvariantTreeSample sample_invariant_tree(const OffspringLaw& law, const LatticePoint& start,
                                          const SiteSet& targets, const TruncationPolicy& policy,
                                          RandomStream& rng);

/// One line per vertex: "side index x1 ... xd", side in {root, spine, past,
/// future}, index = spine index the vertex hangs from.
void dump_invariant_tree(const OffspringLaw& law, const LatticePoint& start,
                         const TruncationPolicy& policy, RandomStream& rng, std::ostream& out);

}  // namespace bcap
