#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "bcap/rng.hpp"

namespace bcap {

inline constexpr int kMaxDim = 16;

/// A point of Z^d, 5 <= d <= 16 in practice (any d >= 1 is representable).
class LatticePoint {
 public:
  LatticePoint() = default;
  explicit LatticePoint(int dim);
  LatticePoint(std::initializer_list<std::int64_t> coords);
  explicit LatticePoint(std::span<const std::int64_t> coords);

  static LatticePoint origin(int dim) { return LatticePoint(dim); }
  static LatticePoint unit(int dim, int axis, int sign = 1);

  int dim() const { return dim_; }
  std::int64_t operator[](int i) const { return c_[i]; }
  std::int64_t& operator[](int i) { return c_[i]; }
  std::span<const std::int64_t> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }
  const std::int64_t* data() const { return c_.data(); }

  std::int64_t norm2() const;
  double norm() const;

  LatticePoint& operator+=(const LatticePoint& o);
  LatticePoint& operator-=(const LatticePoint& o);
  friend LatticePoint operator+(LatticePoint a, const LatticePoint& b) { return a += b; }
  friend LatticePoint operator-(LatticePoint a, const LatticePoint& b) { return a -= b; }
  LatticePoint operator-() const;
  friend bool operator==(const LatticePoint& a, const LatticePoint& b);

  std::string to_string() const;

 private:
  std::array<std::int64_t, kMaxDim> c_{};
  int dim_ = 0;
};

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const;
};

std::uint64_t hash_coords(const std::int64_t* c, int dim);

/// Exact hash index of distinct lattice points: point -> dense id in
/// insertion order. Coordinates are stored flat with stride d.
class SiteIndex {
 public:
  explicit SiteIndex(int dim = 0);

  int dim() const { return dim_; }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

  /// Returns (id, inserted).
  std::pair<std::size_t, bool> insert(const std::int64_t* c);
  /// Dense id or npos.
  std::size_t find(const std::int64_t* c) const;
  bool contains(const std::int64_t* c) const { return find(c) != npos; }

  const std::int64_t* coords(std::size_t id) const { return coords_.data() + id * dim_; }
  LatticePoint point(std::size_t id) const;

  /// Axis-aligned bounding box of the stored points; cheap rejection test.
  bool in_box(const std::int64_t* c) const {
    for (int k = 0; k < dim_; ++k)
      if (c[k] < lo_[k] || c[k] > hi_[k]) return false;
    return true;
  }

  void reserve(std::size_t n);

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  void grow();
  std::size_t probe(const std::int64_t* c, std::uint64_t h) const;

  int dim_ = 0;
  std::size_t count_ = 0;
  std::vector<std::int64_t> coords_;
  std::vector<std::uint32_t> slots_;  // id + 1, 0 = empty
  std::size_t mask_ = 0;
  std::array<std::int64_t, kMaxDim> lo_{};
  std::array<std::int64_t, kMaxDim> hi_{};
};

/// Finite set of lattice points with exact membership.
class SiteSet {
 public:
  explicit SiteSet(int dim = 0) : index_(dim) {}
  SiteSet(int dim, std::span<const LatticePoint> points);

  int dim() const { return index_.dim(); }
  std::size_t size() const { return index_.size(); }
  bool empty() const { return index_.empty(); }

  bool insert(const LatticePoint& p) { return index_.insert(p.data()).second; }
  bool insert(const std::int64_t* c) { return index_.insert(c).second; }
  bool contains(const LatticePoint& p) const { return p.dim() == dim() && index_.contains(p.data()); }
  bool contains(const std::int64_t* c) const { return index_.in_box(c) && index_.contains(c); }

  LatticePoint point(std::size_t i) const { return index_.point(i); }
  const std::int64_t* coords(std::size_t i) const { return index_.coords(i); }
  const SiteIndex& index() const { return index_; }

  std::vector<LatticePoint> points() const;
  /// max ||x - y|| over pairs (exact, O(n^2) beyond a bounding-box shortcut).
  double diameter() const;
  /// max ||x - c|| over the set.
  double radius_about(const LatticePoint& c) const;
  SiteSet translated(const LatticePoint& z) const;

 private:
  SiteIndex index_;
};

/// Lattice point -> visit count.
class SiteCounts {
 public:
  explicit SiteCounts(int dim = 0) : index_(dim) {}
  void add(const std::int64_t* c, std::uint64_t k = 1);
  std::uint64_t count(const std::int64_t* c) const;
  std::uint64_t count(const LatticePoint& p) const { return count(p.data()); }
  std::size_t size() const { return index_.size(); }
  std::uint64_t total() const;
  LatticePoint point(std::size_t i) const { return index_.point(i); }
  std::uint64_t count_at(std::size_t i) const { return counts_[i]; }
  int dim() const { return index_.dim(); }

 private:
  SiteIndex index_;
  std::vector<std::uint64_t> counts_;
};

/// Step code in {0, ..., 2d-1}: axis = code / 2, sign = +1 for even codes.
inline void apply_step(std::int64_t* c, unsigned code) {
  c[code >> 1] += (code & 1u) ? -1 : 1;
}

/// Nearest-neighbour path X_0..X_m.
class WalkPath {
 public:
  WalkPath(LatticePoint start, std::vector<std::uint8_t> steps);

  int dim() const { return start_.dim(); }
  std::size_t num_steps() const { return steps_.size(); }
  const LatticePoint& start() const { return start_; }
  const std::vector<std::uint8_t>& steps() const { return steps_; }
  LatticePoint position(std::size_t k) const;
  const std::int64_t* position_data(std::size_t k) const { return pos_.data() + k * dim(); }

 private:
  LatticePoint start_;
  std::vector<std::uint8_t> steps_;
  std::vector<std::int64_t> pos_;
};

/// Two-sided walk X_j, j in [-left_len, right_len], X_0 = origin.
class TwoSidedWalk {
 public:
  TwoSidedWalk(int dim, std::vector<std::uint8_t> left_steps, std::vector<std::uint8_t> right_steps);

  int dim() const { return dim_; }
  std::int64_t left_len() const { return static_cast<std::int64_t>(left_steps_.size()); }
  std::int64_t right_len() const { return static_cast<std::int64_t>(right_steps_.size()); }
  std::size_t size() const { return static_cast<std::size_t>(left_len() + right_len() + 1); }
  LatticePoint position(std::int64_t j) const;
  const std::int64_t* position_data(std::int64_t j) const {
    return pos_.data() + static_cast<std::size_t>(j + left_len()) * dim_;
  }
  /// max_j ||X_j||.
  double max_displacement() const;

 private:
  int dim_;
  std::vector<std::uint8_t> left_steps_, right_steps_;
  std::vector<std::int64_t> pos_;
};

/// Geometric(p) on {0,1,2,...}: P(k) = p (1-p)^k, by inversion.
std::int64_t sample_geometric(double p, RandomStream& rng);

WalkPath sample_walk(int dim, std::int64_t n, RandomStream& rng);
/// Fixed branch lengths; left from rng.split(0), right from rng.split(1).
TwoSidedWalk sample_two_sided_fixed(int dim, std::int64_t left, std::int64_t right,
                                    RandomStream& rng);
/// Branch lengths Geometric(1/n), each drawn from its own branch stream.
TwoSidedWalk sample_two_sided(int dim, std::int64_t n, RandomStream& rng);

SiteSet range_window(const WalkPath& walk, std::int64_t a, std::int64_t b);
SiteSet range_window(const TwoSidedWalk& walk, std::int64_t a, std::int64_t b);

/// Lattice ball B(center, radius) in Z^d (closed, Euclidean).
SiteSet lattice_ball(const LatticePoint& center, double radius);

void check_dimension(int dim);

}  // namespace bcap
