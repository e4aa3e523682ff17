#include "bcap/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "bcap/error.hpp"

namespace bcap {

void check_dimension(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw ConfigError("dimension must be in [1, " + std::to_string(kMaxDim) + "], got " +
                      std::to_string(dim));
}

// ---------------------------------------------------------------------------
// LatticePoint

LatticePoint::LatticePoint(int dim) : dim_(dim) { check_dimension(dim); }

LatticePoint::LatticePoint(std::initializer_list<std::int64_t> coords)
    : dim_(static_cast<int>(coords.size())) {
  check_dimension(dim_);
  std::copy(coords.begin(), coords.end(), c_.begin());
}

LatticePoint::LatticePoint(std::span<const std::int64_t> coords)
    : dim_(static_cast<int>(coords.size())) {
  check_dimension(dim_);
  std::copy(coords.begin(), coords.end(), c_.begin());
}

LatticePoint LatticePoint::unit(int dim, int axis, int sign) {
  LatticePoint p(dim);
  if (axis < 0 || axis >= dim) throw DomainError("unit vector axis out of range");
  p.c_[axis] = sign >= 0 ? 1 : -1;
  return p;
}

std::int64_t LatticePoint::norm2() const {
  std::int64_t s = 0;
  for (int i = 0; i < dim_; ++i) s += c_[i] * c_[i];
  return s;
}

double LatticePoint::norm() const { return std::sqrt(static_cast<double>(norm2())); }

LatticePoint& LatticePoint::operator+=(const LatticePoint& o) {
  for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
  return *this;
}

LatticePoint& LatticePoint::operator-=(const LatticePoint& o) {
  for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
  return *this;
}

LatticePoint LatticePoint::operator-() const {
  LatticePoint p(*this);
  for (int i = 0; i < dim_; ++i) p.c_[i] = -p.c_[i];
  return p;
}

bool operator==(const LatticePoint& a, const LatticePoint& b) {
  return a.dim_ == b.dim_ && std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
}

std::string LatticePoint::to_string() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << c_[i];
  os << ')';
  return os.str();
}

std::uint64_t hash_coords(const std::int64_t* c, int dim) {
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(dim);
  for (int i = 0; i < dim; ++i) {
    h ^= static_cast<std::uint64_t>(c[i]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 0xbf58476d1ce4e5b9ull;
  }
  h ^= h >> 31;
  return h;
}

std::size_t LatticePointHash::operator()(const LatticePoint& p) const {
  return hash_coords(p.data(), p.dim());
}

// ---------------------------------------------------------------------------
// SiteIndex

SiteIndex::SiteIndex(int dim) : dim_(dim) {
  lo_.fill(std::numeric_limits<std::int64_t>::max());
  hi_.fill(std::numeric_limits<std::int64_t>::min());
}

void SiteIndex::reserve(std::size_t n) {
  coords_.reserve(n * dim_);
  while (slots_.size() < 2 * n) grow();
}

std::size_t SiteIndex::probe(const std::int64_t* c, std::uint64_t h) const {
  std::size_t s = h & mask_;
  while (true) {
    const std::uint32_t v = slots_[s];
    if (v == 0) return s;
    const std::int64_t* p = coords_.data() + static_cast<std::size_t>(v - 1) * dim_;
    if (std::equal(p, p + dim_, c)) return s;
    s = (s + 1) & mask_;
  }
}

void SiteIndex::grow() {
  const std::size_t cap = slots_.empty() ? 16 : slots_.size() * 2;
  slots_.assign(cap, 0);
  mask_ = cap - 1;
  for (std::size_t id = 0; id < count_; ++id) {
    const std::int64_t* p = coords_.data() + id * dim_;
    slots_[probe(p, hash_coords(p, dim_))] = static_cast<std::uint32_t>(id + 1);
  }
}

std::pair<std::size_t, bool> SiteIndex::insert(const std::int64_t* c) {
  if (2 * (count_ + 1) > slots_.size()) grow();
  const std::size_t s = probe(c, hash_coords(c, dim_));
  if (slots_[s] != 0) return {slots_[s] - 1, false};
  coords_.insert(coords_.end(), c, c + dim_);
  slots_[s] = static_cast<std::uint32_t>(++count_);
  for (int k = 0; k < dim_; ++k) {
    lo_[k] = std::min(lo_[k], c[k]);
    hi_[k] = std::max(hi_[k], c[k]);
  }
  return {count_ - 1, true};
}

std::size_t SiteIndex::find(const std::int64_t* c) const {
  if (count_ == 0) return npos;
  const std::uint32_t v = slots_[probe(c, hash_coords(c, dim_))];
  return v == 0 ? npos : v - 1;
}

LatticePoint SiteIndex::point(std::size_t id) const {
  return LatticePoint(std::span<const std::int64_t>(coords(id), static_cast<std::size_t>(dim_)));
}

// ---------------------------------------------------------------------------
// SiteSet / SiteCounts

SiteSet::SiteSet(int dim, std::span<const LatticePoint> points) : index_(dim) {
  for (const auto& p : points) {
    if (p.dim() != dim) throw ConfigError("point dimension mismatch in SiteSet");
    index_.insert(p.data());
  }
}

std::vector<LatticePoint> SiteSet::points() const {
  std::vector<LatticePoint> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(point(i));
  return out;
}

double SiteSet::diameter() const {
  std::int64_t best = 0;
  const int d = dim();
  for (std::size_t i = 0; i < size(); ++i) {
    const std::int64_t* a = coords(i);
    for (std::size_t j = i + 1; j < size(); ++j) {
      const std::int64_t* b = coords(j);
      std::int64_t s = 0;
      for (int k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
      best = std::max(best, s);
    }
  }
  return std::sqrt(static_cast<double>(best));
}

double SiteSet::radius_about(const LatticePoint& c) const {
  std::int64_t best = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    const std::int64_t* a = coords(i);
    std::int64_t s = 0;
    for (int k = 0; k < dim(); ++k) s += (a[k] - c[k]) * (a[k] - c[k]);
    best = std::max(best, s);
  }
  return std::sqrt(static_cast<double>(best));
}

SiteSet SiteSet::translated(const LatticePoint& z) const {
  SiteSet out(dim());
  for (std::size_t i = 0; i < size(); ++i) out.insert(point(i) + z);
  return out;
}

void SiteCounts::add(const std::int64_t* c, std::uint64_t k) {
  const auto [id, inserted] = index_.insert(c);
  if (inserted) counts_.push_back(0);
  counts_[id] += k;
}

std::uint64_t SiteCounts::count(const std::int64_t* c) const {
  const std::size_t id = index_.find(c);
  return id == SiteIndex::npos ? 0 : counts_[id];
}

std::uint64_t SiteCounts::total() const {
  std::uint64_t t = 0;
  for (auto v : counts_) t += v;
  return t;
}

// ---------------------------------------------------------------------------
// Walks

namespace {

std::vector<std::uint8_t> sample_steps(int dim, std::int64_t n, RandomStream& rng) {
  std::vector<std::uint8_t> steps(static_cast<std::size_t>(n));
  const auto two_d = static_cast<std::uint32_t>(2 * dim);
  for (auto& s : steps) s = static_cast<std::uint8_t>(rng.below32(two_d));
  return steps;
}

}  // namespace

WalkPath::WalkPath(LatticePoint start, std::vector<std::uint8_t> steps)
    : start_(std::move(start)), steps_(std::move(steps)) {
  const int d = start_.dim();
  pos_.resize((steps_.size() + 1) * d);
  std::copy(start_.data(), start_.data() + d, pos_.begin());
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    if (steps_[k] >= 2 * d) throw ConfigError("step code out of range");
    std::copy(pos_.begin() + k * d, pos_.begin() + (k + 1) * d, pos_.begin() + (k + 1) * d);
    apply_step(pos_.data() + (k + 1) * d, steps_[k]);
  }
}

LatticePoint WalkPath::position(std::size_t k) const {
  if (k > steps_.size()) throw DomainError("walk index out of range");
  return LatticePoint(std::span<const std::int64_t>(position_data(k), static_cast<std::size_t>(dim())));
}

TwoSidedWalk::TwoSidedWalk(int dim, std::vector<std::uint8_t> left_steps,
                           std::vector<std::uint8_t> right_steps)
    : dim_(dim), left_steps_(std::move(left_steps)), right_steps_(std::move(right_steps)) {
  check_dimension(dim);
  const std::size_t l = left_steps_.size();
  pos_.assign((size()) * dim_, 0);
  // X_{-(k+1)} = X_{-k} + left_steps[k]; X_{k+1} = X_k + right_steps[k].
  for (std::size_t k = 0; k < l; ++k) {
    std::int64_t* dst = pos_.data() + (l - k - 1) * dim_;
    std::copy(dst + dim_, dst + 2 * dim_, dst);
    apply_step(dst, left_steps_[k]);
  }
  for (std::size_t k = 0; k < right_steps_.size(); ++k) {
    std::int64_t* dst = pos_.data() + (l + k + 1) * dim_;
    std::copy(dst - dim_, dst, dst);
    apply_step(dst, right_steps_[k]);
  }
}

LatticePoint TwoSidedWalk::position(std::int64_t j) const {
  if (j < -left_len() || j > right_len()) throw DomainError("two-sided walk index out of range");
  return LatticePoint(std::span<const std::int64_t>(position_data(j), static_cast<std::size_t>(dim_)));
}

double TwoSidedWalk::max_displacement() const {
  std::int64_t best = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    const std::int64_t* p = pos_.data() + i * dim_;
    std::int64_t s = 0;
    for (int k = 0; k < dim_; ++k) s += p[k] * p[k];
    best = std::max(best, s);
  }
  return std::sqrt(static_cast<double>(best));
}

std::int64_t sample_geometric(double p, RandomStream& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("geometric parameter must lie in (0, 1]");
  if (p == 1.0) return 0;
  // uniform() is never 0, so log(u) is finite.
  return static_cast<std::int64_t>(std::floor(std::log(rng.uniform()) / std::log1p(-p)));
}

WalkPath sample_walk(int dim, std::int64_t n, RandomStream& rng) {
  check_dimension(dim);
  if (n < 0) throw ConfigError("walk length must be non-negative");
  return WalkPath(LatticePoint::origin(dim), sample_steps(dim, n, rng));
}

TwoSidedWalk sample_two_sided_fixed(int dim, std::int64_t left, std::int64_t right,
                                    RandomStream& rng) {
  check_dimension(dim);
  if (left < 0 || right < 0) throw ConfigError("branch lengths must be non-negative");
  RandomStream ls = rng.split(0);
  RandomStream rs = rng.split(1);
  auto l = sample_steps(dim, left, ls);
  auto r = sample_steps(dim, right, rs);
  return TwoSidedWalk(dim, std::move(l), std::move(r));
}

TwoSidedWalk sample_two_sided(int dim, std::int64_t n, RandomStream& rng) {
  check_dimension(dim);
  if (n < 1) throw ConfigError("kill parameter n must be >= 1");
  RandomStream ls = rng.split(0);
  RandomStream rs = rng.split(1);
  const double p = 1.0 / static_cast<double>(n);
  const std::int64_t l = sample_geometric(p, ls);
  const std::int64_t r = sample_geometric(p, rs);
  auto left = sample_steps(dim, l, ls);
  auto right = sample_steps(dim, r, rs);
  return TwoSidedWalk(dim, std::move(left), std::move(right));
}

SiteSet range_window(const WalkPath& walk, std::int64_t a, std::int64_t b) {
  if (a > b || a < 0 || b > static_cast<std::int64_t>(walk.num_steps()))
    throw DomainError("range window out of walk domain");
  SiteSet out(walk.dim());
  for (std::int64_t k = a; k <= b; ++k) out.insert(walk.position_data(static_cast<std::size_t>(k)));
  return out;
}

SiteSet range_window(const TwoSidedWalk& walk, std::int64_t a, std::int64_t b) {
  if (a > b || a < -walk.left_len() || b > walk.right_len())
    throw DomainError("range window out of walk domain");
  SiteSet out(walk.dim());
  for (std::int64_t k = a; k <= b; ++k) out.insert(walk.position_data(k));
  return out;
}

SiteSet lattice_ball(const LatticePoint& center, double radius) {
  const int d = center.dim();
  SiteSet out(d);
  if (radius < 0) return out;
  const auto r = static_cast<std::int64_t>(std::floor(radius));
  const double r2 = radius * radius;
  std::array<std::int64_t, kMaxDim> x{};
  // Odometer over the cube [-r, r]^d, pruning on partial norms.
  std::function<void(int, std::int64_t)> rec = [&](int k, std::int64_t partial) {
    if (k == d) {
      std::array<std::int64_t, kMaxDim> p{};
      for (int i = 0; i < d; ++i) p[i] = center[i] + x[i];
      out.insert(p.data());
      return;
    }
    for (std::int64_t v = -r; v <= r; ++v) {
      const std::int64_t s = partial + v * v;
      if (static_cast<double>(s) > r2 + 1e-9) continue;
      x[k] = v;
      rec(k + 1, s);
    }
  };
  rec(0, 0);
  return out;
}

}  // namespace bcap
