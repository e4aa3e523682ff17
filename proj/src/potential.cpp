#include "bcap/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "bcap/error.hpp"

namespace bcap {

GreenPotential::GreenPotential(int dim, std::vector<std::int64_t> coords, std::vector<double> weights,
                               const GreenTable& table, double theta, double min_far, int leaf_size)
    : d_(dim),
      coords_(std::move(coords)),
      weights_(std::move(weights)),
      table_(&table),
      theta_(theta),
      min_far_(min_far),
      leaf_size_(std::max(1, leaf_size)),
      a_d_(AsymptoticConstants::for_dim(dim).a_d) {
  if (table.dim() != dim) throw ConfigError("potential: table dimension mismatch");
  if (coords_.size() != weights_.size() * static_cast<std::size_t>(dim))
    throw ConfigError("potential: coordinate/weight size mismatch");
  if (!(theta > 0 && theta < 1)) throw ConfigError("potential: theta must lie in (0, 1)");
  if (!weights_.empty()) build(0, static_cast<std::uint32_t>(weights_.size()));
}

double GreenPotential::total_weight() const {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

int GreenPotential::build(std::uint32_t begin, std::uint32_t end) {
  // perm_ holds original indices; coordinates are permuted once at the top.
  const bool top = nodes_.empty();
  if (top) {
    perm_.resize(weights_.size());
    std::iota(perm_.begin(), perm_.end(), 0u);
  }
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  const std::size_t mom = centroid_.size() / d_;
  centroid_.resize(centroid_.size() + d_, 0.0);
  quad_.resize(quad_.size() + static_cast<std::size_t>(d_) * d_, 0.0);
  double* c = centroid_.data() + mom * d_;
  double* q = quad_.data() + mom * d_ * d_;
  const auto at = [&](std::uint32_t i, int k) { return coords_[static_cast<std::size_t>(perm_[i]) * d_ + k]; };

  double w = 0;
  std::array<std::int64_t, kMaxDim> lo{}, hi{};
  for (int k = 0; k < d_; ++k) lo[k] = hi[k] = at(begin, k);
  for (std::uint32_t i = begin; i < end; ++i) {
    const double wi = weights_[perm_[i]];
    w += wi;
    for (int k = 0; k < d_; ++k) {
      const std::int64_t x = at(i, k);
      c[k] += wi * static_cast<double>(x);
      lo[k] = std::min(lo[k], x);
      hi[k] = std::max(hi[k], x);
    }
  }
  if (w != 0)
    for (int k = 0; k < d_; ++k) c[k] /= w;
  double rad2 = 0;
  for (std::uint32_t i = begin; i < end; ++i) {
    const double wi = weights_[perm_[i]];
    double r2 = 0;
    std::array<double, kMaxDim> dx{};
    for (int k = 0; k < d_; ++k) {
      dx[k] = static_cast<double>(at(i, k)) - c[k];
      r2 += dx[k] * dx[k];
    }
    rad2 = std::max(rad2, r2);
    for (int a = 0; a < d_; ++a)
      for (int b = 0; b < d_; ++b) q[a * d_ + b] += wi * dx[a] * dx[b];
  }
  {
    Node& n = nodes_[id];
    n.begin = begin;
    n.end = end;
    n.weight = w;
    n.radius = std::sqrt(rad2);
    n.moment = static_cast<std::uint32_t>(mom);
  }
  if (end - begin > static_cast<std::uint32_t>(leaf_size_)) {
    // Split on the axis of largest extent at the median.
    int axis = 0;
    for (int k = 1; k < d_; ++k)
      if (hi[k] - lo[k] > hi[axis] - lo[axis]) axis = k;
    const std::uint32_t mid = (end - begin) / 2;
    std::nth_element(perm_.begin() + begin, perm_.begin() + begin + mid, perm_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       const auto va = coords_[static_cast<std::size_t>(a) * d_ + axis];
                       const auto vb = coords_[static_cast<std::size_t>(b) * d_ + axis];
                       return va != vb ? va < vb : a < b;
                     });
    const int l = build(begin, begin + mid);
    const int r = build(begin + mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
  }
  if (top) {
    std::vector<std::int64_t> nc(coords_.size());
    std::vector<double> nw(weights_.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) {
      std::copy_n(coords_.begin() + static_cast<std::size_t>(perm_[i]) * d_, d_, nc.begin() + i * d_);
      nw[i] = weights_[perm_[i]];
    }
    coords_ = std::move(nc);
    weights_ = std::move(nw);
    perm_.clear();
    perm_.shrink_to_fit();
  }
  return id;
}

double GreenPotential::eval(int id, const std::int64_t* y) const {
  const Node& n = nodes_[id];
  const double* c = centroid_.data() + static_cast<std::size_t>(n.moment) * d_;
  std::array<double, kMaxDim> r{};
  double R2 = 0;
  for (int k = 0; k < d_; ++k) {
    r[k] = static_cast<double>(y[k]) - c[k];
    R2 += r[k] * r[k];
  }
  const double R = std::sqrt(R2);
  if (R >= min_far_ && n.radius <= theta_ * R) {
    const double* q = quad_.data() + static_cast<std::size_t>(n.moment) * d_ * d_;
    double rqr = 0, trq = 0;
    for (int a = 0; a < d_; ++a) {
      trq += q[a * d_ + a];
      double s = 0;
      for (int b = 0; b < d_; ++b) s += q[a * d_ + b] * r[b];
      rqr += r[a] * s;
    }
    const double p = d_ - 2;
    double rp = 1.0 / R2;
    for (int i = 1; i < (d_ - 2) / 2; ++i) rp /= R2;
    if (d_ % 2) rp /= R;
    return a_d_ * rp * (n.weight + 0.5 * p * (p + 2) * rqr / (R2 * R2) - 0.5 * p * trq / R2);
  }
  if (n.left < 0) {
    double s = 0;
    for (std::uint32_t i = n.begin; i < n.end; ++i)
      s += weights_[i] * table_->g_diff(y, coords_.data() + static_cast<std::size_t>(i) * d_);
    return s;
  }
  return eval(n.left, y) + eval(n.right, y);
}

double GreenPotential::g_sum(const std::int64_t* y) const {
  if (nodes_.empty()) return 0.0;
  return eval(0, y);
}

double GreenPotential::direct_g_sum(const std::int64_t* y) const {
  double s = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * table_->g_diff(y, coords_.data() + i * d_);
  return s;
}

double GreenPotential::direct_G_sum(const std::int64_t* y) const {
  double s = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * table_->G_diff(y, coords_.data() + i * d_);
  return s;
}

}  // namespace bcap
