#pragma once

#include <cstdint>
#include <vector>

#include "bcap/green.hpp"

namespace bcap {

/// Weighted lattice point cloud with fast evaluation of
/// phi(y) = sum_j w_j g(y - x_j).
///
/// Near pairs use the table; a k-d cell whose extent is below theta times its
/// distance (and at distance >= min_far) is replaced by its monopole and
/// quadrupole moments of the asymptotic kernel.
class GreenPotential {
 public:
  GreenPotential(int dim, std::vector<std::int64_t> coords, std::vector<double> weights,
                 const GreenTable& table, double theta = 0.25, double min_far = 32.0,
                 int leaf_size = 8);

  double g_sum(const std::int64_t* y) const;
  /// Exact sum over all points (table kernel with asymptotic fallback).
  double direct_g_sum(const std::int64_t* y) const;
  /// sum_j w_j G(y - x_j), direct.
  double direct_G_sum(const std::int64_t* y) const;

  std::size_t size() const { return weights_.size(); }
  double total_weight() const;

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
    double weight = 0;
    double radius = 0;
    std::uint32_t moment = 0;  // offset into centroid_/quad_
  };
  int build(std::uint32_t begin, std::uint32_t end);
  double eval(int node, const std::int64_t* y) const;

  int d_;
  std::vector<std::int64_t> coords_;
  std::vector<double> weights_;
  const GreenTable* table_;
  double theta_, min_far_;
  int leaf_size_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> perm_;  // build scratch
  std::vector<double> centroid_;  // d per node
  std::vector<double> quad_;      // d*d per node
  double a_d_;
};

}  // namespace bcap
