#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>

#include "bcap/error.hpp"
#include "bcap/green.hpp"
#include "oracle/green_integral.hpp"

using namespace bcap;

namespace {

const GreenTable& small_table(int d) {
  static std::map<int, GreenTable> cache;
  auto it = cache.find(d);
  if (it == cache.end()) {
    GreenBuildOptions o;
    o.d = d;
    o.radius = 5;
    it = cache.emplace(d, GreenTable::build(o)).first;
  }
  return it->second;
}

std::vector<std::int64_t> padded(std::vector<std::int64_t> z, int d) {
  z.resize(static_cast<std::size_t>(d), 0);
  return z;
}

}  // namespace

TEST_SUITE("green") {
  TEST_CASE("table matches the Bessel-integral oracle") {
    for (int d : {5, 6, 7}) {
      const GreenTable& t = small_table(d);
      for (const auto& z0 : std::vector<std::vector<std::int64_t>>{{0}, {1}, {-2, 1}, {3, 2, 1}, {0, 4, 0, -3}}) {
        const auto z = padded(z0, d);
        const LatticePoint p{std::span<const std::int64_t>(z)};
        INFO("d=" << d << " z=" << p.to_string());
        CHECK(std::abs(t.g(p) / oracle::g(z) - 1) < 1e-7);
        CHECK(std::abs(t.G(p) - oracle::G(z)) <= t.tail_bound());
      }
    }
  }

  TEST_CASE("g is the Green function of the walk: (I - P) g = delta") {
    const GreenTable& t = small_table(6);
    const int d = 6;
    for (const auto& z0 : std::vector<std::vector<std::int64_t>>{{0}, {1}, {2, 1}, {2, 2, 1}}) {
      auto z = padded(z0, d);
      double avg_g = 0, avg_G = 0;
      for (unsigned code = 0; code < 2u * d; ++code) {
        auto y = z;
        apply_step(y.data(), code);
        avg_g += t.g(y.data()) / (2 * d);
        avg_G += t.G(y.data()) / (2 * d);
      }
      const double delta = z0 == std::vector<std::int64_t>{0} ? 1.0 : 0.0;
      CHECK(t.g(z.data()) - avg_g == doctest::Approx(delta).epsilon(1e-8));
      // (I - P) G = g.
      CHECK(t.G(z.data()) - avg_G == doctest::Approx(t.g(z.data())).epsilon(1e-5));
    }
  }

  TEST_CASE("lookups are invariant under the symmetry group") {
    const GreenTable& t = small_table(5);
    const LatticePoint a{3, -1, 0, 2, 0}, b{0, 2, 1, 0, -3};
    CHECK(t.g(a) == t.g(b));
    CHECK(t.G(a) == t.G(b));
    CHECK(t.g_diff(a.data(), b.data()) == t.g_diff(b.data(), a.data()));
  }

  TEST_CASE("orbit sizes partition the stored ball") {
    const GreenTable& t = small_table(5);
    double total = 0;
    for (std::size_t i = 0; i < t.orbit_count(); ++i) total += orbit_size(t.representative(i).data(), 5);
    CHECK(total == doctest::Approx(static_cast<double>(lattice_ball(LatticePoint::origin(5), 5).size())));
  }

  TEST_CASE("values outside the table use the asymptotic forms") {
    const GreenTable& t = small_table(6);
    const LatticePoint far{40, 3, 0, 0, 0, 0};
    CHECK_FALSE(t.in_table(far));
    CHECK(t.g(far) == doctest::Approx(asymptotic_g(6, far)));
    CHECK(t.G(far) == doctest::Approx(asymptotic_G(6, far)));
    const auto c = AsymptoticConstants::for_dim(6);
    CHECK(c.a_d == doctest::Approx(3 / std::pow(std::numbers::pi, 3)));
    CHECK(c.green_c_d == doctest::Approx(9 / std::pow(std::numbers::pi, 3)));
  }

  TEST_CASE("save and load round-trip bit-exactly") {
    const GreenTable& t = small_table(7);
    const auto path = std::filesystem::temp_directory_path() / "bcap_unit_green.tbl";
    t.save(path);
    const GreenTable u = GreenTable::load(path);
    CHECK(u == t);
    for (std::size_t i = 0; i < t.orbit_count(); ++i) {
      CHECK(u.g_at(i) == t.g_at(i));
      CHECK(u.G_at(i) == t.G_at(i));
    }
    CHECK_THROWS_AS(GreenTable::load(std::filesystem::temp_directory_path() / "bcap_missing.tbl"), ConfigError);
  }

  TEST_CASE("an unreachable tolerance is reported as a configuration error") {
    GreenBuildOptions o;
    o.d = 6;
    o.radius = 4;
    o.max_iters = 3;
    o.rel_tol = 1e-14;
    CHECK_THROWS_AS(GreenTable::build(o), ConfigError);
  }

  TEST_CASE("the gradient bound holds inside the table") {
    const GreenTable& t = small_table(6);
    CHECK(gradient_ratio_check(t, LatticePoint{4, 0, 0, 0, 0, 0}, LatticePoint{1, 0, 0, 0, 0, 0}) < 4.0);
  }
}
