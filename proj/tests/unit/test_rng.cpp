#include <doctest.h>

#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "bcap/rng.hpp"

using namespace bcap;

TEST_SUITE("rng") {
  TEST_CASE("philox known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    CHECK(philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  }

  TEST_CASE("streams are reproducible and splits differ") {
    RandomStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
    const RandomStream root(7);
    std::set<std::uint64_t> keys;
    for (std::uint64_t i = 0; i < 1000; ++i) keys.insert(root.split(i).key());
    CHECK(keys.size() == 1000);
    RandomStream c = root.split(3), d = root.split(3);
    CHECK(c() == d());
    CHECK(root.split(1).split(2).key() != root.split(2).split(1).key());
  }

  TEST_CASE("below32 is uniform on a small range") {
    RandomStream r(11);
    constexpr int n = 12, draws = 120000;
    std::vector<int> counts(n, 0);
    for (int i = 0; i < draws; ++i) ++counts[r.below32(n)];
    double chi2 = 0;
    const double e = static_cast<double>(draws) / n;
    for (int c : counts) chi2 += (c - e) * (c - e) / e;
    // 11 degrees of freedom; 0.999 quantile is about 31.3.
    CHECK(chi2 < 31.3);
  }

  TEST_CASE("below and uniform stay in range") {
    RandomStream r(5);
    for (int i = 0; i < 10000; ++i) {
      CHECK(r.below(3) < 3);
      const double u = r.uniform();
      CHECK(u > 0.0);
      CHECK(u < 1.0);
      const double v = r.uniform32();
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
    double s = 0;
    for (int i = 0; i < 100000; ++i) s += r.uniform();
    CHECK(std::abs(s / 100000 - 0.5) < 4 * std::sqrt(1.0 / 12 / 100000));
  }
}
