#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "bcap/config.hpp"
#include "bcap/error.hpp"
#include "bcap/potential.hpp"
#include "bcap/stats.hpp"

using namespace bcap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "bcap_unit";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("integer lists accept powers") {
    CHECK(parse_int_list("2^8,300") == std::vector<std::int64_t>{256, 300});
    CHECK(parse_int_list("10^5") == std::vector<std::int64_t>{100000});
    CHECK(parse_int_list("0") == std::vector<std::int64_t>{0});
    for (const char* bad : {"", "1,,2", "-3", "2^", "2^x", "abc", "3.5", "10^62", "2^-1"})
      CHECK_THROWS_AS(parse_int_list(bad), ConfigError);
  }

  TEST_CASE("echo round-trips through a config file") {
    SimConfig c;
    c.command = "sweep";
    c.seed = 99;
    c.d = 7;
    c.n_list = {256, 1024};
    c.radius_factor = 6.5;
    c.set = "points:1 0 0 0 0 0 0";
    c.workers = 4;
    c.out = "x.csv";
    const std::string echo = config_echo(c);
    const auto j = nlohmann::json::parse(echo);
    CHECK(!j.contains("workers"));
    CHECK(!j.contains("out"));
    const fs::path p = scratch("echo.json");
    write_text(p, echo);
    SimConfig back;
    apply_config_file(back, p);
    CHECK(config_echo(back) == echo);
    CHECK(back.workers == 1);

    SimConfig other = c;
    other.workers = 1;
    other.out.clear();
    CHECK(config_echo(other) == echo);
  }

  TEST_CASE("config files may set workers and out but nothing unknown") {
    const fs::path ok = scratch("ok.json");
    write_text(ok, R"({"workers": 3, "out": "o.csv", "d": 5})");
    SimConfig c;
    apply_config_file(c, ok);
    CHECK(c.workers == 3);
    CHECK(c.out == "o.csv");
    CHECK(c.d == 5);
    const fs::path bad = scratch("bad.json");
    write_text(bad, R"({"dimension": 5})");
    CHECK_THROWS_AS(apply_config_file(c, bad), ConfigError);
    write_text(bad, "{not json");
    CHECK_THROWS_AS(apply_config_file(c, bad), ConfigError);
    CHECK_THROWS_AS(apply_config_file(c, scratch("missing.json")), ConfigError);
  }

  TEST_CASE("site sets from balls, point lists and files") {
    CHECK(parse_site_set("ball:1", 6).size() == 13);
    CHECK(parse_site_set("ball:0", 5).size() == 1);
    const SiteSet pts = parse_site_set("points:1 0 0 0 0;0,0,0,0,0;1 0 0 0 0", 5);
    CHECK(pts.size() == 2);
    CHECK(pts.contains(LatticePoint{1, 0, 0, 0, 0}));
    const fs::path f = scratch("set.txt");
    write_text(f, "# two points\n0 0 0 0 0 0\n\n2 -1 0 0 0 3  # trailing comment\n");
    const SiteSet fromfile = parse_site_set(f.string(), 6);
    CHECK(fromfile.size() == 2);
    CHECK(fromfile.contains(LatticePoint{2, -1, 0, 0, 0, 3}));
    CHECK_THROWS_AS(parse_site_set("ball:x", 6), ConfigError);
    CHECK_THROWS_AS(parse_site_set("ball:-1", 6), ConfigError);
    CHECK_THROWS_AS(parse_site_set("points:1 2", 6), ConfigError);
    CHECK_THROWS_AS(parse_site_set("points:", 6), ConfigError);
    CHECK_THROWS_AS(parse_site_set(scratch("nope.txt").string(), 6), ConfigError);
    CHECK(parse_point("3,-4,5", 3) == LatticePoint{3, -4, 5});
    CHECK_THROWS_AS(parse_point("1 2 3 4", 3), ConfigError);
  }
}

TEST_SUITE("stats") {
  TEST_CASE("pairwise sums are accurate and order-fixed") {
    std::vector<double> xs(100000, 0.1);
    CHECK(std::abs(pairwise_sum(xs) - 10000.0) < 1e-9);
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
    std::vector<double> ys{1e16, 1.0, -1e16, 1.0};
    CHECK(pairwise_sum(ys) == pairwise_sum(ys));
  }

  TEST_CASE("summarize matches textbook formulas") {
    const std::vector<double> xs{1, 2, 3, 4, 10};
    const McEstimate e = summarize(xs);
    CHECK(e.mean == doctest::Approx(4.0));
    CHECK(e.variance == doctest::Approx(12.5));
    CHECK(e.stderr == doctest::Approx(std::sqrt(12.5 / 5)));
    CHECK(e.samples == 5);
    const McEstimate one = summarize(std::vector<double>{7});
    CHECK(one.mean == 7);
    CHECK(one.stderr == 0);
    CHECK(covariance(xs, xs) == doctest::Approx(e.variance));
  }

  TEST_CASE("independent sums add variances") {
    McEstimate a = McEstimate::exact(1), b = McEstimate::exact(2);
    a.stderr = 0.3;
    b.stderr = 0.4;
    a.bias_bound = 0.1;
    b.bias_bound = 0.2;
    const std::vector<McEstimate> parts{a, b};
    const McEstimate s = sum_independent(parts);
    CHECK(s.mean == doctest::Approx(3));
    CHECK(s.stderr == doctest::Approx(0.5));
    CHECK(s.bias_bound == doctest::Approx(0.3));
  }

  TEST_CASE("parallel_for covers every index once for any worker count") {
    for (int w : {1, 2, 5}) {
      std::vector<std::atomic<int>> hits(1000);
      parallel_for(1000, w, [&](std::int64_t i) { hits[static_cast<std::size_t>(i)]++; });
      for (auto& h : hits) CHECK(h.load() == 1);
      const auto sq = parallel_map<double>(100, w, [](std::int64_t i) { return double(i * i); });
      CHECK(sq[99] == 9801.0);
    }
  }

  TEST_CASE("line fits") {
    const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
    const LineFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2));
    CHECK(f.intercept == doctest::Approx(1));
    CHECK(f.rss == doctest::Approx(0).epsilon(1e-12));
    CHECK(f.slope_stderr == doctest::Approx(0).epsilon(1e-12));
    // Weighted fit ignores a wild point with huge sigma.
    const std::vector<double> x2{1, 2, 3, 4, 5}, y2{3, 5, 7, 9, 100}, s2{1, 1, 1, 1, 1e6};
    const LineFit w = fit_line_weighted(x2, y2, s2);
    CHECK(w.slope == doctest::Approx(2).epsilon(1e-6));
    const std::vector<double> noisy{3.1, 4.9, 7.2, 8.8};
    CHECK(fit_line(x, noisy).slope_stderr > 0);
  }
}

TEST_SUITE("potential") {
  TEST_CASE("multipole sum agrees with the direct sum") {
    GreenBuildOptions o;
    o.d = 6;
    o.radius = 6;
    const GreenTable t = GreenTable::build(o);
    RandomStream rng(11);
    const WalkPath w = sample_walk(6, 3000, rng);
    std::vector<std::int64_t> coords;
    std::vector<double> weights;
    for (std::size_t k = 0; k <= 3000; ++k) {
      const LatticePoint p = w.position(k);
      coords.insert(coords.end(), p.data(), p.data() + 6);
      weights.push_back(1.0 + static_cast<double>(k % 3));
    }
    const GreenPotential pot(6, coords, weights, t, 0.5, 8.0);
    CHECK(pot.size() == 3001);
    CHECK(pot.total_weight() == doctest::Approx(std::accumulate(weights.begin(), weights.end(), 0.0)));
    for (int q = 0; q < 12; ++q) {
      const LatticePoint y = w.position(static_cast<std::size_t>(q * 250));
      // Independent direct sum against the table.
      double ref = 0;
      for (std::size_t k = 0; k < weights.size(); ++k) {
        std::array<std::int64_t, 6> z{};
        for (int i = 0; i < 6; ++i) z[static_cast<std::size_t>(i)] = y[i] - coords[k * 6 + static_cast<std::size_t>(i)];
        ref += weights[k] * t.g(z.data());
      }
      CHECK(pot.direct_g_sum(y.data()) == doctest::Approx(ref).epsilon(1e-12));
      CHECK(std::abs(pot.g_sum(y.data()) - ref) <= 1e-3 * ref);
    }
  }

  TEST_CASE("small sets are summed exactly") {
    GreenBuildOptions o;
    o.d = 5;
    o.radius = 4;
    const GreenTable t = GreenTable::build(o);
    const std::vector<std::int64_t> coords{0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 2, 0, 0, 0};
    const GreenPotential pot(5, coords, {1.0, 2.0, 0.5}, t);
    const LatticePoint y{1, 1, 0, 0, 0};
    CHECK(pot.g_sum(y.data()) == doctest::Approx(pot.direct_g_sum(y.data())).epsilon(1e-14));
    const double want = t.g(LatticePoint{1, 1, 0, 0, 0}) + 2 * t.g(LatticePoint{0, 1, 0, 0, 0}) +
                        0.5 * t.g(LatticePoint{1, -1, 0, 0, 0});
    CHECK(pot.direct_g_sum(y.data()) == doctest::Approx(want).epsilon(1e-14));
    const double wantG = t.G(LatticePoint{1, 1, 0, 0, 0}) + 2 * t.G(LatticePoint{0, 1, 0, 0, 0}) +
                         0.5 * t.G(LatticePoint{1, -1, 0, 0, 0});
    CHECK(pot.direct_G_sum(y.data()) == doctest::Approx(wantG).epsilon(1e-14));
  }
}
