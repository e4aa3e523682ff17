#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bcap/lattice.hpp"

namespace bcap {

/// Every parameter a subcommand can read.
struct SimConfig {
  std::string command;
  std::uint64_t seed = 1;
  int d = 6;
  std::int64_t n = 50;
  std::vector<std::int64_t> n_list;
  std::int64_t samples = 10000;
  std::int64_t per_point_samples = 2000;
  std::string law = "builtin:binary";

  double radius_factor = 4.0;
  double min_radius = 16.0;
  double tube_alpha = 0.0;
  std::int64_t node_cap = 1'000'000;
  int workers = 1;

  std::string table;
  std::string table_dir = "green_cache";
  std::string out;
  std::string format = "csv";

  int green_radius = 12;
  int green_solve_radius = 0;
  double green_tol = 1e-10;

  double tree_radius = 8.0;

  std::string set = "ball:2";
  std::string mode = "exact";
  std::string x_far;
  double energy_tol = 1e-8;
  int max_iters = 100000;

  std::int64_t pilot = 1000;
  double rel_stderr = 0.05;
  std::int64_t max_samples = 200000;
};

/// JSON text of the configuration, keys sorted. `workers` and `out` are
/// omitted: neither changes the results.
std::string config_echo(const SimConfig& c);

/// Overwrites fields present in a JSON object file (same keys as the echo,
/// plus "workers" and "out"). Unknown keys are rejected.
void apply_config_file(SimConfig& c, const std::filesystem::path& path);

/// "2^8,300,2^10" style lists; every entry must be >= 0.
std::vector<std::int64_t> parse_int_list(const std::string& s);

/// Set specifications: "ball:R" (lattice ball about the origin),
/// "points:x1 .. xd;y1 .. yd;..." or a path to a file with one point per
/// line ('#' comments allowed).
SiteSet parse_site_set(const std::string& spec, int d);

LatticePoint parse_point(const std::string& s, int d);

}  // namespace bcap
