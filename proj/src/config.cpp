#include "bcap/config.hpp"

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "bcap/error.hpp"

namespace bcap {

namespace {

using nlohmann::json;

json to_json_object(const SimConfig& c) {
  json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  j["d"] = c.d;
  j["n"] = c.n;
  j["n_list"] = c.n_list;
  j["samples"] = c.samples;
  j["per_point_samples"] = c.per_point_samples;
  j["law"] = c.law;
  j["radius_factor"] = c.radius_factor;
  j["min_radius"] = c.min_radius;
  j["tube_alpha"] = c.tube_alpha;
  j["node_cap"] = c.node_cap;
  j["table"] = c.table;
  j["table_dir"] = c.table_dir;
  j["format"] = c.format;
  j["green_radius"] = c.green_radius;
  j["green_solve_radius"] = c.green_solve_radius;
  j["green_tol"] = c.green_tol;
  j["tree_radius"] = c.tree_radius;
  j["set"] = c.set;
  j["mode"] = c.mode;
  j["x_far"] = c.x_far;
  j["energy_tol"] = c.energy_tol;
  j["max_iters"] = c.max_iters;
  j["pilot"] = c.pilot;
  j["rel_stderr"] = c.rel_stderr;
  j["max_samples"] = c.max_samples;
  return j;
}

template <class T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

std::string config_echo(const SimConfig& c) { return to_json_object(c).dump(); }

void apply_config_file(SimConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  json known = to_json_object(c);
  known["workers"] = c.workers;
  known["out"] = c.out;
  for (const auto& item : j.items())
    if (!known.contains(item.key())) throw ConfigError("unknown config key: " + item.key());
  try {
    take(j, "command", c.command);
    take(j, "seed", c.seed);
    take(j, "d", c.d);
    take(j, "n", c.n);
    take(j, "n_list", c.n_list);
    take(j, "samples", c.samples);
    take(j, "per_point_samples", c.per_point_samples);
    take(j, "law", c.law);
    take(j, "radius_factor", c.radius_factor);
    take(j, "min_radius", c.min_radius);
    take(j, "tube_alpha", c.tube_alpha);
    take(j, "node_cap", c.node_cap);
    take(j, "workers", c.workers);
    take(j, "table", c.table);
    take(j, "table_dir", c.table_dir);
    take(j, "out", c.out);
    take(j, "format", c.format);
    take(j, "green_radius", c.green_radius);
    take(j, "green_solve_radius", c.green_solve_radius);
    take(j, "green_tol", c.green_tol);
    take(j, "tree_radius", c.tree_radius);
    take(j, "set", c.set);
    take(j, "mode", c.mode);
    take(j, "x_far", c.x_far);
    take(j, "energy_tol", c.energy_tol);
    take(j, "max_iters", c.max_iters);
    take(j, "pilot", c.pilot);
    take(j, "rel_stderr", c.rel_stderr);
    take(j, "max_samples", c.max_samples);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
}

std::vector<std::int64_t> parse_int_list(const std::string& s) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) throw ConfigError("empty entry in list: " + s);
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      const auto caret = tok.find('^');
      if (caret != std::string::npos) {
        const std::int64_t base = std::stoll(tok.substr(0, caret), &used);
        if (used != caret) throw ConfigError("bad list entry: " + tok);
        const std::string ex = tok.substr(caret + 1);
        const std::int64_t e = std::stoll(ex, &used);
        if (used != ex.size() || e < 0 || e > 62) throw ConfigError("bad list entry: " + tok);
        v = 1;
        for (std::int64_t i = 0; i < e; ++i) {
          if (base != 0 && std::abs(v) > std::numeric_limits<std::int64_t>::max() / std::abs(base))
            throw ConfigError("list entry overflows: " + tok);
          v *= base;
        }
      } else {
        v = std::stoll(tok, &used);
        if (used != tok.size()) throw ConfigError("bad list entry: " + tok);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad list entry: " + tok);
    }
    if (v < 0) throw ConfigError("list entries must be >= 0: " + tok);
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

LatticePoint parse_point(const std::string& s, int d) {
  std::string t = s;
  for (char& ch : t)
    if (ch == ',') ch = ' ';
  std::istringstream is(t);
  LatticePoint p(d);
  for (int k = 0; k < d; ++k)
    if (!(is >> p[k])) throw ConfigError("point needs " + std::to_string(d) + " integer coordinates: " + s);
  std::string rest;
  if (is >> rest) throw ConfigError("trailing text in point: " + s);
  return p;
}

SiteSet parse_site_set(const std::string& spec, int d) {
  check_dimension(d);
  if (spec.rfind("ball:", 0) == 0) {
    double r = 0;
    try {
      r = std::stod(spec.substr(5));
    } catch (const std::logic_error&) {
      throw ConfigError("bad ball radius: " + spec);
    }
    if (!(r >= 0)) throw ConfigError("ball radius must be >= 0");
    return lattice_ball(LatticePoint::origin(d), r);
  }
  SiteSet A(d);
  if (spec.rfind("points:", 0) == 0) {
    std::stringstream ss(spec.substr(7));
    std::string tok;
    while (std::getline(ss, tok, ';'))
      if (!tok.empty()) A.insert(parse_point(tok, d));
  } else {
    std::ifstream in(spec);
    if (!in) throw ConfigError("cannot open set file: " + spec);
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      A.insert(parse_point(line, d));
    }
  }
  if (A.empty()) throw ConfigError("set specification yields an empty set: " + spec);
  return A;
}

}  // namespace bcap
