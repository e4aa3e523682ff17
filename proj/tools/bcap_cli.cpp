#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <variant>

#include <CLI11.hpp>

#include "bcap/capacity.hpp"
#include "bcap/config.hpp"
#include "bcap/error.hpp"
#include "bcap/experiments.hpp"
#include "bcap/green.hpp"
#include "bcap/lawler.hpp"

#ifndef BCAP_BUILD_DESCRIBE
#define BCAP_BUILD_DESCRIBE "unknown"
#endif

using namespace bcap;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitGate = 2;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Ordered rows of (column, text) rendered as CSV or JSONL.
class Emitter {
 public:
  using Cell = std::variant<std::int64_t, double, std::string>;
  using Row = std::vector<std::pair<std::string, Cell>>;

  void add(Row r) { rows_.push_back(std::move(r)); }

  std::string render(const std::string& format, const std::string& echo) const {
    std::ostringstream os;
    if (format == "csv") {
      os << "# config " << echo << '\n';
      std::vector<std::string> header;
      for (const Row& r : rows_)
        for (const auto& [k, v] : r)
          if (std::find(header.begin(), header.end(), k) == header.end()) header.push_back(k);
      for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
      os << '\n';
      for (const Row& r : rows_) {
        for (std::size_t i = 0; i < header.size(); ++i) {
          if (i) os << ',';
          for (const auto& [k, v] : r)
            if (k == header[i]) os << text(v);
        }
        os << '\n';
      }
    } else {
      os << "{\"config\":" << echo << "}\n";
      for (const Row& r : rows_) {
        os << '{';
        for (std::size_t i = 0; i < r.size(); ++i) {
          os << (i ? "," : "") << json(r[i].first).dump() << ':';
          if (const auto* s = std::get_if<std::string>(&r[i].second))
            os << json(*s).dump();
          else
            os << text(r[i].second);
        }
        os << "}\n";
      }
    }
    return os.str();
  }

 private:
  static std::string text(const Cell& c) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&c)) return num(*d);
    return std::get<std::string>(c);
  }
  std::vector<Row> rows_;
};

struct Run {
  SimConfig cfg;
  json meta = json::object();
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const std::string& payload) {
    if (cfg.out.empty()) {
      std::cout << payload;
      return;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + cfg.out);
    f << payload;
    json m;
    m["config"] = json::parse(config_echo(cfg));
    m["build"] = BCAP_BUILD_DESCRIBE;
    m["results"] = meta;
    std::ofstream mf(cfg.out + ".meta.json", std::ios::binary);
    mf << m.dump(2) << '\n';
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream rf(cfg.out + ".run.json", std::ios::binary);
    rf << json{{"workers", cfg.workers}, {"wall_time_s", wall}}.dump() << '\n';
  }
};

OffspringLaw law_of(const SimConfig& c) { return OffspringLaw::from_spec(c.law); }

GreenTable table_of(const SimConfig& c) {
  if (!c.table.empty()) {
    if (!std::filesystem::exists(c.table)) throw ConfigError("table file not found: " + c.table);
    GreenTable t = GreenTable::load(c.table);
    if (t.dim() != c.d) throw ConfigError("table dimension does not match --d");
    return t;
  }
  GreenBuildOptions o;
  o.d = c.d;
  o.radius = c.green_radius;
  o.solve_radius = c.green_solve_radius;
  o.rel_tol = c.green_tol;
  return GreenTable::cached(c.table_dir, o);
}

void check_format(const SimConfig& c) {
  if (c.format != "csv" && c.format != "jsonl") throw ConfigError("--format must be csv or jsonl");
}

Emitter::Row estimate_row(std::int64_t n, const std::string& stat, const McEstimate& e, std::uint64_t seed) {
  return {{"n", n},           {"statistic", stat},          {"mean", e.mean},
          {"stderr", e.stderr}, {"samples", e.samples},     {"bias", e.bias_bound},
          {"seed", static_cast<std::int64_t>(seed)}};
}

json est_json(const McEstimate& e) {
  return {{"mean", e.mean}, {"stderr", e.stderr}, {"samples", e.samples}, {"bias", e.bias_bound}, {"meta", e.meta}};
}

std::string point_text(const LatticePoint& p) {
  std::string s;
  for (int k = 0; k < p.dim(); ++k) s += (k ? " " : "") + std::to_string(p[k]);
  return s;
}

// ---------------------------------------------------------------------------

int cmd_green_table(Run& run) {
  const SimConfig& c = run.cfg;
  if (c.out.empty()) throw ConfigError("green-table needs --out");
  GreenBuildOptions o;
  o.d = c.d;
  o.radius = c.green_radius;
  o.solve_radius = c.green_solve_radius;
  o.rel_tol = c.green_tol;
  const GreenTable t = GreenTable::build(o);
  t.save(c.out);
  json m{{"orbits", t.orbit_count()}, {"g0", t.g0()}, {"G0", t.G0()}, {"iterations", t.n_steps()},
         {"tail_bound", t.tail_bound()}};
  json meta;
  meta["config"] = json::parse(config_echo(c));
  meta["build"] = BCAP_BUILD_DESCRIBE;
  meta["results"] = m;
  std::ofstream(c.out + ".meta.json", std::ios::binary) << meta.dump(2) << '\n';
  std::cout << "green table d=" << t.dim() << " R=" << t.radius() << " orbits=" << t.orbit_count()
            << " g0=" << num(t.g0()) << " G0=" << num(t.G0()) << " tail_bound=" << num(t.tail_bound())
            << " -> " << c.out << '\n';
  return kExitOk;
}

CapacityOptions capacity_options(const SimConfig& c) {
  CapacityOptions o;
  o.radius_factor = c.radius_factor;
  o.min_radius = c.min_radius;
  o.node_cap = c.node_cap;
  o.workers = c.workers;
  return o;
}

int cmd_bcap(Run& run) {
  const SimConfig& c = run.cfg;
  const OffspringLaw law = law_of(c);
  const SiteSet A = parse_site_set(c.set, c.d);
  const TruncationPolicy pol = capacity_policy(A, capacity_options(c));
  const RandomStream rng(c.seed);
  Emitter em;
  McEstimate total;
  if (c.mode == "exact") {
    const EquilibriumProfile prof = estimate_bcap(A, law, pol, c.per_point_samples, rng, c.workers);
    for (std::size_t i = 0; i < A.size(); ++i) {
      const McEstimate& e = prof.e_values[i];
      em.add({{"kind", std::string("point")}, {"x", point_text(A.point(i))}, {"value", e.mean},
              {"stderr", e.stderr}, {"bias", e.bias_bound}, {"samples", e.samples}});
    }
    total = prof.bcap;
  } else if (c.mode == "sampled") {
    total = estimate_bcap_sampled(A, law, pol, c.samples, rng, c.workers);
  } else {
    throw ConfigError("--mode must be exact or sampled");
  }
  em.add({{"kind", std::string("bcap")}, {"x", std::string()}, {"value", total.mean}, {"stderr", total.stderr},
          {"bias", total.bias_bound}, {"samples", total.samples}});
  run.meta = {{"bcap", est_json(total)}, {"size", A.size()}, {"radius", pol.spine_exit_radius}};
  std::cerr << "BCap = " << num(total.mean) << " +- " << num(total.stderr) << " (bias " << num(total.bias_bound)
            << ", |A| = " << A.size() << ")\n";
  run.write(em.render(c.format, config_echo(c)));
  return kExitOk;
}

int cmd_bcap_hit(Run& run) {
  const SimConfig& c = run.cfg;
  const OffspringLaw law = law_of(c);
  const SiteSet A = parse_site_set(c.set, c.d);
  const TruncationPolicy pol = capacity_policy(A, capacity_options(c));
  LatticePoint x(c.d);
  if (c.x_far.empty())
    x[0] = 8;
  else
    x = parse_point(c.x_far, c.d);
  TruncationPolicy far = pol;
  far.spine_exit_radius = std::max(pol.spine_exit_radius, c.radius_factor * (x.norm() + A.radius_about(LatticePoint(c.d))));
  const GreenTable table = table_of(c);
  const McEstimate e = estimate_bcap_via_hitting(A, law, far, x, c.samples, &table, RandomStream(c.seed), c.workers);
  Emitter em;
  em.add({{"kind", std::string("bcap_hit")}, {"x_far", point_text(x)}, {"value", e.mean}, {"stderr", e.stderr},
          {"bias", e.bias_bound}, {"samples", e.samples}, {"meta", e.meta}});
  run.meta = {{"bcap_hit", est_json(e)}};
  std::cerr << "BCap via hitting = " << num(e.mean) << " +- " << num(e.stderr) << '\n';
  run.write(em.render(c.format, config_echo(c)));
  return kExitOk;
}

int cmd_energy(Run& run) {
  const SimConfig& c = run.cfg;
  const SiteSet A = parse_site_set(c.set, c.d);
  const GreenTable table = table_of(c);
  const EnergyResult r = energy_minimize(A, table, c.energy_tol, c.max_iters);
  Emitter em;
  for (std::size_t i = 0; i < r.points.size(); ++i)
    em.add({{"kind", std::string("weight")}, {"x", point_text(r.points[i])}, {"value", r.nu[i]}});
  em.add({{"kind", std::string("energy")}, {"x", std::string()}, {"value", r.energy}});
  em.add({{"kind", std::string("proxy")}, {"x", std::string()}, {"value", capacity_proxy(r)}});
  em.add({{"kind", std::string("fw_gap")}, {"x", std::string()}, {"value", r.fw_gap}});
  em.add({{"kind", std::string("iterations")}, {"x", std::string()}, {"value", static_cast<std::int64_t>(r.iterations)}});
  run.meta = {{"energy", r.energy}, {"proxy", capacity_proxy(r)}, {"fw_gap", r.fw_gap},
              {"iterations", r.iterations}, {"converged", r.converged}};
  std::cerr << "energy = " << num(r.energy) << " proxy = " << num(capacity_proxy(r)) << " gap = " << num(r.fw_gap)
            << (r.converged ? "" : " (not converged)") << '\n';
  run.write(em.render(c.format, config_echo(c)));
  return kExitOk;
}

LawlerOptions lawler_options(const SimConfig& c) {
  LawlerOptions o;
  o.radius_factor = c.radius_factor;
  o.node_cap = c.node_cap;
  o.workers = c.workers;
  o.tube_alpha = c.tube_alpha;
  return o;
}

int cmd_lawler_check(Run& run) {
  const SimConfig& c = run.cfg;
  const OffspringLaw law = law_of(c);
  const GreenTable table = table_of(c);
  const IdentityCheck ic = check_identity(c.n, law, table, lawler_options(c), c.samples, RandomStream(c.seed));
  Emitter em;
  em.add(estimate_row(c.n, "L_form", ic.L_form, c.seed));
  em.add(estimate_row(c.n, "U_form", ic.U_form, c.seed));
  em.add(estimate_row(c.n, "L_literal", ic.L_literal, c.seed));
  em.add(estimate_row(c.n, "U_literal", ic.U_literal, c.seed));
  em.add(estimate_row(c.n, "root_term", ic.root_term, c.seed));
  run.meta = {{"L_form", est_json(ic.L_form)},
              {"U_form", est_json(ic.U_form)},
              {"radius_factor", ic.radius_factor},
              {"rerun", ic.rerun},
              {"pass_L", ic.pass_L},
              {"pass_U", ic.pass_U},
              {"variance_ratio", ic.U_form.variance / ic.L_form.variance}};
  std::cout << "L form: " << num(ic.L_form.mean) << " +- " << num(ic.L_form.stderr) << " (bias "
            << num(ic.L_form.bias_bound) << ") " << (ic.pass_L ? "PASS" : "FAIL") << '\n'
            << "U form: " << num(ic.U_form.mean) << " +- " << num(ic.U_form.stderr) << " (bias "
            << num(ic.U_form.bias_bound) << ") " << (ic.pass_U ? "PASS" : "FAIL") << '\n';
  if (ic.rerun) std::cout << "rerun at radius factor " << num(ic.radius_factor) << '\n';
  run.write(em.render(c.format, config_echo(c)));
  return ic.pass_L && ic.pass_U ? kExitOk : kExitGate;
}

int cmd_stats(Run& run) {
  const SimConfig& c = run.cfg;
  if (c.d != 6) throw ConfigError("stats requires --d 6");
  const std::vector<std::int64_t> ns = c.n_list.empty() ? std::vector<std::int64_t>{100, 1000, 10000, 100000} : c.n_list;
  for (std::int64_t n : ns)
    if (n < 1) throw ConfigError("stats: n must be >= 1");
  const UnGnStats st = stats_un_gn(ns, law_of(c), table_of(c), lawler_options(c), c.samples, RandomStream(c.seed));
  Emitter em;
  json rows = json::array();
  for (const UnGnRow& r : st.rows) {
    em.add(estimate_row(r.n, "U_mean", r.U, c.seed));
    McEstimate v;
    v.mean = r.var_U;
    v.stderr = r.var_U_stderr;
    v.samples = r.U.samples;
    em.add(estimate_row(r.n, "U_var", v, c.seed));
    em.add(estimate_row(r.n, "G_mean", r.G, c.seed));
    McEstimate vg;
    vg.mean = r.var_G;
    vg.samples = r.G.samples;
    em.add(estimate_row(r.n, "G_var", vg, c.seed));
    em.add(estimate_row(r.n, "g_mean", r.g, c.seed));
    rows.push_back({{"n", r.n}, {"U", r.U.mean}, {"var_U", r.var_U}, {"G", r.G.mean}, {"g", r.g.mean}});
  }
  if (st.rows.size() >= 2) {
    McEstimate su, sg;
    su.mean = st.U_fit.slope;
    su.stderr = st.U_fit.slope_stderr;
    sg.mean = st.G_fit.slope;
    sg.stderr = st.G_fit.slope_stderr;
    em.add(estimate_row(0, "U_slope_log_n", su, c.seed));
    em.add(estimate_row(0, "G_slope_log_n", sg, c.seed));
    std::cout << "slope E[U_n] vs log n: " << num(st.U_fit.slope) << "\nslope E[G_n] vs log n: " << num(st.G_fit.slope)
              << '\n';
  }
  run.meta = {{"rows", rows}, {"U_slope", st.U_fit.slope}, {"G_slope", st.G_fit.slope}};
  run.write(em.render(c.format, config_echo(c)));
  return kExitOk;
}

int cmd_escape(Run& run) {
  const SimConfig& c = run.cfg;
  if (c.d != 6) throw ConfigError("escape requires --d 6");
  const std::vector<std::int64_t> ns = c.n_list.empty() ? std::vector<std::int64_t>{c.n} : c.n_list;
  const OffspringLaw law = law_of(c);
  const GreenTable table = table_of(c);
  const RandomStream rng(c.seed);
  Emitter em;
  json rows = json::array();
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const EscapeEstimate e = estimate_escape(ns[k], law, table, lawler_options(c), c.samples, rng.split(k));
    em.add(estimate_row(ns[k], "pA", e.pA, c.seed));
    em.add(estimate_row(ns[k], "pB", e.pB, c.seed));
    McEstimate v = McEstimate::exact(static_cast<double>(e.inclusion_violations));
    v.samples = e.pA.samples;
    em.add(estimate_row(ns[k], "inclusion_violations", v, c.seed));
    rows.push_back({{"n", ns[k]}, {"pA", est_json(e.pA)}, {"pB", est_json(e.pB)},
                    {"inclusion_violations", e.inclusion_violations}});
    std::cout << "n=" << ns[k] << " pA=" << num(e.pA.mean) << " +- " << num(e.pA.stderr) << " pB=" << num(e.pB.mean)
              << " +- " << num(e.pB.stderr) << '\n';
  }
  run.meta = {{"rows", rows}};
  run.write(em.render(c.format, config_echo(c)));
  return kExitOk;
}

int cmd_sweep(Run& run) {
  const SimConfig& c = run.cfg;
  if (c.n_list.empty()) throw ConfigError("sweep needs --n-list");
  RangeOptions o;
  o.radius_factor = c.radius_factor;
  o.min_radius = c.min_radius;
  o.tube_alpha = c.tube_alpha;
  o.node_cap = c.node_cap;
  o.workers = c.workers;
  SweepBudget b;
  b.pilot = c.pilot;
  b.rel_stderr = c.rel_stderr;
  b.max_samples = c.max_samples;
  const SweepResult r = scaling_sweep(c.d, c.n_list, law_of(c), o, b, RandomStream(c.seed), c.seed);
  Emitter em;
  for (const ScalingRow& row : r.rows)
    em.add({{"d", static_cast<std::int64_t>(row.d)},
            {"n", row.n},
            {"estimator", row.estimator},
            {"value", row.value},
            {"stderr", row.stderr},
            {"bias", row.bias},
            {"samples", row.samples},
            {"seed", static_cast<std::int64_t>(row.seed)}});
  json norm = json::array();
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    norm.push_back({{"n", r.rows[i].n}, {"value", r.normalized[i]}, {"stderr", r.normalized_stderr[i]}});
    std::cout << "n=" << r.rows[i].n << " value=" << num(r.rows[i].value) << " +- " << num(r.rows[i].stderr)
              << " normalized=" << num(r.normalized[i]) << '\n';
  }
  run.meta = {{"normalized", norm},
              {"normalization", c.d == 5 ? "value/sqrt(n)" : c.d == 6 ? "value*log(n)/n" : "value/n"}};
  if (r.rows.size() >= 3)
    run.meta["fit"] = {{"model", to_string(r.fit.model)},
                       {"constant", r.fit.constant},
                       {"constant_stderr", r.fit.constant_stderr},
                       {"exponent", r.fit.exponent},
                       {"residual", r.fit.residual}};
  run.write(em.render(c.format, config_echo(c)));
  return kExitOk;
}

int cmd_tree_dump(Run& run) {
  const SimConfig& c = run.cfg;
  TruncationPolicy pol;
  pol.spine_exit_radius = c.tree_radius;
  pol.subtree_node_cap = c.node_cap;
  std::ostringstream os;
  os << "# config " << config_echo(c) << '\n';
  RandomStream rng(c.seed);
  dump_invariant_tree(law_of(c), LatticePoint::origin(c.d), pol, rng, os);
  run.write(os.str());
  return kExitOk;
}

/// "--config path" is applied before flag parsing so flags override the file.
void preload_config(int argc, char** argv, SimConfig& cfg) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) apply_config_file(cfg, argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) apply_config_file(cfg, a.substr(9));
  }
}

}  // namespace

int main(int argc, char** argv) {
  Run run;
  SimConfig& cfg = run.cfg;
  try {
    preload_config(argc, argv, cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  CLI::App app{"Branching capacity simulation toolkit"};
  app.require_subcommand(1);
  std::string config_path, n_list;

  const auto common = [&](CLI::App* s) {
    s->add_option("--config", config_path, "JSON file with default parameters");
    s->add_option("--d", cfg.d, "dimension");
    s->add_option("--seed", cfg.seed, "root seed");
    s->add_option("--workers", cfg.workers, "worker threads")->check(CLI::PositiveNumber);
    s->add_option("--law", cfg.law, "offspring law: builtin:binary, builtin:geometric or a pmf file");
    s->add_option("--radius-factor", cfg.radius_factor, "truncation radius factor");
    s->add_option("--node-cap", cfg.node_cap, "node cap per hanging tree");
    s->add_option("--table", cfg.table, "Green table file");
    s->add_option("--table-dir", cfg.table_dir, "cache directory for Green tables");
    s->add_option("--out", cfg.out, "output path (default stdout)");
    s->add_option("--format", cfg.format, "csv or jsonl");
    s->add_option("--samples", cfg.samples, "Monte Carlo samples");
  };

  CLI::App* green = app.add_subcommand("green-table", "build and save a Green table");
  common(green);
  green->add_option("--radius", cfg.green_radius, "stored radius R");
  green->add_option("--solve-radius", cfg.green_solve_radius, "Dirichlet domain radius (0: automatic)");
  green->add_option("--tol", cfg.green_tol, "relative accuracy target");

  CLI::App* bcap = app.add_subcommand("bcap", "estimate the equilibrium measure and BCap of a set");
  common(bcap);
  bcap->add_option("--set", cfg.set, "ball:R, points:x;y;... or a point file");
  bcap->add_option("--mode", cfg.mode, "exact (every point) or sampled (inner boundary)");
  bcap->add_option("--per-point-samples", cfg.per_point_samples, "samples per point in exact mode");
  bcap->add_option("--min-radius", cfg.min_radius, "minimal truncation radius");

  CLI::App* hit = app.add_subcommand("bcap-hit", "BCap from far hitting probabilities");
  common(hit);
  hit->add_option("--set", cfg.set, "ball:R, points:x;y;... or a point file");
  hit->add_option("--x-far", cfg.x_far, "starting point, comma separated");
  hit->add_option("--min-radius", cfg.min_radius, "minimal truncation radius");

  CLI::App* energy = app.add_subcommand("energy", "minimize the G-energy over probability measures");
  common(energy);
  energy->add_option("--set", cfg.set, "ball:R, points:x;y;... or a point file");
  energy->add_option("--tol", cfg.energy_tol, "relative Frank-Wolfe gap tolerance");
  energy->add_option("--max-iters", cfg.max_iters, "iteration cap");

  CLI::App* lawler = app.add_subcommand("lawler-check", "check the Lawler-type identities");
  common(lawler);
  lawler->add_option("--n", cfg.n, "kill parameter");

  CLI::App* stats = app.add_subcommand("stats", "U_n, G_n and g_n statistics (d = 6)");
  common(stats);
  stats->add_option("--n-list", n_list, "comma separated n values");

  CLI::App* escape = app.add_subcommand("escape", "P(A_n) and P(B_n) (d = 6)");
  common(escape);
  escape->add_option("--n", cfg.n, "kill parameter");
  escape->add_option("--n-list", n_list, "comma separated n values");
  escape->add_option("--tube-alpha", cfg.tube_alpha, "scale-relative past pruning (0: off)");

  CLI::App* sweep = app.add_subcommand("sweep", "E[BCap(R_n)] scaling sweep");
  common(sweep);
  sweep->add_option("--n-list", n_list, "comma separated n values, e.g. 2^8,2^9");
  sweep->add_option("--tube-alpha", cfg.tube_alpha, "scale-relative past pruning (0: off)");
  sweep->add_option("--min-radius", cfg.min_radius, "minimal truncation radius");
  sweep->add_option("--pilot", cfg.pilot, "pilot samples per row");
  sweep->add_option("--rel-stderr", cfg.rel_stderr, "target relative stderr per row");
  sweep->add_option("--max-samples", cfg.max_samples, "sample cap per row");

  CLI::App* dump = app.add_subcommand("tree-dump", "write one truncated invariant tree");
  common(dump);
  dump->add_option("--radius", cfg.tree_radius, "spine exit radius");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    if (!n_list.empty()) cfg.n_list = parse_int_list(n_list);
    check_dimension(cfg.d);
    if (cfg.d < 5) throw ConfigError("simulations need d >= 5");
    check_format(cfg);
    if (cfg.samples < 1) throw ConfigError("--samples must be >= 1");
    if (cfg.command == "green-table") return cmd_green_table(run);
    if (cfg.command == "bcap") return cmd_bcap(run);
    if (cfg.command == "bcap-hit") return cmd_bcap_hit(run);
    if (cfg.command == "energy") return cmd_energy(run);
    if (cfg.command == "lawler-check") return cmd_lawler_check(run);
    if (cfg.command == "stats") return cmd_stats(run);
    if (cfg.command == "escape") return cmd_escape(run);
    if (cfg.command == "sweep") return cmd_sweep(run);
    if (cfg.command == "tree-dump") return cmd_tree_dump(run);
    throw ConfigError("unknown subcommand");
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
