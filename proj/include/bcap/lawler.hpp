#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcap/green.hpp"
#include "bcap/gwtree.hpp"
#include "bcap/offspring.hpp"
#include "bcap/stats.hpp"

namespace bcap {

/// Per-trial truncation: the spine exits B(0, r) with
/// r = radius_factor * max(M, 1), M = max_j |X_j|. Forest vertices beyond r
/// are not grown.
struct LawlerOptions {
  double radius_factor = 4.0;
  std::int64_t node_cap = 1'000'000;
  int workers = 1;
  /// Walk size above which U_n uses the multipole evaluator (opening angle
  /// theta, far-field pairs at distance >= min_far only). At the defaults the
  /// relative error of U_n is about 1e-4.
  std::int64_t multipole_threshold = 256;
  double multipole_theta = 0.5;
  double multipole_min_far = 8.0;
  /// Past vertices far from the walk's range relative to their distance from
  /// the origin are dropped (see TubeFilter); 0 disables. Only the escape
  /// estimator uses it.
  double tube_alpha = 0.0;
};

/// Which parts of a trial to compute.
struct TrialParts {
  bool identity = true;  // A_n, e_n, L_n, U_n, Z_n (tree past and future)
  bool escape = false;   // B_n as well
  bool potentials = true;  // U_n, Z_n, G_n, g_n even when 1_A e_n = 0
};

struct LawlerTrial {
  std::int64_t n = 0;
  std::int64_t left_len = 0, right_len = 0;
  int indicator_A = 0;
  int indicator_B = 0;
  int e_n = 0;
  double L_n = 0;  // future visits, root excluded; killed subtrees replaced by their mean
  std::int64_t N_n = 0;  // #{j : X_j = 0}: visits of the window to the tree's root
  double U_n = 0;
  double Z_n = 0;
  double G_n = 0;
  double g_n = 0;
  double radius = 0;
  double max_displacement = 0;
  std::int64_t spine_T = 0;
  bool truncated = false;
  bool potentials_valid = false;
  std::int64_t past_nodes = 0, future_nodes = 0;
};

LawlerTrial run_trial(std::int64_t n, const OffspringLaw& law, const GreenTable& table,
                      const LawlerOptions& opt, const TrialParts& parts, const RandomStream& rng);

/// The last-passage sum over the window counts the root: with L_n alone,
/// n = 1 gives E[1_A L_n] = P(T_- hits 0) < 1. The gated forms add N_n.
struct IdentityCheck {
  McEstimate L_form;  // 1_A e_n (L_n + N_n)
  McEstimate U_form;  // 1_A e_n (U_n - Z_n + N_n)
  McEstimate L_literal;  // 1_A e_n L_n
  McEstimate U_literal;  // 1_A e_n (U_n - Z_n)
  McEstimate root_term;  // 1_A e_n N_n
  double radius_factor = 0;
  bool rerun = false;
  bool pass_L = false, pass_U = false;
  bool variance_ok = false;  // var(U) <= 1.05 var(L)
};

/// |mean - 1| <= 3 stderr + bias.
bool identity_gate(const McEstimate& e);

/// Runs `samples` trials (trial t uses rng.split(t)); on a failed gate reruns
/// once at twice the radius factor and reports the rerun.
IdentityCheck check_identity(std::int64_t n, const OffspringLaw& law, const GreenTable& table,
                             const LawlerOptions& opt, std::int64_t samples, const RandomStream& rng);

/// Gated forms (root counted).
McEstimate check_identity_L(std::int64_t n, const OffspringLaw& law, const GreenTable& table,
                            const LawlerOptions& opt, std::int64_t samples, const RandomStream& rng);
McEstimate check_identity_U(std::int64_t n, const OffspringLaw& law, const GreenTable& table,
                            const LawlerOptions& opt, std::int64_t samples, const RandomStream& rng);

struct UnGnRow {
  std::int64_t n = 0;
  McEstimate U, G, g;
  double var_U = 0, var_U_stderr = 0;
  double var_G = 0;
};

struct UnGnStats {
  std::vector<UnGnRow> rows;
  LineFit U_fit, G_fit;  // mean vs log n, weighted by the row stderr
};

/// Row k uses rng.split(k); trial t within it uses .split(t).
UnGnStats stats_un_gn(const std::vector<std::int64_t>& n_list, const OffspringLaw& law,
                      const GreenTable& table, const LawlerOptions& opt, std::int64_t samples,
                      const RandomStream& rng);

struct EscapeEstimate {
  McEstimate pA, pB;
  std::int64_t inclusion_violations = 0;  // trials with A_n but not B_n
};

EscapeEstimate estimate_escape(std::int64_t n, const OffspringLaw& law, const GreenTable& table,
                               const LawlerOptions& opt, std::int64_t samples, const RandomStream& rng);

/// Relative truncation bias order used by the identity checks.
double lawler_bias_order(int d, double radius_factor);

}  // namespace bcap
