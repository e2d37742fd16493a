#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>

#include "wcrv/cli/run_config.hpp"
#include "wcrv/dichotomy/isoparametric.hpp"
#include "wcrv/geometry/field_io.hpp"
#include "wcrv/residuals/residuals.hpp"
#include "wcrv/verify4d/divergence.hpp"
#include "wcrv/verify4d/spectral_polish.hpp"

namespace wcrv {

/// On-disk solution: a JSON manifest naming the surface, constants, and field
/// files (CSV or compact binary, paths relative to the manifest).
struct SolutionFile {
  SurfaceSpec surface;
  int p = 2;
  double r = 1.0;
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double delta = 0.0;
  double t = 0.0;
  double eps = 0.0;
  double c = 0.0;
  std::string x_path = "x.csv";
  std::string f_path = "f.csv";
};

inline void save_solution(const std::filesystem::path& dir, const std::string& stem,
                          const SurfaceSpec& surface_spec, const WarpParams& w,
                          const SolutionQuadruple& sol) {
  std::filesystem::create_directories(dir);
  save_field((dir / (stem + "_x.csv")).string(), sol.x.values);
  save_field((dir / (stem + "_f.csv")).string(), sol.f.values);
  json j{{"surface", to_json(surface_spec)},
         {"params",
          {{"p", w.p},
           {"r", w.r},
           {"lambda", w.lambda},
           {"delta", w.delta},
           {"t", w.t}}},
         {"eps", sol.eps},
         {"c", sol.c},
         {"fields", {{"x", stem + "_x.csv"}, {"f", stem + "_f.csv"}}}};
  std::ofstream out(dir / (stem + ".json"));
  out << j.dump(2) << '\n';
}

struct LoadedSolution {
  Surface surface;
  WarpParams params;
  SolutionQuadruple sol;
};

inline LoadedSolution load_solution(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ValidationError("cannot open solution file " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError("solution manifest parse error: " + std::string(e.what()));
  }
  SurfaceSpec spec;
  from_json_path(j.at("surface"), spec);

  LoadedSolution out{spec.build(), WarpParams{}, SolutionQuadruple{}};
  const json& pj = j.at("params");
  const int p = pj.at("p").get<int>();
  const double r = pj.at("r").get<double>();
  const double delta = pj.at("delta").get<double>();
  const double t = pj.at("t").get<double>();

  WarpParams w = WarpParams::from_theta(p, r, spec.khat, delta);
  w = w.shifted(t);
  if (pj.contains("lambda") && pj.at("lambda").is_number())
    w.lambda = pj.at("lambda").get<double>();
  out.params = w;

  const auto base = manifest_path.parent_path();
  Eigen::VectorXd xv = load_field((base / j.at("fields").at("x").get<std::string>()).string());
  Eigen::VectorXd fv = load_field((base / j.at("fields").at("f").get<std::string>()).string());
  out.sol.x = ScalarField(out.surface, std::move(xv));
  out.sol.f = ScalarField(out.surface, std::move(fv));
  out.sol.eps = j.at("eps").get<double>();
  out.sol.c = j.at("c").get<double>();
  return out;
}

struct VerifyOptions {
  bool full4d = false;
  int sample_points = 32;
  std::uint64_t seed = 1;
  double rwr_deviation_tol = 1e-6;
  double mu_match_tol = 1e-6;
  double warp_residual_tol = 1e-8;
};

/// Runs every characterization against one solution and reports the numbers,
/// the thresholds, and per-check booleans. `pass` aggregates them.
inline json verify_solution(const LoadedSolution& ls, const VerifyOptions& opt = {}) {
  const Surface& s = ls.surface;
  const WarpParams& w = ls.params;
  json rep;
  bool pass = true;
  auto record = [&](const std::string& name, bool ok) {
    rep["checks"][name] = ok;
    pass = pass && ok;
  };

  // stored constants must match the parameter algebra
  record("eps_matches_params", std::abs(ls.sol.eps - w.eps) <= 1e-12 * std::abs(w.eps));
  record("c_matches_params", std::abs(ls.sol.c - w.c) <= 1e-12 * std::abs(w.c));
  record("f_positive", ls.sol.f.values.minCoeff() > 0.0);

  const ScalarField k = gaussian_curvature(s, ls.sol.x);
  const SignLedger ledger = sign_ledger(w, k);
  rep["sign_ledger"] = {{"c_positive", ledger.c_positive},
                        {"eps_positive", ledger.eps_positive},
                        {"a_zero_implies_p2_r_positive", ledger.a_zero_implies_p2_r_positive},
                        {"r_negative_implies_p_gt2_K_negative",
                         ledger.r_negative_implies_p_gt2_K_negative}};
  record("sign_ledger", ledger.ok());

  const HomothetyInvariants h = homothety_invariants(s, ls.sol.x, w);
  rep["homothety"] = {{"eps_area", h.eps_area}, {"k_max", h.k_max}, {"k_min", h.k_min}};

  if (w.r != 0.0) {
    // nonconstant-curvature characterizations
    double warp_resid = std::numeric_limits<double>::infinity();
    try {
      warp_resid = warp_residual(s, w, ls.sol.x).values.cwiseAbs().maxCoeff();
    } catch (const DomainViolation& e) {
      rep["warp_residual_error"] = e.what();
    }
    rep["warp_residual_max"] = warp_resid;
    record("warp_residual", warp_resid < opt.warp_residual_tol);

    // stored f against the curvature-derived profile
    try {
      const ScalarField fd = warp_f_of_curvature(s, k, w);
      const double mism = (fd.values - ls.sol.f.values).cwiseAbs().maxCoeff() /
                          ls.sol.f.values.cwiseAbs().maxCoeff();
      rep["f_consistency_rel"] = mism;
      record("f_consistent_with_curvature", mism < 1e-6);
    } catch (const DomainViolation& e) {
      rep["f_consistency_error"] = e.what();
      record("f_consistent_with_curvature", false);
    }

    const ScalarField vt = vartheta_of_f(s, ls.sol.f, w.p);
    const ScalarIdentityReport rwr = warped_scalar_residual(s, ls.sol.x, vt, w);
    rep["scalar_identity"] = {{"mu_bar", rwr.mu_bar},
                              {"deviation", rwr.deviation},
                              {"mu_expected", w.mu}};
    record("scalar_identity_deviation", rwr.deviation < opt.rwr_deviation_tol);
    record("mu_bar_matches",
           std::abs(rwr.mu_bar - w.mu) < opt.mu_match_tol * std::abs(w.mu));

    const double b = case_b_constant_from_fields(s, ls.sol, w);
    const double mu_n = normalized_mu(w, b);
    const ScalarField csb = metric_curvature_residual(s, ls.sol.x, w, mu_n);
    const double csb_tol = metric_residual_grid_tolerance(s, ls.sol.x, w, mu_n);
    rep["metric_residual"] = {{"max", csb.values.cwiseAbs().maxCoeff()},
                              {"grid_tolerance", csb_tol},
                              {"normalization_constant", b},
                              {"mu_normalized", mu_n}};
    record("metric_residual", csb.values.cwiseAbs().maxCoeff() < csb_tol);
  } else {
    // constant-curvature (Yamabe) characterization with a = c normalization
    const ScalarField resid = yamabe_residual(s, ls.sol.x, ls.sol.f, w.a, w.q);
    rep["yamabe_residual_max"] = resid.values.cwiseAbs().maxCoeff();
    record("yamabe_residual", resid.values.cwiseAbs().maxCoeff() < opt.warp_residual_tol);
    record("max_principle_bracket", ls.sol.f.values.minCoeff() <= 1.0 + 1e-12 &&
                                        ls.sol.f.values.maxCoeff() >= 1.0 - 1e-12);
  }

  if (s.zonal()) {
    const IsoparametricReport iso = isoparametric_check(s, ls.sol.x, w);
    rep["isoparametric"] = {{"vacuous", iso.vacuous},
                            {"scatter", iso.scatter()},
                            {"segments", iso.segments}};
    if (!iso.notice.empty()) rep["isoparametric"]["notice"] = iso.notice;
  }

  if (opt.full4d) {
    if (w.r == 0.0) {
      rep["full4d"] = {{"skipped", "constant-curvature case has no derived warping chart"}};
    } else if (!s.zonal() || s.khat() <= 0) {
      rep["full4d"] = {{"skipped", "needs a zonal base with khat > 0"}};
    } else {
      if (w.p != 2) rep["full4d_warning"] = "fibre dimension > 2: cost grows combinatorially";
      ProductChart chart = make_product_chart(s, ls.sol, w);
      NewtonSettings refine_cfg;
      const RefinedBranchPoint fine =
          refine_branch_point(s, w, ls.sol.x.values, w.t, refine_cfg);
      SolutionQuadruple refined = ls.sol;
      refined.x = ScalarField(s, fine.x);
      const ScalarField kr = gaussian_curvature(s, refined.x);
      refined.f = warp_f_of_curvature(s, kr, w);
      chart = make_product_chart(s, refined, w);
      const PolishReport polish = polish_to_continuum(chart);
      const double h2 = s.grid_spacing() * s.grid_spacing();
      const double budget = 10.0 * (h2 + fine.grid_error_estimate);

      const auto pts = sample_chart_points(chart, opt.sample_points, opt.seed);
      const DivergenceReport on_sol = divergence_report(chart, pts);

      SolutionQuadruple triv{ScalarField::zero(s),
                             ScalarField::constant(s, f_const_of_theta(w.p, w.theta)), w.eps,
                             w.c};
      const ProductChart trivial = make_product_chart(s, triv, w);
      const DivergenceReport floor = divergence_report(trivial, pts);

      const ProductChart broken = perturb_warping(chart, 1e-2);
      const DivergenceReport control = divergence_report(broken, pts);

      rep["full4d"] = {{"div_riemann_max", on_sol.max_residual},
                       {"noise_floor", floor.max_residual},
                       {"control_1pc", control.max_residual},
                       {"bianchi_worst", on_sol.bianchi_worst},
                       {"scalar_curvature_mean", on_sol.scalar_curvature_mean},
                       {"scalar_curvature_spread", on_sol.scalar_curvature_spread},
                       {"polish_residual", polish.residual_after},
                       {"polish_correction", polish.correction_max},
                       {"polish_budget", budget},
                       {"per_point", on_sol.residuals}};
      record("div_riemann_at_floor",
             on_sol.max_residual < 10.0 * std::max(floor.max_residual, 1e-10));
      record("div_riemann_control_separated",
             control.max_residual > 1e3 * on_sol.max_residual);
      record("scalar_curvature_matches_mu",
             on_sol.scalar_curvature_spread < 1e-4 * std::abs(w.mu) &&
                 std::abs(on_sol.scalar_curvature_mean - w.mu) < 1e-4 * std::abs(w.mu));
      record("polish_within_grid_error", polish.correction_max < budget);
    }
  }

  rep["pass"] = pass;
  return rep;
}

} // namespace wcrv
