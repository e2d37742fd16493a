// wcrv: warped-product harmonic-curvature toolkit, batch front door.
//
// Subcommands: spectrum, trivial-branch, bifurcate, trace, yamabe, verify,
// identities. Every run writes a JSON manifest next to its artifacts; exit
// codes: 0 ok, 2 validation, 3 solver, 4 verification.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "wcrv/cli/artifacts.hpp"
#include "wcrv/cli/run_config.hpp"
#include "wcrv/cli/verify_report.hpp"
#include "wcrv/dichotomy/uniqueness.hpp"

namespace fs = std::filesystem;
using namespace wcrv;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

int worker_count() {
  if (const char* env = std::getenv("WCRV_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

struct Manifest {
  json content;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  Manifest(const std::string& subcommand, const RunConfig& cfg) {
    content["subcommand"] = subcommand;
    content["version"] = kVersion;
    content["config"] = to_json(cfg);
    content["seed"] = cfg.seed;
    content["artifacts"] = json::array();
  }

  void add_artifact(const std::string& name) { content["artifacts"].push_back(name); }

  void write(const fs::path& dir) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    content["wall_time_s"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() / 1000.0;
    fs::create_directories(dir);
    std::ofstream out(dir / "manifest.json");
    out << content.dump(2) << '\n';
  }
};

int cmd_spectrum(const RunConfig& cfg, int count) {
  cfg.validate();
  Manifest manifest("spectrum", cfg);
  const Surface s = cfg.surface.build();
  const auto pairs = eigenpairs(s, count);
  const auto admissible = admissible_lambdas(s, cfg.problem.p, cfg.problem.r, pairs);

  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  CsvWriter csv(out / "spectrum.csv", {"index", "lambda", "multiplicity", "admissible"});
  for (size_t i = 0; i < pairs.size(); ++i) {
    const bool adm = std::any_of(admissible.begin(), admissible.end(), [&](const EigenPair& a) {
      return a.lambda == pairs[i].lambda;
    });
    csv.row({std::to_string(i), format_double(pairs[i].lambda),
             std::to_string(pairs[i].multiplicity_in_subspace), adm ? "1" : "0"});
  }
  manifest.add_artifact("spectrum.csv");
  manifest.write(out);
  std::cout << "spectrum: " << pairs.size() << " eigenvalues, " << admissible.size()
            << " admissible -> " << (out / "spectrum.csv").string() << "\n";
  return 0;
}

int cmd_trivial_branch(const RunConfig& cfg, double theta_min, double theta_max, int samples) {
  cfg.validate();
  if (!(theta_min > 0) || !(theta_max > theta_min) || samples < 2)
    throw ValidationError("trivial-branch: need 0 < theta-min < theta-max and samples >= 2");
  Manifest manifest("trivial-branch", cfg);
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  CsvWriter csv(out / "trivial_branch.csv",
                {"theta", "eps", "c", "a", "lambda", "f", "admissible"});
  for (int i = 0; i < samples; ++i) {
    const double theta = theta_min + (theta_max - theta_min) * i / (samples - 1.0);
    const TrivialBranchPoint b =
        TrivialBranchPoint::at(cfg.problem.p, cfg.problem.r, cfg.surface.khat, theta);
    csv.row({format_double(b.theta), format_double(b.eps), format_double(b.c),
             format_double(b.a), format_double(b.lambda), format_double(b.f_const),
             b.admissible ? "1" : "0"});
  }
  manifest.add_artifact("trivial_branch.csv");
  manifest.write(out);
  std::cout << "trivial-branch: " << samples << " samples -> "
            << (out / "trivial_branch.csv").string() << "\n";
  return 0;
}

int cmd_bifurcate(const RunConfig& cfg, double theta_lo, double theta_hi, int eigen_count) {
  cfg.validate();
  Manifest manifest("bifurcate", cfg);
  const Surface s = cfg.surface.build();
  const auto points = bifurcation_scan(s, cfg.problem.p, cfg.problem.r, theta_lo, theta_hi,
                                       eigen_count);
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  CsvWriter csv(out / "bifurcations.csv",
                {"lambda", "lambda_discrete", "theta_star", "theta_star_discrete",
                 "harmonic_index"});
  for (const auto& b : points)
    csv.row({format_double(b.lambda), format_double(b.lambda_discrete),
             format_double(b.theta_star), format_double(b.theta_star_discrete),
             std::to_string(b.harmonic_index)});
  manifest.add_artifact("bifurcations.csv");
  manifest.write(out);
  std::cout << "bifurcate: " << points.size() << " crossings -> "
            << (out / "bifurcations.csv").string() << "\n";
  return 0;
}

/// Traces one branch and writes the artifact directory; returns the number of
/// verification failures among accepted points.
int trace_one(const RunConfig& cfg, const Surface& s, const BifurcationPoint& bp,
              const fs::path& out) {
  const WarpParams base =
      WarpParams::at_bifurcation(cfg.problem.p, cfg.problem.r, cfg.surface.khat,
                                 bp.lambda_discrete);
  const BranchState branch = trace_branch(s, base, bp.kernel, cfg.settings);

  fs::create_directories(out / "points");
  CsvWriter csv(out / "summary.csv",
                {"index", "arclength", "t", "theta", "eps", "c", "mu", "eps_area", "k_max",
                 "k_min", "warp_residual", "rwr_deviation", "csb_max", "newton_iterations",
                 "sigma_min"});
  std::vector<double> arcs, eps_areas;
  int failures = 0;
  for (size_t i = 0; i < branch.points.size(); ++i) {
    const BranchPoint& pt = branch.points[i];
    const WarpParams w = base.shifted(pt.t);
    const ScalarField x(s, pt.x);
    const ScalarField k = gaussian_curvature(s, x);
    const ScalarField f = warp_f_of_curvature(s, k, w);
    const ScalarField vt = vartheta_of_f(s, f, w.p);
    const ScalarIdentityReport rwr = warped_scalar_residual(s, x, vt, w);
    const double mu_n = normalized_mu(w, case_b_constant_from_r(w));
    const ScalarField csb = metric_curvature_residual(s, x, w, mu_n);
    const double csb_max = csb.values.cwiseAbs().maxCoeff();
    const HomothetyInvariants h = homothety_invariants(s, x, w);

    const bool ok = pt.diag.residual_inf < 10 * cfg.settings.tol &&
                    rwr.deviation < 1e-5 &&
                    csb_max < metric_residual_grid_tolerance(s, x, w, mu_n) &&
                    sign_ledger(w, k).ok();
    if (!ok) ++failures;

    char stem[32];
    std::snprintf(stem, sizeof(stem), "%04zu", i);
    save_solution(out / "points", stem, cfg.surface, w, SolutionQuadruple{x, f, w.eps, w.c});

    arcs.push_back(pt.arclength);
    eps_areas.push_back(h.eps_area);
    csv.row({std::to_string(i), format_double(pt.arclength), format_double(pt.t),
             format_double(w.theta), format_double(w.eps), format_double(w.c),
             format_double(w.mu), format_double(h.eps_area), format_double(h.k_max),
             format_double(h.k_min), format_double(pt.diag.residual_inf),
             format_double(rwr.deviation), format_double(csb_max),
             std::to_string(pt.diag.newton_iterations),
             format_double(pt.diag.jacobian_sigma_min)});
  }
  if (!arcs.empty())
    write_svg_line_plot(out / "diagram.svg", arcs, eps_areas, "arclength", "eps * area",
                        "branch diagram");
  json info{{"lambda", bp.lambda},
            {"lambda_discrete", bp.lambda_discrete},
            {"theta_star", bp.theta_star},
            {"points", branch.points.size()},
            {"termination", to_string(branch.termination)},
            {"termination_detail", branch.termination_detail},
            {"verification_failures", failures}};
  std::ofstream(out / "branch.json") << info.dump(2) << '\n';
  return failures;
}

int cmd_trace(const RunConfig& cfg) {
  cfg.validate();
  Manifest manifest("trace", cfg);
  const Surface s = cfg.surface.build();
  const AdmissibleInterval iv =
      admissible_interval(cfg.problem.p, cfg.problem.r, cfg.surface.khat);
  const double lo = iv.lo > 0 ? iv.lo * 1.0001 : 1e-6;
  const double hi = std::isinf(iv.hi) ? lo + 100.0 : iv.hi * 0.9999;
  auto crossings = bifurcation_scan(s, cfg.problem.p, cfg.problem.r, lo, hi);
  if (crossings.empty()) throw SolverError("no admissible bifurcation points in range");

  std::vector<BifurcationPoint> selected;
  switch (cfg.problem.selection) {
    case LambdaSelection::Explicit: {
      for (auto& b : crossings)
        if (std::abs(b.lambda - cfg.problem.lambda) <
            1e-3 * std::max(1.0, cfg.problem.lambda))
          selected.push_back(b);
      if (selected.empty())
        throw ValidationError("no admissible eigenvalue near lambda = " +
                              std::to_string(cfg.problem.lambda));
      break;
    }
    case LambdaSelection::Index: {
      if (cfg.problem.lambda_index < 0 ||
          cfg.problem.lambda_index >= static_cast<int>(crossings.size()))
        throw ValidationError("lambda index out of range");
      selected.push_back(crossings[cfg.problem.lambda_index]);
      break;
    }
    case LambdaSelection::AllAdmissible:
      selected = crossings;
      break;
  }

  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  std::atomic<int> failures{0};
  std::atomic<size_t> next{0};
  const int workers = std::min<int>(worker_count(), static_cast<int>(selected.size()));
  auto work = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= selected.size()) return;
      char name[64];
      std::snprintf(name, sizeof(name), "lambda_%g", selected[i].lambda);
      failures += trace_one(cfg, s, selected[i], out / name);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  for (const auto& b : selected) {
    char name[64];
    std::snprintf(name, sizeof(name), "lambda_%g", b.lambda);
    manifest.add_artifact(std::string(name) + "/summary.csv");
  }
  manifest.content["branches"] = selected.size();
  manifest.content["verification_failures"] = failures.load();
  manifest.write(out);
  std::cout << "trace: " << selected.size() << " branch(es), " << failures.load()
            << " point verification failure(s) -> " << out.string() << "\n";
  if (failures.load() > 0) throw VerificationError("accepted points failed verification");
  return 0;
}

int cmd_yamabe(const RunConfig& cfg, double q, double a_max) {
  cfg.validate();
  Manifest manifest("yamabe", cfg);
  const Surface s = cfg.surface.build();
  const auto pairs = eigenpairs(s, 4);
  const double lambda1 = pairs[1].lambda; // first positive in the subspace
  const double a_star = lambda1 / (q - 2.0);
  if (a_max <= a_star)
    throw ValidationError("a range does not cross the first bifurcation at a = " +
                          std::to_string(a_star));
  NewtonSettings settings = cfg.settings;
  settings.max_arclength = std::max(settings.max_arclength, a_max - a_star);
  const BranchState branch = yamabe_branch(s, lambda1, q, settings);

  const fs::path out = cfg.output_dir;
  fs::create_directories(out / "points");
  CsvWriter csv(out / "summary.csv",
                {"index", "a", "arclength", "f_min", "f_max", "residual", "newton_iterations"});
  std::vector<double> as, amps;
  int failures = 0;
  for (size_t i = 0; i < branch.points.size(); ++i) {
    const BranchPoint& pt = branch.points[i];
    const ScalarField f(s, pt.x);
    const ScalarField resid = yamabe_residual(s, ScalarField::zero(s), f, pt.t, q);
    const double rmax = resid.values.cwiseAbs().maxCoeff();
    const bool ok = rmax < 1e-8 && f.values.minCoeff() > 0 &&
                    f.values.minCoeff() <= 1.0 + 1e-9 && f.values.maxCoeff() >= 1.0 - 1e-9;
    if (!ok) ++failures;
    char stem[32];
    std::snprintf(stem, sizeof(stem), "%04zu_f", i);
    save_field((out / "points" / (std::string(stem) + ".csv")).string(), f.values);
    as.push_back(pt.t);
    amps.push_back(f.values.maxCoeff() - f.values.minCoeff());
    csv.row({std::to_string(i), format_double(pt.t), format_double(pt.arclength),
             format_double(f.values.minCoeff()), format_double(f.values.maxCoeff()),
             format_double(rmax), std::to_string(pt.diag.newton_iterations)});
  }
  if (!as.empty())
    write_svg_line_plot(out / "diagram.svg", as, amps, "a", "f_max - f_min",
                        "nonconstant branch");
  manifest.content["a_star"] = a_star;
  manifest.content["points"] = branch.points.size();
  manifest.content["termination"] = to_string(branch.termination);
  manifest.add_artifact("summary.csv");
  manifest.write(out);
  std::cout << "yamabe: crossing at a = " << a_star << ", " << branch.points.size()
            << " points -> " << out.string() << "\n";
  if (failures > 0) throw VerificationError("yamabe branch points failed verification");
  return 0;
}

int cmd_verify(const std::string& input, bool full4d, const std::string& report_path,
               std::uint64_t seed) {
  const LoadedSolution ls = load_solution(input);
  VerifyOptions opt;
  opt.full4d = full4d;
  opt.seed = seed;
  const json rep = verify_solution(ls, opt);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    out << rep.dump(2) << '\n';
  }
  if (full4d && rep.contains("full4d") && rep["full4d"].contains("per_point")) {
    const fs::path csv_path =
        report_path.empty() ? fs::path("divergence.csv")
                            : fs::path(report_path).replace_extension(".divergence.csv");
    CsvWriter csv(csv_path, {"point", "div_riemann"});
    const auto& arr = rep["full4d"]["per_point"];
    for (size_t i = 0; i < arr.size(); ++i)
      csv.row({std::to_string(i), format_double(arr[i].get<double>())});
  }
  std::cout << rep.dump(2) << '\n';
  if (!rep.at("pass").get<bool>()) throw VerificationError("solution failed verification");
  return 0;
}

int cmd_identities(const std::vector<double>& ps, const std::string& report_path) {
  json rep;
  bool all_pass = true;
  for (double p : ps) {
    const UniquenessData d1(p, 1.7, 0.6, 1.3, 0.8);
    const UniquenessData d2(p, 2.4, 1.1, 0.7, 1.9);
    json instances = json::array();
    for (const UniquenessData* d : {&d1, &d2}) {
      const LimitSuiteReport suite = limit_suite(*d);
      json checks = json::array();
      for (const LimitCheck& c : suite.checks) {
        checks.push_back({{"name", c.name},
                          {"expected", c.expected},
                          {"measured_neg", c.measured_neg},
                          {"measured_pos", c.measured_pos},
                          {"rel_error", c.rel_error},
                          {"pass", c.pass}});
        all_pass = all_pass && c.pass;
      }
      instances.push_back({{"eps", d->eps},
                           {"eps_tilde", d->eps_tilde},
                           {"mu", d->mu},
                           {"mu_tilde", d->mu_tilde},
                           {"checks", checks}});
    }
    rep["p_instances"][format_double(p)] = instances;
  }
  const GapPolynomialSplit split = gap_polynomial_integer(2);
  rep["gap_polynomial_p2"] = {{"total", split.total},
                              {"first", split.first},
                              {"second", split.second},
                              {"identity", split.total == split.first + split.second}};
  all_pass = all_pass && split.total == split.first + split.second && split.total == 176;
  rep["pass"] = all_pass;
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    out << rep.dump(2) << '\n';
  }
  std::cout << rep.dump(2) << '\n';
  if (!all_pass) throw VerificationError("identity suite failed");
  return 0;
}

void add_common(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config; flags override its fields");
  cmd->add_option("--surface", cfg.surface.kind,
                  "zonal-sphere | zonal-projective-plane | mesh");
  cmd->add_option("--khat", cfg.surface.khat, "constant curvature of the background");
  cmd->add_option("--n", cfg.surface.n, "zonal cells / icosphere subdivisions");
  cmd->add_option("--mesh", cfg.surface.mesh_path, "mesh file (OFF/OBJ) or 'icosphere'");
  cmd->add_option("--p", cfg.problem.p, "fibre dimension");
  cmd->add_option("--r", cfg.problem.r, "sign/scale parameter r");
  cmd->add_option("--out", cfg.output_dir, "output directory");
  cmd->add_option("--seed", cfg.seed, "random seed for sampling");
}

void merge_config(const std::string& config_path, RunConfig& cfg, CLI::App* cmd) {
  if (config_path.empty()) return;
  RunConfig merged = load_run_config(config_path);
  // flags that were actually passed beat the file
  if (cmd->count("--surface")) merged.surface.kind = cfg.surface.kind;
  if (cmd->count("--khat")) merged.surface.khat = cfg.surface.khat;
  if (cmd->count("--n")) merged.surface.n = cfg.surface.n;
  if (cmd->count("--mesh")) merged.surface.mesh_path = cfg.surface.mesh_path;
  if (cmd->count("--p")) merged.problem.p = cfg.problem.p;
  if (cmd->count("--r")) merged.problem.r = cfg.problem.r;
  if (cmd->count("--out")) merged.output_dir = cfg.output_dir;
  if (cmd->count("--seed")) merged.seed = cfg.seed;
  merged.problem.selection = cfg.problem.selection;
  merged.problem.lambda = cfg.problem.lambda;
  merged.problem.lambda_index = cfg.problem.lambda_index;
  std::swap(cfg, merged);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"warped-product harmonic-curvature toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  int count = 8;
  double theta_min = 0.5, theta_max = 5.0;
  int samples = 50;
  double theta_lo = 1e-3, theta_hi = 10.0;
  double q = 4.0, a_max = 4.0;
  double lambda_value = 6.0;
  int lambda_index = 0;
  bool all_admissible = false;
  std::string input, report_path;
  bool full4d = false;
  std::vector<double> identity_ps = {3, 4, 5, 8};

  auto* spectrum = app.add_subcommand("spectrum", "low eigenvalues + admissibility flags");
  add_common(spectrum, cfg, config_path);
  spectrum->add_option("--count", count, "number of eigenvalues");

  auto* trivial = app.add_subcommand("trivial-branch", "sample the trivial solution curve");
  add_common(trivial, cfg, config_path);
  trivial->add_option("--theta-min", theta_min);
  trivial->add_option("--theta-max", theta_max);
  trivial->add_option("--samples", samples);

  auto* bif = app.add_subcommand("bifurcate", "locate branch points on the trivial curve");
  add_common(bif, cfg, config_path);
  bif->add_option("--theta-lo", theta_lo);
  bif->add_option("--theta-hi", theta_hi);
  bif->add_option("--count", count, "eigenvalues to scan");

  auto* trace = app.add_subcommand("trace", "pseudo-arclength continuation of branches");
  add_common(trace, cfg, config_path);
  trace->add_option("--lambda", lambda_value, "explicit eigenvalue to trace");
  trace->add_option("--lambda-index", lambda_index, "index into the admissible list");
  trace->add_flag("--all-admissible", all_admissible, "trace every admissible eigenvalue");
  trace->add_option("--ds", cfg.settings.ds, "initial arclength step");
  trace->add_option("--max-points", cfg.settings.max_points);
  trace->add_option("--max-arclength", cfg.settings.max_arclength);
  trace->add_option("--switch-amplitude", cfg.settings.switch_amplitude);

  auto* yam = app.add_subcommand("yamabe", "nonconstant branch of the normalized equation");
  add_common(yam, cfg, config_path);
  yam->add_option("--q", q, "exponent q > 2");
  yam->add_option("--a-max", a_max, "upper end of the coefficient range");
  yam->add_option("--max-points", cfg.settings.max_points);

  auto* verify = app.add_subcommand("verify", "check a solution file against every residual");
  verify->add_option("--input", input, "solution manifest (JSON)")->required();
  verify->add_flag("--full4d", full4d, "include the product-manifold curvature oracle");
  verify->add_option("--report", report_path, "write the JSON report here");
  verify->add_option("--seed", cfg.seed, "sampling seed for the oracle");

  auto* ident = app.add_subcommand("identities", "profile-function identity suite");
  ident->add_option("--p", identity_ps, "fibre dimensions to test");
  ident->add_option("--report", report_path, "write the JSON report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(trace)) {
      if (all_admissible)
        cfg.problem.selection = LambdaSelection::AllAdmissible;
      else if (trace->count("--lambda-index")) {
        cfg.problem.selection = LambdaSelection::Index;
        cfg.problem.lambda_index = lambda_index;
      } else {
        cfg.problem.selection = LambdaSelection::Explicit;
        cfg.problem.lambda = lambda_value;
      }
    }
    if (app.got_subcommand(spectrum)) {
      merge_config(config_path, cfg, spectrum);
      return cmd_spectrum(cfg, count);
    }
    if (app.got_subcommand(trivial)) {
      merge_config(config_path, cfg, trivial);
      return cmd_trivial_branch(cfg, theta_min, theta_max, samples);
    }
    if (app.got_subcommand(bif)) {
      merge_config(config_path, cfg, bif);
      return cmd_bifurcate(cfg, theta_lo, theta_hi, count);
    }
    if (app.got_subcommand(trace)) {
      merge_config(config_path, cfg, trace);
      return cmd_trace(cfg);
    }
    if (app.got_subcommand(yam)) {
      merge_config(config_path, cfg, yam);
      return cmd_yamabe(cfg, q, a_max);
    }
    if (app.got_subcommand(verify)) return cmd_verify(input, full4d, report_path, cfg.seed);
    if (app.got_subcommand(ident)) return cmd_identities(identity_ps, report_path);
  } catch (const VerificationError& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return 4;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
