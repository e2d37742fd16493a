#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "wcrv/continuation/trace.hpp"
#include "wcrv/geometry/mesh_io.hpp"

namespace wcrv {

using nlohmann::json;

struct SurfaceSpec {
  std::string kind = "zonal-sphere"; // zonal-sphere | zonal-projective-plane | mesh
  double khat = 1.0;
  int n = 1024;          // zonal cell count
  std::string mesh_path; // mesh kind

  Surface build() const {
    if (kind == "zonal-sphere") return Surface::zonal_sphere(khat, n);
    if (kind == "zonal-projective-plane") return Surface::zonal_projective_plane(khat, n);
    if (kind == "mesh") {
      if (mesh_path == "icosphere") return icosphere(khat, n);
      return load_mesh_surface(mesh_path, khat);
    }
    throw ValidationError("surface.kind: unknown kind '" + kind + "'");
  }
};

inline void from_json_path(const json& j, SurfaceSpec& s) {
  if (j.contains("kind")) s.kind = j.at("kind").get<std::string>();
  if (j.contains("khat")) s.khat = j.at("khat").get<double>();
  if (j.contains("n")) s.n = j.at("n").get<int>();
  if (j.contains("mesh_path")) s.mesh_path = j.at("mesh_path").get<std::string>();
}

inline json to_json(const SurfaceSpec& s) {
  json j{{"kind", s.kind}, {"khat", s.khat}, {"n", s.n}};
  if (!s.mesh_path.empty()) j["mesh_path"] = s.mesh_path;
  return j;
}

enum class LambdaSelection { Explicit, Index, AllAdmissible };

struct ProblemSpec {
  int p = 2;
  double r = 1.0;
  LambdaSelection selection = LambdaSelection::Explicit;
  double lambda = 6.0; // Explicit
  int lambda_index = 0;

  void validate(double khat) const {
    if (p < 2) throw ValidationError("problem.p: fibre dimension must be >= 2");
    if (r == 0.0) throw ValidationError("problem.r: must be nonzero");
    if (r < 0.0 && !(p > 2 && khat < 0.0))
      throw ValidationError(
          "problem.r: negative r requires p > 2 and negative constant curvature");
  }
};

inline void from_json_path(const json& j, ProblemSpec& p) {
  if (j.contains("p")) p.p = j.at("p").get<int>();
  if (j.contains("r")) p.r = j.at("r").get<double>();
  if (j.contains("lambda")) {
    const json& l = j.at("lambda");
    if (l.is_number()) {
      p.selection = LambdaSelection::Explicit;
      p.lambda = l.get<double>();
    } else {
      const std::string mode = l.at("mode").get<std::string>();
      if (mode == "explicit") {
        p.selection = LambdaSelection::Explicit;
        p.lambda = l.at("value").get<double>();
      } else if (mode == "index") {
        p.selection = LambdaSelection::Index;
        p.lambda_index = l.at("value").get<int>();
      } else if (mode == "all-admissible") {
        p.selection = LambdaSelection::AllAdmissible;
      } else {
        throw ValidationError("problem.lambda.mode: unknown mode '" + mode + "'");
      }
    }
  }
}

inline json to_json(const ProblemSpec& p) {
  json l;
  switch (p.selection) {
    case LambdaSelection::Explicit: l = {{"mode", "explicit"}, {"value", p.lambda}}; break;
    case LambdaSelection::Index: l = {{"mode", "index"}, {"value", p.lambda_index}}; break;
    case LambdaSelection::AllAdmissible: l = {{"mode", "all-admissible"}}; break;
  }
  return json{{"p", p.p}, {"r", p.r}, {"lambda", l}};
}

struct RunConfig {
  SurfaceSpec surface;
  ProblemSpec problem;
  NewtonSettings settings;
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  void validate() const {
    problem.validate(surface.khat);
    settings.validate();
  }
};

inline void from_json_path(const json& j, RunConfig& c) {
  if (j.contains("surface")) from_json_path(j.at("surface"), c.surface);
  if (j.contains("problem")) from_json_path(j.at("problem"), c.problem);
  if (j.contains("settings")) {
    const json& s = j.at("settings");
    if (s.contains("tol")) c.settings.tol = s.at("tol").get<double>();
    if (s.contains("max_iter")) c.settings.max_iter = s.at("max_iter").get<int>();
    if (s.contains("ds")) c.settings.ds = s.at("ds").get<double>();
    if (s.contains("ds_min")) c.settings.ds_min = s.at("ds_min").get<double>();
    if (s.contains("ds_max")) c.settings.ds_max = s.at("ds_max").get<double>();
    if (s.contains("switch_amplitude"))
      c.settings.switch_amplitude = s.at("switch_amplitude").get<double>();
    if (s.contains("max_arclength")) c.settings.max_arclength = s.at("max_arclength").get<double>();
    if (s.contains("max_points")) c.settings.max_points = s.at("max_points").get<int>();
  }
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
}

inline json to_json(const RunConfig& c) {
  return json{{"surface", to_json(c.surface)},
              {"problem", to_json(c.problem)},
              {"settings",
               {{"tol", c.settings.tol},
                {"max_iter", c.settings.max_iter},
                {"ds", c.settings.ds},
                {"ds_min", c.settings.ds_min},
                {"ds_max", c.settings.ds_max},
                {"switch_amplitude", c.settings.switch_amplitude},
                {"max_arclength", c.settings.max_arclength},
                {"max_points", c.settings.max_points}}},
              {"output_dir", c.output_dir},
              {"seed", c.seed}};
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError("config parse error in " + path + ": " + e.what());
  }
  RunConfig c;
  from_json_path(j, c);
  return c;
}

} // namespace wcrv
