#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "evokit/evo_solver.hpp"
#include "evokit/material_law.hpp"
#include "evokit/time_stepper.hpp"

namespace evokit {

using json = nlohmann::json;

enum class Mode { spectral, step, inclusion, homogenize, stability };

// Problem description; the schema is documented in README.md. Sections stay as JSON after
// key validation and are interpreted by assemble().
struct ProblemConfig {
  std::string name;
  Mode mode = Mode::spectral;
  double t0 = -4.0, dt = 1.0 / 64.0, nu = 1.0;
  int n = 2048;
  json law, spatial, rhs, step, example, experiment;
  std::string base_dir;  // law files are resolved relative to this
};

Mode mode_from_name(const std::string& s);
std::string mode_name(Mode m);

// Schema validation; unknown keys and wrong types raise Validation naming the key path.
ProblemConfig parse_config(const json& j, const std::string& base_dir = ".");
ProblemConfig load_config(const std::string& path);

// Law description: {"dim": d, "radius": r, "expr": node}; node kinds const, zpow, sum,
// product, neumann_inverse, exp_delay, kernel.
MaterialLaw law_from_json(const json& j);
MaterialLaw load_law_file(const std::string& path);

struct AssembledProblem {
  Mode mode = Mode::spectral;
  TimeGrid grid;
  // spectral
  std::optional<EvoProblem> problem;
  // step / inclusion
  TimeVaryingLaw tv_law;
  SpMat A;
  Signal rhs;
  Eigen::VectorXd quad;
  StepOptions step;
  std::optional<MonotoneRelation> relation;
};

AssembledProblem assemble(const ProblemConfig& cfg);

// Overrides applied by CLI flags: nu keeps the nodes, dt keeps [t0, t_end).
ProblemConfig with_nu(ProblemConfig cfg, double nu);
ProblemConfig with_dt(ProblemConfig cfg, double dt);

}  // namespace evokit
