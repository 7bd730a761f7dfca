#pragma once

#include <functional>
#include <string>

#include "evokit/linalg.hpp"
#include "evokit/material_law.hpp"
#include "evokit/time_calculus.hpp"

namespace evokit {

// (d/dt_nu M(d/dt_nu^{-1}) + A) U = F on one time grid.
struct EvoProblem {
  TimeGrid grid;
  MaterialLaw law;
  SpMatC A;
  // Spatial quadrature weights defining the state inner product (A is skew for it).
  Eigen::VectorXd quad;
  Signal rhs;
  std::string name;
  PositivityReport positivity;

  int dim() const { return law.dim; }
  double nu() const { return grid.nu; }
  // Validates shapes, records the positivity report at r = 1/(2 nu).
  static EvoProblem make(const TimeGrid& grid, MaterialLaw law, SpMatC A, Signal rhs,
                         Eigen::VectorXd quad = {}, std::string name = {});
  // Same problem data on a grid with another weight.
  EvoProblem with_nu(double nu2) const;
  EvoProblem with_rhs(Signal rhs2) const;
};

enum class LargeSolver { sparse_lu, gmres };

struct SolverOptions {
  // Sparsity components up to this size use dense LU.
  int dense_threshold = 200;
  LargeSolver large = LargeSolver::sparse_lu;
  double gmres_tol = 1e-13;
  int gmres_max_iter = 5000;
  // Solve only k <= n/2 when law, A and rhs are real and fill the rest by symmetry.
  bool use_symmetry = true;
  int jobs = 1;
  bool check_wrap = true;
};

struct Solution {
  Signal u;
  double residual = 0.0;
  double causal_defect = 0.0;
  // Time up to which the rhs vanishes (t0 if it never does).
  double causal_time = 0.0;
};

// Per-frequency condition bound: rcond below this raises SingularFrequency.
inline constexpr double kSingularRcond = 1e-12;

Solution solve_autonomous(const EvoProblem& p, const SolverOptions& opt = {});

// ||u on t <= a||_nu / ||u||_nu, 0 for u == 0.
double causal_defect(const Signal& u, double a);
// Largest a with |rhs(t)| <= 1e-14 max|rhs| for all nodes t <= a (t0 if none).
double support_start(const Signal& f);

double causality_test(const EvoProblem& p, double a, const SolverOptions& opt = {});
// Same measurement for an arbitrary linear operator on signals.
double causality_test(const std::function<Signal(const Signal&)>& op, const Signal& rhs, double a);
double nu_independence_test(const EvoProblem& p, double nu2, const SolverOptions& opt = {});

// Backward-difference space-time discretization for affine laws M0 + z M1.
Solution dense_oracle(const EvoProblem& p);
inline constexpr int kOracleMaxSize = 20000;

// Affine decomposition M(z) = M0 + z M1, or UnsupportedLaw.
std::pair<SpMatC, SpMatC> affine_parts(const MaterialLaw& law);

// Weighted space-time norm using the problem's spatial quadrature.
double state_norm(const EvoProblem& p, const Signal& u);
bool norm_bound_check(const EvoProblem& p, const SolverOptions& opt = {});
// ||u|| c_est / ||F|| (<= 1 when the bound holds).
double norm_ratio(const EvoProblem& p, const Solution& s);

}  // namespace evokit
