#pragma once

#include <functional>
#include <string>
#include <vector>

#include "evokit/evo_solver.hpp"
#include "evokit/linalg.hpp"
#include "evokit/time_calculus.hpp"

namespace evokit {

// d/dt (M0(t) u) + M1(t) u: multiplication-form time-dependent material law.
struct TimeVaryingLaw {
  std::function<SpMat(double)> M0;
  std::function<SpMat(double)> M1;
  double lip_M0 = 0.0;
  int dim = 1;

  static TimeVaryingLaw constant(const SpMat& m0, const SpMat& m1);
};

// Samples the Lipschitz bound, selfadjointness and non-negativity of M0.
void validate_law(const TimeVaryingLaw& law, const std::vector<double>& t_samples);

// Central-difference step used for dM0/dt.
double derivative_step(double t);
// lambda_min(nu M0(t) + dM0/dt / 2 + Re M1(t)).
double nonauto_posdef_value(const TimeVaryingLaw& law, double nu, double t);
double check_nonauto_posdef(const TimeVaryingLaw& law, double nu, const std::vector<double>& t_samples);

// Delay term B u(t + h), h <= 0 and grid-aligned, read from the step history.
struct DelayTerm {
  double h = 0.0;
  SpMat B;
};

struct StepOptions {
  std::vector<DelayTerm> delays;
  bool check_posdef = true;
};

// Backward scheme (M0(t_k) u_k - M0(t_{k-1}) u_{k-1})/dt + M1(t_k) u_k + A u_k = f_k,
// zero history before the first node.
Solution solve_nonauto(const TimeVaryingLaw& law, const SpMat& A, const Signal& rhs,
                       const StepOptions& opt = {});

// Maximal monotone relation through its resolvent (lambda, x) -> (1 + lambda A)^{-1} x.
struct MonotoneRelation {
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> resolvent;
  bool zero_in_graph = true;
  std::string name;
};

// k * Sign, componentwise; resolvent is soft thresholding at lambda * k.
MonotoneRelation relation_sign(double k = 1.0);
// Componentwise arctan; resolvent by a safeguarded scalar Newton solve.
MonotoneRelation relation_arctan();
MonotoneRelation relation_zero();
// Built-in names: sign, soft_threshold:k, arctan, zero.
MonotoneRelation relation_from_name(const std::string& spec);

// max ||J x - J y|| / ||x - y|| over random pairs (<= 1 for a valid resolvent).
double resolvent_expansion(const MonotoneRelation& rel, double lambda, int dim, int pairs, unsigned seed);

struct MintyOptions {
  double lambda = -1.0;  // default 1/(2c)
  double damping = 0.5;
  double tol = 1e-10;
  int max_iter = 100000;
};

// x with y in c x + A(x), for the monotone relation A = P - c given by its resolvent.
Eigen::VectorXd minty_inverse(const MonotoneRelation& a, double c, const Eigen::VectorXd& y,
                              const MintyOptions& opt = {});

struct InclusionOptions {
  double damping = 0.5;
  double tol = 1e-10;
  int max_iter = 100000;
};

// (M0 u_k - M0 u_{k-1})/dt + M1 u_k + A(u_k) contains f_k, solved per step by damped
// forward-backward iteration u <- (1-d) u + d J_{tau dt}(u - tau (S u - b)), S = M0 + dt M1.
Solution solve_inclusion(const TimeVaryingLaw& law, const MonotoneRelation& a, const Signal& rhs,
                         const InclusionOptions& opt = {});

}  // namespace evokit
