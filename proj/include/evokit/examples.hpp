#pragma once

#include <string>
#include <vector>

#include "evokit/evo_solver.hpp"
#include "evokit/time_stepper.hpp"

namespace evokit {

// Window [-4, 28): long enough force-free tails for both nu = 1 and nu = 2.
TimeGrid default_grid(double nu = 1.0, int n_t = 2048);

enum class Forcing { bump, heaviside };

// u' + u = f, scalar, M(z) = 1 + z.
EvoProblem example_ode(const TimeGrid& g, Forcing f = Forcing::heaviside);
// Heat on (0, pi), kappa = 1, theta on nodes (Dirichlet), flux on cells; forcing chi(t) sin x.
EvoProblem example_heat(const TimeGrid& g, int n_x = 64, Forcing f = Forcing::bump, double kappa = 1.0);
EvoProblem example_wave(const TimeGrid& g, int n_x = 64);
// Eddy-current Maxwell (eps = 0, mu = sigma = 1) on the Yee grid of the unit cube.
EvoProblem example_eddy_current(const TimeGrid& g, int n = 4);
// Velocity/stress system with M(z) = 1 + z^alpha on the stress block.
EvoProblem example_fractional(const TimeGrid& g, int n_x = 32, double alpha = 0.5);
// Velocity/stress system with the memory kernel k(t) = e^{-t} / 2.
EvoProblem example_integro(const TimeGrid& g, int n_x = 32);
// Toy (p, s) system with eta, alpha in {0,1}: hyperbolic, parabolic and elliptic thirds of [0,1].
EvoProblem example_toy_mixed(const TimeGrid& g, int n_x = 48);

std::vector<std::string> example_names();
EvoProblem make_example(const std::string& name, const TimeGrid& g, int n_x = -1);

// Wave system on [-L, L] whose type changes in space and, through the ramp phi, in time.
struct MixedTypeSetup {
  TimeVaryingLaw law;
  SpMat A;
  Signal rhs;
  Eigen::VectorXd quad;
  int n_u = 0;                    // u DOFs (interior nodes) come first, then v on cells
  std::vector<int> elliptic_dofs; // DOFs whose control volume lies inside ]-eps, 0[
  double eps = 0.5;
};

double ramp(double t);
MixedTypeSetup mixed_type_ramp(int n_x = 64, double L = 2.0, double eps = 0.5, double dt = 1.0 / 128.0,
                               double t0 = -1.0, double t_end = 3.0, double nu = 1.0);
// lambda_min of nu M0 + M0'/2 + Re M1 for this example in closed form.
double mixed_type_posdef_closed_form(double t, double nu);

}  // namespace evokit
