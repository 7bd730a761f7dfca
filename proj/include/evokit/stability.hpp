#pragma once

#include <utility>

#include "evokit/time_calculus.hpp"
#include "evokit/time_stepper.hpp"

namespace evokit {

struct DecayReport {
  double fitted_rate = 0.0;  // +inf when the tail is exactly zero
  double t_start = 0.0;
  double width = 1.0;
  double r2 = 0.0;
  int windows = 0;
  bool exact_zero = false;
  double theoretical = 0.0;  // rate predicted by the example, 0 if none
};

inline constexpr int kMinDecayWindows = 10;

// Least-squares slope of log windowed L2 norms (unweighted) on [tail_start, t_end).
DecayReport measure_decay(const Signal& u, double tail_start, double width = 1.0,
                          const Eigen::VectorXd& quad = {});

// Omega_0 and Omega_1 as subintervals of [0, 1].
struct Partition {
  std::pair<double, double> omega0{0.0, 0.5};
  std::pair<double, double> omega1{0.5, 1.0};
};

struct StabilityOptions {
  int n_x = 32;
  double dt = 1.0 / 32.0;
  double t0 = -1.0;
  double t_end = 31.0;  // (t_end - t0) / dt must be a power of two
  double tail_start = 2.0;
  bool zero_rhs = false;
};

// Stepper problem d/dt diag(chi_0 + chi_1, chi_0) + c + [[0, div_c], [grad, 0]] on [0,1]
// with a bump forcing on [0,1] in time.
struct ParaHyperSetup {
  TimeVaryingLaw law;
  SpMat A;
  Signal rhs;
  Eigen::VectorXd quad;
};
ParaHyperSetup para_hyper_setup(double c, const Partition& part, const StabilityOptions& opt);

DecayReport para_hyper_experiment(double c, const Partition& part = {}, const StabilityOptions& opt = {});
// with_delay subtracts the history term u(t + h).
Signal para_hyper_solution(double c, const Partition& part, const StabilityOptions& opt, double h = 0.0,
                           bool with_delay = false);

// Root nu0 > 0 of nu0 + e^{-nu0 h} = c.
double delay_rate(double c, double h);

DecayReport delay_experiment(double c, double h, const Partition& part = {}, const StabilityOptions& opt = {});

}  // namespace evokit
