#pragma once

#include <functional>
#include <string>
#include <vector>

#include "evokit/evo_solver.hpp"
#include "evokit/material_law.hpp"

namespace evokit {

// 1-periodic coefficient profile: a piecewise-constant table on [0,1) or a callable.
struct PeriodicProfile {
  std::vector<double> breaks;  // 0 = b_0 < ... < b_k = 1
  std::vector<double> values;  // value on [b_i, b_{i+1})
  std::function<double(double)> fn;
  double lo = 0.0, hi = 0.0;   // recorded value bounds
  std::string name;

  static PeriodicProfile table(std::vector<double> breaks, std::vector<double> values, std::string name = {});
  static PeriodicProfile callable(std::function<double(double)> f, std::string name = {}, int probe = 4096);
  static PeriodicProfile constant(double c);

  bool is_table() const { return !values.empty(); }
  double operator()(double x) const;
  // Mean of the profile over [a, b] (arbitrary reals, periodic extension).
  double average(double a, double b) const;
  PeriodicProfile map(const std::function<double(double)>& g) const;
  PeriodicProfile reciprocal() const;
};

// The two-valued profile 1/2 on [0,1/2), 1 on [1/2,1) and its constant companion 3/4.
PeriodicProfile profile_a1();
PeriodicProfile profile_a2();
// Built-in names: a1, a2, const:c.
PeriodicProfile profile_from_name(const std::string& name);

// Integral over one period; exact for tables.
double weak_star_mean(const PeriodicProfile& base);
// b_l = mean of base^l, l = 1..L.
std::vector<double> moments(const PeriodicProfile& base, int L);

struct WeakConvergenceReport {
  std::vector<int> n_list;
  std::vector<std::string> test_names;
  // |<phi_i, u_n - u_lim>| / (||phi_i|| ||u_lim||); rows follow n_list.
  Eigen::MatrixXd pairings;
  // ||u_n - u_lim|| / ||u_lim||.
  std::vector<double> strong_gap;
  // Exponent p of a fitted max-pairing decay C n^{-p}.
  double rate_estimate = 0.0;
  double effective_coefficient = 0.0;
  double reference = 0.0;

  double max_pairing(int row) const { return pairings.row(row).maxCoeff(); }
};

// 8 Fourier modes and 8 hat functions on [0,1].
std::vector<std::string> test_family_names();
double test_function(int i, double x);

struct EllipticHomOptions {
  int n_x = 1024;
  int jobs = 1;
};

// -(a(n x) u')' = f on [0,1], Dirichlet, against the harmonic-mean limit.
WeakConvergenceReport elliptic_hom_experiment(const PeriodicProfile& base, const std::function<double(double)>& f,
                                              const std::vector<int>& n_list, const EllipticHomOptions& opt = {});

struct HomLimit {
  MaterialLaw law;
  double q = 0.0;          // sampled sup |S| on B(r, r)
  double remainder = 0.0;  // certified truncation bound
};

// M(z) = 1 + sum_{j=1..J} S(z)^j with S(z) = -sum_l (-z)^l b_l (a limit of z -> (1 + z a_n) in
// the sense of (d/dt + a_n)^{-1}).
HomLimit ode_hom_limit(const std::vector<double>& moments, int J, double nu);
inline constexpr double kHomMaxQ = 0.9;

struct OdeHomOptions {
  int n_x = 1024;
  double t0 = -2.0;
  double t_len = 16.0;
  int n_t = 2048;
  // Truncation error of the limit law grows like e^{nu t} in the time domain, so the
  // reference solve uses longer series than the L = J = 8 law examples.
  int L = 24;
  int J = 24;
  int jobs = 1;
};

// u_n' + a(n x) u_n = f on a grid of x values against the limit law from the moments.
WeakConvergenceReport ode_hom_experiment(const PeriodicProfile& base, const std::function<double(double)>& f,
                                         const std::vector<int>& n_list, double nu,
                                         const OdeHomOptions& opt = {});

struct MixedHomOptions {
  int n_x = 0;  // cells; 0 picks 8 * max n
  double nu = 1.0;
  double t0 = -4.0;
  double t_len = 32.0;
  int n_t = 512;
  int jobs = 1;
};

// The oscillating indicator system for index n on [0,1]; n = 0 gives the constant 1/2 limit.
EvoProblem mixed_hom_problem(int n, const MixedHomOptions& opt);
WeakConvergenceReport mixed_hom_experiment(const std::vector<int>& n_list, const MixedHomOptions& opt = {});

void write_report_csv(const WeakConvergenceReport& r, std::ostream& os);

}  // namespace evokit
