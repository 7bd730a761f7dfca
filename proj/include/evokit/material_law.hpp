#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "evokit/linalg.hpp"
#include "evokit/time_calculus.hpp"

namespace evokit {

// Result of evaluating a symbol node: a scalar (acting as c*I) or a matrix.
struct Value {
  bool scalar = true;
  cplx c = 0.0;
  SpMatC m;

  static Value of(cplx c);
  static Value of(SpMatC m);
  SpMatC as_matrix(int dim) const;
};

enum class NodeKind { Const, ScalarPower, Sum, Product, NeumannInverse, ExpDelay, KernelHat };

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind;
  Value constant;            // Const
  double alpha = 0.0;        // ScalarPower exponent; ExpDelay h
  std::vector<Expr> children;
  double q = 0.0;            // NeumannInverse certified bound
  int terms = -1;            // NeumannInverse fixed truncation J (-1: adaptive)
  std::shared_ptr<const Kernel> kernel;  // KernelHat

  Value eval(cplx z) const;
};

Expr constant(cplx c);
Expr constant(const SpMatC& m);
Expr constant(const Eigen::MatrixXcd& m);
Expr zpow(double alpha);
Expr sum(std::vector<Expr> children);
Expr product(std::vector<Expr> children);
// (1 + E)^{-1}; q certified by sampling |E| on the boundary circle of B(r, r).
Expr neumann_inverse(Expr e, double r, int terms = -1);
Expr exp_delay(double h);
// Trapezoidal Laplace transform of the kernel evaluated at 1/z.
Expr kernel_hat(Kernel k);

// Series controls for NeumannInverse.
inline constexpr double kNeumannTermTol = 1e-14;
inline constexpr int kNeumannMaxTerms = 200;
// Certified q is the sampled maximum inflated by this factor.
inline constexpr double kNeumannQInflation = 1.01;

struct MaterialLaw {
  Expr expr;
  double r = 1.0;
  int dim = 1;

  MaterialLaw() = default;
  MaterialLaw(Expr e, double r, int dim);

  SpMatC eval_sparse(cplx z) const;
  Eigen::MatrixXcd eval(cplx z) const;
  bool in_region(cplx z) const { return std::abs(z - r) < r; }
  MaterialLaw operator+(const MaterialLaw& o) const;
  MaterialLaw scaled(cplx c) const;
};

struct PositivityReport {
  double c_est = 0.0;
  cplx argmin_z = 0.0;
  int samples = 0;
  bool pass = false;
};

// Polar sample set over B(r, r): centre plus n_rad radii (up to r - eps_z) x n_ang angles.
std::vector<cplx> positivity_samples(double r, int n_rad, int n_ang);
std::vector<cplx> stability_samples(double nu_prime, int samples);

// lambda_min of the Hermitian part of z^{-1} M(z).
double positivity_value(const MaterialLaw& law, cplx z);

PositivityReport check_positivity(const MaterialLaw& law, double r, int n_rad = 32, int n_ang = 128);
PositivityReport check_stability(const MaterialLaw& law, double nu0, double nu_prime,
                                 int samples = 1024);

// Builders. Block sizes n0 / n1 default to the single-cell toy form.
MaterialLaw build_affine(const SpMatC& m0, const SpMatC& m1, double r = 1.0);
MaterialLaw build_heat(double kappa, int n0 = 1, int n1 = 1, double r = 1.0);
MaterialLaw build_maxwell(const SpMatC& eps, const SpMatC& mu, const SpMatC& sigma, double r = 1.0);
MaterialLaw build_maxwell(const Eigen::MatrixXcd& eps, const Eigen::MatrixXcd& mu,
                          const Eigen::MatrixXcd& sigma, double r = 1.0);
MaterialLaw build_elastic(const Eigen::MatrixXcd& C, int n0 = 1, double r = 1.0);
// diag(1, z (1 + z D^{-1} C)^{-1} D^{-1}).
MaterialLaw build_kelvin_voigt(const Eigen::MatrixXcd& C, const Eigen::MatrixXcd& D, double r,
                               int n0 = 1);
// diag(1, C^{-1} (1 - C^{-1} K(1/z))^{-1}) with scalar modulus c_mod on n1 stress DOFs.
MaterialLaw build_integro(const Kernel& k, double c_mod, double r, int n0 = 1, int n1 = 1);
MaterialLaw build_fractional(const SpMatC& m0,
                             const std::vector<std::pair<double, SpMatC>>& terms,
                             const SpMatC& m1, double r = 1.0);
MaterialLaw build_fractional(const Eigen::MatrixXcd& m0,
                             const std::vector<std::pair<double, Eigen::MatrixXcd>>& terms,
                             const Eigen::MatrixXcd& m1, double r = 1.0);
// z e^{h/z} B: the delay tau_h entering as a zero-order term.
MaterialLaw build_delay(double h, const SpMatC& B, double r = 1.0);

bool check_integro_kernel(const Kernel& k, double nu0);
bool check_fractional_conditions(const Eigen::MatrixXcd& P, const Eigen::MatrixXcd& Q,
                                 const Eigen::MatrixXcd& F, const Eigen::MatrixXcd& m0,
                                 const std::vector<std::pair<double, Eigen::MatrixXcd>>& terms,
                                 const Eigen::MatrixXcd& m1);

}  // namespace evokit
