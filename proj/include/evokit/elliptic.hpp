#pragma once

#include <functional>
#include <memory>

#include "evokit/spatial_ops.hpp"

namespace evokit {

using VecMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// G^* a G u = f with G the constrained operator G_c of the pair. The coefficient is either a
// linear field on W (one value per W DOF) or a relation given by forward and inverse maps.
struct EllipticProblem {
  OperatorPair pair;
  Eigen::VectorXd a_field;
  VecMap a_forward;
  VecMap a_inverse;
  double lip_inverse = 1.0;  // declared Lipschitz constant of a^{-1} on R(G_c)
  double lip_forward = 1.0;  // Lipschitz constant of a, sets the fixed-point step
  Eigen::VectorXd f;         // values on V_c, paired with the V quadrature

  bool linear() const { return a_field.size() > 0; }
  static EllipticProblem make_linear(const OperatorPair& pair, Eigen::VectorXd a, Eigen::VectorXd f);
  static EllipticProblem make_nonlinear(const OperatorPair& pair, VecMap forward, VecMap inverse,
                                        double lip_inverse, double lip_forward, Eigen::VectorXd f);
};

// Orthogonal projection onto R(G_c) in the W inner product, with B_G^{-1} and the dual lift.
class RangeProjector {
 public:
  explicit RangeProjector(const OperatorPair& pair);
  ~RangeProjector();
  RangeProjector(RangeProjector&&) noexcept;
  RangeProjector& operator=(RangeProjector&&) noexcept;

  int rank() const;
  // Orthonormal (V_c quadrature) basis of N(G_c).
  const Eigen::MatrixXd& kernel() const;
  Eigen::VectorXd project(const Eigen::VectorXd& w) const;
  // The element u of N(G_c)^perp with G_c u = p, for p in R(G_c).
  Eigen::VectorXd preimage(const Eigen::VectorXd& p) const;
  // The element q of R(G_c) with G_c^* q = f.
  Eigen::VectorXd lift(const Eigen::VectorXd& f) const;
  const SpMat& Gc() const;
  const Eigen::VectorXd& quad_c() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct EllipticResult {
  Eigen::VectorXd u;     // on V_c
  Eigen::VectorXd flux;  // p = G_c u in R(G_c)
  double residual = 0.0; // relative weak-form residual
  int iterations = 0;
};

struct EllipticOptions {
  double tol = 1e-10;
  int max_iter = 100000;
  // Start of the fixed-point iteration in R(G_c) (default: the lifted data).
  Eigen::VectorXd p0;
  int lipschitz_pairs = 16;
};

EllipticResult solve_divergence(const EllipticProblem& p, const EllipticOptions& opt = {});

// Midpoints of n equal cells of [a, b].
Eigen::VectorXd cell_midpoints(int n, double a, double b);

// a^{-1} psi for the coefficient alpha on x >= 0, beta on x < 0 over n cell midpoints of
// [-1/2, 1/2]. Dirichlet projects onto {1}^perp; Neumann inverts the coefficient directly.
Eigen::VectorXd indefinite_example(double alpha, double beta, const Eigen::VectorXd& psi,
                                   Boundary bc = Boundary::dirichlet);
// The coefficient field of the same example.
Eigen::VectorXd indefinite_coefficient(double alpha, double beta, int n);

// B^{-1} f after checking lambda_min(Re B) > 0.
Eigen::VectorXcd lax_milgram_solve(const Eigen::MatrixXcd& B, const Eigen::VectorXcd& f);
double coercivity_constant(const Eigen::MatrixXcd& B);

}  // namespace evokit
