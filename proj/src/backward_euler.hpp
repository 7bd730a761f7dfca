#pragma once

// Shared backward-difference step used by the space-time oracle and the time stepper, so
// that both produce identical arithmetic on autonomous affine problems.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "evokit/error.hpp"

namespace evokit::detail {

using RSp = Eigen::SparseMatrix<double>;

inline RSp over_dt(const RSp& m0, double dt) { return RSp(m0 * (1.0 / dt)); }

// M0/dt + M1 + A.
inline RSp step_matrix(const RSp& m0_dt, const RSp& m1, const RSp& a) { return RSp(m0_dt + m1 + a); }

class StepFactor {
 public:
  void factor(const RSp& s) {
    s_ = s;
    s_.makeCompressed();
    lu_.compute(s_);
    if (lu_.info() != Eigen::Success) fail(ErrorCode::StepSingular, "step matrix is numerically singular");
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = lu_.solve(b);
    double nb = b.norm();
    if (!x.allFinite() || (s_ * x - b).norm() > 1e-8 * std::max(nb, 1e-300) + 1e-300)
      fail(ErrorCode::StepSingular, "step solve failed to reproduce the right-hand side");
    return x;
  }
  const RSp& matrix() const { return s_; }

 private:
  RSp s_;
  mutable Eigen::SparseLU<RSp> lu_;
};

inline bool same_matrix(const RSp& a, const RSp& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
  RSp d = a - b;
  for (int k = 0; k < d.outerSize(); ++k)
    for (RSp::InnerIterator it(d, k); it; ++it)
      if (it.value() != 0.0) return false;
  return true;
}

}  // namespace evokit::detail
