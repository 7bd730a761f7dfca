#include "evokit/elliptic.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>
#include <cmath>
#include <random>

#include "evokit/error.hpp"

namespace evokit {

namespace {

using Trip = Eigen::Triplet<double>;

SpMat diag_of(const Eigen::VectorXd& d) {
  std::vector<Trip> t;
  for (int i = 0; i < d.size(); ++i) t.emplace_back(i, i, d[i]);
  SpMat m(d.size(), d.size());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

double wnorm(const Eigen::VectorXd& q, const Eigen::VectorXd& x) {
  return std::sqrt((q.array() * x.array().square()).sum());
}

// [K Y; Y^T 0] with dense border columns Y.
SpMat bordered(const SpMat& K, const Eigen::MatrixXd& Y) {
  const int n = static_cast<int>(K.rows()), m = static_cast<int>(Y.cols());
  std::vector<Trip> t;
  for (int c = 0; c < K.outerSize(); ++c)
    for (SpMat::InnerIterator it(K, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i)
      if (Y(i, j) != 0.0) {
        t.emplace_back(i, n + j, Y(i, j));
        t.emplace_back(n + j, i, Y(i, j));
      }
  SpMat s(n + m, n + m);
  s.setFromTriplets(t.begin(), t.end());
  s.makeCompressed();
  return s;
}

}  // namespace

EllipticProblem EllipticProblem::make_linear(const OperatorPair& pair, Eigen::VectorXd a, Eigen::VectorXd f) {
  if (a.size() != pair.n_W()) fail(ErrorCode::ShapeMismatch, "coefficient field must live on W");
  if (f.size() != pair.n_c()) fail(ErrorCode::ShapeMismatch, "data must live on V_c");
  EllipticProblem p;
  p.pair = pair;
  p.a_field = std::move(a);
  p.f = std::move(f);
  double amin = p.a_field.cwiseAbs().minCoeff();
  if (amin == 0.0) fail(ErrorCode::ZeroCoefficient, "coefficient vanishes somewhere");
  p.lip_inverse = 1.0 / amin;
  p.lip_forward = p.a_field.cwiseAbs().maxCoeff();
  return p;
}

EllipticProblem EllipticProblem::make_nonlinear(const OperatorPair& pair, VecMap forward, VecMap inverse,
                                                double lip_inverse, double lip_forward, Eigen::VectorXd f) {
  if (f.size() != pair.n_c()) fail(ErrorCode::ShapeMismatch, "data must live on V_c");
  if (!(lip_inverse > 0.0) || !(lip_forward > 0.0)) fail(ErrorCode::Validation, "Lipschitz constants must be positive");
  EllipticProblem p;
  p.pair = pair;
  p.a_forward = std::move(forward);
  p.a_inverse = std::move(inverse);
  p.lip_inverse = lip_inverse;
  p.lip_forward = lip_forward;
  p.f = std::move(f);
  return p;
}

struct RangeProjector::Impl {
  SpMat gc;
  Eigen::VectorXd qw, qc;
  Eigen::MatrixXd kernel;
  int rank = 0;
  Eigen::SparseLU<SpMat> lu;
  int n = 0;

  Eigen::VectorXd solve_k0(const Eigen::VectorXd& b) const {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + kernel.cols());
    rhs.head(n) = b;
    Eigen::VectorXd x = lu.solve(rhs);
    return x.head(n);
  }
};

RangeProjector::RangeProjector(const OperatorPair& pair) : impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  m.gc = pair.Gc();
  m.qw = pair.quad_W;
  auto idx = pair.c_indices();
  m.qc.resize(static_cast<int>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) m.qc[static_cast<int>(k)] = pair.quad_V[idx[k]];
  m.n = static_cast<int>(idx.size());
  SpMat k0 = SpMat(m.gc.transpose()) * diag_of(m.qw) * m.gc;
  k0.makeCompressed();

  // Rank-revealing QR of the symmetric K0: trailing Q columns span N(K0) = N(G_c).
  Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>> qr;
  qr.compute(k0);
  if (qr.info() != Eigen::Success) fail(ErrorCode::DegenerateBasis, "QR of the pair failed");
  m.rank = static_cast<int>(qr.rank());
  const int defect = m.n - m.rank;
  Eigen::MatrixXd z(m.n, defect);
  for (int j = 0; j < defect; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m.n);
    e[m.rank + j] = 1.0;
    Eigen::VectorXd qe = qr.matrixQ() * e;
    z.col(j) = qe;
  }
  // Orthonormalize in the V_c quadrature.
  for (int j = 0; j < defect; ++j) {
    for (int i = 0; i < j; ++i) z.col(j) -= (m.qc.array() * z.col(i).array() * z.col(j).array()).sum() * z.col(i);
    z.col(j) /= wnorm(m.qc, z.col(j));
  }
  m.kernel = z;
  Eigen::MatrixXd y = m.qc.asDiagonal() * z;
  SpMat s = bordered(k0, y);
  m.lu.compute(s);
  if (m.lu.info() != Eigen::Success) fail(ErrorCode::DegenerateBasis, "graph system of the pair is singular");
}

RangeProjector::~RangeProjector() = default;
RangeProjector::RangeProjector(RangeProjector&&) noexcept = default;
RangeProjector& RangeProjector::operator=(RangeProjector&&) noexcept = default;

int RangeProjector::rank() const { return impl_->rank; }
const Eigen::MatrixXd& RangeProjector::kernel() const { return impl_->kernel; }
const SpMat& RangeProjector::Gc() const { return impl_->gc; }
const Eigen::VectorXd& RangeProjector::quad_c() const { return impl_->qc; }

Eigen::VectorXd RangeProjector::project(const Eigen::VectorXd& w) const {
  const Impl& m = *impl_;
  Eigen::VectorXd b = m.gc.transpose() * (m.qw.array() * w.array()).matrix();
  return m.gc * m.solve_k0(b);
}

Eigen::VectorXd RangeProjector::preimage(const Eigen::VectorXd& p) const {
  const Impl& m = *impl_;
  Eigen::VectorXd b = m.gc.transpose() * (m.qw.array() * p.array()).matrix();
  return m.solve_k0(b);
}

Eigen::VectorXd RangeProjector::lift(const Eigen::VectorXd& f) const {
  const Impl& m = *impl_;
  if (f.size() != m.n) fail(ErrorCode::ShapeMismatch, "data must live on V_c");
  Eigen::VectorXd qf = (m.qc.array() * f.array()).matrix();
  if (m.kernel.cols() > 0) {
    Eigen::VectorXd c = m.kernel.transpose() * qf;
    if (c.norm() > 1e-10 * std::max(1.0, wnorm(m.qc, f)))
      fail(ErrorCode::Validation, "data does not annihilate the kernel of G_c");
  }
  return m.gc * m.solve_k0(qf);
}

EllipticResult solve_divergence(const EllipticProblem& p, const EllipticOptions& opt) {
  const OperatorPair& pair = p.pair;
  if (p.f.size() != pair.n_c()) fail(ErrorCode::ShapeMismatch, "data must live on V_c");
  RangeProjector proj(pair);
  const SpMat& gc = proj.Gc();
  const Eigen::VectorXd& qw = pair.quad_W;
  const Eigen::VectorXd& qc = proj.quad_c();
  const Eigen::VectorXd qf = (qc.array() * p.f.array()).matrix();
  EllipticResult res;
  const Eigen::VectorXd q = proj.lift(p.f);

  if (p.linear()) {
    if (p.a_field.size() != pair.n_W()) fail(ErrorCode::ShapeMismatch, "coefficient field must live on W");
    if (p.a_field.cwiseAbs().minCoeff() == 0.0) fail(ErrorCode::ZeroCoefficient, "coefficient vanishes somewhere");
    // (iota^* a iota)^{-1} q: p in R(G_c) with a p - q orthogonal to R(G_c).
    SpMat ka = SpMat(gc.transpose()) * diag_of((qw.array() * p.a_field.array()).matrix()) * gc;
    Eigen::MatrixXd y = qc.asDiagonal() * proj.kernel();
    SpMat s = bordered(ka, y);
    Eigen::SparseLU<SpMat> lu;
    lu.compute(s);
    if (lu.info() != Eigen::Success) fail(ErrorCode::SingularCoupling, "projected coefficient is not invertible");
    // Inverse-norm estimate by power iteration on the factored system.
    const int ns = static_cast<int>(s.rows());
    Eigen::VectorXd v = Eigen::VectorXd::Ones(ns).normalized();
    double inv_norm = 0.0;
    for (int it = 0; it < 30; ++it) {
      Eigen::VectorXd w = lu.solve(v);
      double nw = w.norm();
      if (!std::isfinite(nw)) fail(ErrorCode::SingularCoupling, "projected coefficient is not invertible");
      inv_norm = nw;
      v = w / nw;
    }
    double s_norm = norm_bound(to_complex(s));
    if (inv_norm * s_norm > 1e12) fail(ErrorCode::SingularCoupling, "projected coefficient is numerically singular");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ns);
    rhs.head(gc.cols()) = gc.transpose() * (qw.array() * q.array()).matrix();
    Eigen::VectorXd phi = lu.solve(rhs).head(gc.cols());
    res.flux = gc * phi;
    res.u = proj.preimage(res.flux);
    res.iterations = 1;
    Eigen::VectorXd r = gc.transpose() * (qw.array() * p.a_field.array() * (gc * res.u).array()).matrix() - qf;
    double nf = qf.norm();
    res.residual = nf > 0.0 ? r.norm() / nf : r.norm();
    return res;
  }

  if (!p.a_forward || !p.a_inverse) fail(ErrorCode::Validation, "nonlinear coefficient needs forward and inverse maps");
  // Sampled Lipschitz bound of a^{-1} on R(G_c).
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double scale = std::max(1.0, wnorm(qw, q));
  for (int k = 0; k < opt.lipschitz_pairs; ++k) {
    Eigen::VectorXd x(pair.n_W()), z(pair.n_W());
    for (int i = 0; i < pair.n_W(); ++i) {
      x[i] = scale * nd(rng);
      z[i] = scale * nd(rng);
    }
    x = proj.project(x);
    z = proj.project(z);
    double d = wnorm(qw, x - z);
    if (d == 0.0) continue;
    double ratio = wnorm(qw, p.a_inverse(x) - p.a_inverse(z)) / d;
    if (ratio > p.lip_inverse * (1.0 + 1e-9))
      fail(ErrorCode::LipschitzViolated, "sampled a^{-1} exceeds its declared Lipschitz constant");
  }
  const double tau = 1.0 / (p.lip_inverse * p.lip_forward * p.lip_forward);
  Eigen::VectorXd pk = opt.p0.size() == pair.n_W() ? proj.project(opt.p0) : q;
  bool done = false;
  for (int it = 0; it < opt.max_iter; ++it) {
    Eigen::VectorXd next = pk - tau * proj.project(p.a_forward(pk) - q);
    double step = wnorm(qw, next - pk);
    pk = next;
    res.iterations = it + 1;
    if (step <= opt.tol * std::max(1.0, wnorm(qw, pk))) {
      done = true;
      break;
    }
  }
  if (!done) fail(ErrorCode::NoConvergence, "projected fixed-point iteration did not converge");
  res.flux = pk;
  res.u = proj.preimage(pk);
  Eigen::VectorXd r = gc.transpose() * (qw.array() * p.a_forward(gc * res.u).array()).matrix() - qf;
  double nf = qf.norm();
  res.residual = nf > 0.0 ? r.norm() / nf : r.norm();
  return res;
}

Eigen::VectorXd cell_midpoints(int n, double a, double b) {
  if (n < 1) fail(ErrorCode::Validation, "need at least one cell");
  Eigen::VectorXd x(n);
  const double h = (b - a) / n;
  for (int i = 0; i < n; ++i) x[i] = a + (i + 0.5) * h;
  return x;
}

Eigen::VectorXd indefinite_coefficient(double alpha, double beta, int n) {
  Eigen::VectorXd x = cell_midpoints(n, -0.5, 0.5), a(n);
  for (int i = 0; i < n; ++i) a[i] = x[i] >= 0.0 ? alpha : beta;
  return a;
}

Eigen::VectorXd indefinite_example(double alpha, double beta, const Eigen::VectorXd& psi, Boundary bc) {
  if (alpha == 0.0 || beta == 0.0) fail(ErrorCode::ZeroCoefficient, "alpha and beta must be non-zero");
  const int n = static_cast<int>(psi.size());
  if (n < 2) fail(ErrorCode::Validation, "need at least two cells");
  const double h = 1.0 / n;
  Eigen::VectorXd ainv = indefinite_coefficient(alpha, beta, n).cwiseInverse();
  Eigen::VectorXd g = ainv.cwiseProduct(psi);
  if (bc == Boundary::neumann) return g;
  if (std::abs(h * psi.sum()) > 1e-12 * std::max(1.0, psi.cwiseAbs().maxCoeff()))
    fail(ErrorCode::Validation, "psi must be orthogonal to constants");
  // <1|a~^{-1} 1> and <1|a~^{-1} psi> by the midpoint rule.
  const double denom = h * ainv.sum();
  if (std::abs(denom) <= 1e-14 * (1.0 / std::abs(alpha) + 1.0 / std::abs(beta)))
    fail(ErrorCode::SingularCoupling, "alpha = -beta: <1|a^{-1}1> vanishes");
  const double num = h * g.sum();
  return g - (num / denom) * ainv;
}

double coercivity_constant(const Eigen::MatrixXcd& B) {
  if (B.rows() != B.cols()) fail(ErrorCode::ShapeMismatch, "form matrix must be square");
  return lambda_min_herm(B);
}

Eigen::VectorXcd lax_milgram_solve(const Eigen::MatrixXcd& B, const Eigen::VectorXcd& f) {
  if (B.rows() != f.size()) fail(ErrorCode::ShapeMismatch, "data size does not match the form");
  const double c = coercivity_constant(B);
  if (!(c > 1e-12 * std::max(1.0, B.cwiseAbs().maxCoeff()))) fail(ErrorCode::NotCoercive, "Re B is not positive definite");
  return B.partialPivLu().solve(f);
}

}  // namespace evokit
