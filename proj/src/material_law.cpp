#include "evokit/material_law.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "evokit/error.hpp"

namespace evokit {

namespace {

constexpr double kPi = 3.14159265358979323846;

Value add(const Value& a, const Value& b) {
  if (a.scalar && b.scalar) return Value::of(a.c + b.c);
  if (a.scalar) return add(b, a);
  if (b.scalar) {
    if (b.c == 0.0) return a;
    return Value::of(SpMatC(a.m + b.c * sparse_identity(static_cast<int>(a.m.rows()))));
  }
  if (a.m.rows() != b.m.rows() || a.m.cols() != b.m.cols())
    fail(ErrorCode::ShapeMismatch, "sum of differently sized symbols");
  return Value::of(SpMatC(a.m + b.m));
}

Value mul(const Value& a, const Value& b) {
  if (a.scalar && b.scalar) return Value::of(a.c * b.c);
  if (a.scalar) return Value::of(SpMatC(a.c * b.m));
  if (b.scalar) return Value::of(SpMatC(b.c * a.m));
  if (a.m.cols() != b.m.rows()) fail(ErrorCode::ShapeMismatch, "product of incompatible symbols");
  return Value::of(SpMatC(a.m * b.m));
}

double value_norm(const Value& v) {
  if (v.scalar) return std::abs(v.c);
  return op_norm(v.m);
}

// sum_j (-E)^j, truncated adaptively or after a fixed number of terms.
Value neumann_series(const Value& e, int terms) {
  const int max_terms = terms >= 0 ? terms : kNeumannMaxTerms;
  if (e.scalar) {
    cplx acc = 1.0, term = 1.0;
    for (int j = 1; j <= max_terms; ++j) {
      term *= -e.c;
      acc += term;
      if (terms < 0 && std::abs(term) < kNeumannTermTol) break;
    }
    return Value::of(acc);
  }
  const int n = static_cast<int>(e.m.rows());
  SpMatC acc = sparse_identity(n), term = sparse_identity(n);
  for (int j = 1; j <= max_terms; ++j) {
    term = SpMatC(-(e.m * term));
    term.prune(cplx(0.0), 0.0);
    acc += term;
    if (terms < 0 && norm_bound(term) < kNeumannTermTol) break;
  }
  return Value::of(acc);
}

std::vector<cplx> boundary_circle(double r, int n) {
  std::vector<cplx> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    double th = 2.0 * kPi * (i + 0.5) / n;
    out.emplace_back(r + r * std::cos(th), r * std::sin(th));
  }
  return out;
}

std::shared_ptr<Node> make(NodeKind k) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  return n;
}

SpMatC embed(int n0, const Eigen::MatrixXcd& blk) {
  const int n1 = static_cast<int>(blk.rows());
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(n0 + n1, n0 + n1);
  full.bottomRightCorner(n1, n1) = blk;
  return to_sparse(full);
}

SpMatC block_diag(const SpMatC& a, const SpMatC& b) {
  const int na = static_cast<int>(a.rows()), nb = static_cast<int>(b.rows());
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMatC::InnerIterator it(a, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < b.outerSize(); ++k)
    for (SpMatC::InnerIterator it(b, k); it; ++it)
      trip.emplace_back(na + it.row(), na + it.col(), it.value());
  SpMatC out(na + nb, na + nb);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

void require_hermitian(const Eigen::MatrixXcd& m, const char* what) {
  if (m.rows() != m.cols()) fail(ErrorCode::ShapeMismatch, std::string(what) + " must be square");
  if (!m.allFinite()) fail(ErrorCode::Validation, std::string(what) + " has non-finite entries");
  if (!is_hermitian(m, 1e-12)) fail(ErrorCode::SpdViolation, std::string(what) + " must be selfadjoint");
}

void require_spd(const Eigen::MatrixXcd& m, const char* what) {
  require_hermitian(m, what);
  if (lambda_min_herm(m) <= 0.0) fail(ErrorCode::SpdViolation, std::string(what) + " must be positive definite");
}

}  // namespace

Value Value::of(cplx c) {
  Value v;
  v.scalar = true;
  v.c = c;
  return v;
}

Value Value::of(SpMatC m) {
  Value v;
  v.scalar = false;
  v.m = std::move(m);
  return v;
}

SpMatC Value::as_matrix(int dim) const {
  if (!scalar) {
    if (m.rows() != dim || m.cols() != dim) fail(ErrorCode::ShapeMismatch, "symbol value has wrong size");
    return m;
  }
  return SpMatC(c * sparse_identity(dim));
}

Value Node::eval(cplx z) const {
  switch (kind) {
    case NodeKind::Const:
      return constant;
    case NodeKind::ScalarPower: {
      double ra = std::round(alpha);
      if (ra == alpha && alpha <= 16) {
        cplx acc = 1.0;
        for (int i = 0; i < static_cast<int>(ra); ++i) acc *= z;
        return Value::of(acc);
      }
      return Value::of(std::pow(z, alpha));
    }
    case NodeKind::Sum: {
      Value acc = Value::of(cplx(0.0));
      for (const auto& c : children) acc = add(acc, c->eval(z));
      return acc;
    }
    case NodeKind::Product: {
      Value acc = Value::of(cplx(1.0));
      for (const auto& c : children) acc = mul(acc, c->eval(z));
      return acc;
    }
    case NodeKind::NeumannInverse: {
      Value e = children.front()->eval(z);
      double bound = e.scalar ? std::abs(e.c) : norm_bound(e.m);
      if (bound > q) bound = value_norm(e);
      if (bound > q) fail(ErrorCode::Divergence, "Neumann series child exceeds its certified bound");
      return neumann_series(e, terms);
    }
    case NodeKind::ExpDelay:
      return Value::of(std::exp(alpha / z));
    case NodeKind::KernelHat: {
      Eigen::MatrixXcd v = kernel->laplace(1.0 / z);
      if (v.rows() == 1) return Value::of(v(0, 0));
      return Value::of(to_sparse(v));
    }
  }
  fail(ErrorCode::Validation, "unknown node kind");
}

Expr constant(cplx c) {
  auto n = make(NodeKind::Const);
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) fail(ErrorCode::Validation, "non-finite constant");
  n->constant = Value::of(c);
  return n;
}

Expr constant(const SpMatC& m) {
  auto n = make(NodeKind::Const);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMatC::InnerIterator it(m, k); it; ++it)
      if (!std::isfinite(it.value().real()) || !std::isfinite(it.value().imag()))
        fail(ErrorCode::Validation, "non-finite constant");
  if (m.rows() != m.cols()) fail(ErrorCode::ShapeMismatch, "constant must be square");
  n->constant = Value::of(m);
  return n;
}

Expr constant(const Eigen::MatrixXcd& m) { return constant(to_sparse(m)); }

Expr zpow(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail(ErrorCode::Validation, "power must be >= 0");
  auto n = make(NodeKind::ScalarPower);
  n->alpha = alpha;
  return n;
}

Expr sum(std::vector<Expr> children) {
  auto n = make(NodeKind::Sum);
  n->children = std::move(children);
  return n;
}

Expr product(std::vector<Expr> children) {
  auto n = make(NodeKind::Product);
  n->children = std::move(children);
  return n;
}

Expr neumann_inverse(Expr e, double r, int terms) {
  if (!(r > 0.0)) fail(ErrorCode::Validation, "radius must be positive");
  double q = 0.0;
  for (cplx z : boundary_circle(r, 256)) q = std::max(q, value_norm(e->eval(z)));
  q *= kNeumannQInflation;
  if (!(q < 1.0)) fail(ErrorCode::Divergence, "Neumann series child is not a strict contraction on B(r,r)");
  auto n = make(NodeKind::NeumannInverse);
  n->children = {std::move(e)};
  n->q = q;
  n->terms = terms;
  return n;
}

Expr exp_delay(double h) {
  if (!(h <= 0.0)) fail(ErrorCode::Validation, "delay h must be <= 0");
  auto n = make(NodeKind::ExpDelay);
  n->alpha = h;
  return n;
}

Expr kernel_hat(Kernel k) {
  auto n = make(NodeKind::KernelHat);
  for (const auto& s : k.samples)
    if (!s.allFinite()) fail(ErrorCode::Validation, "kernel has non-finite samples");
  n->kernel = std::make_shared<const Kernel>(std::move(k));
  return n;
}

MaterialLaw::MaterialLaw(Expr e, double r_, int dim_) : expr(std::move(e)), r(r_), dim(dim_) {
  if (!(r > 0.0)) fail(ErrorCode::Validation, "law radius must be positive");
  if (dim < 1) fail(ErrorCode::Validation, "law dimension must be >= 1");
}

SpMatC MaterialLaw::eval_sparse(cplx z) const { return expr->eval(z).as_matrix(dim); }

Eigen::MatrixXcd MaterialLaw::eval(cplx z) const { return Eigen::MatrixXcd(eval_sparse(z)); }

MaterialLaw MaterialLaw::operator+(const MaterialLaw& o) const {
  if (dim != o.dim) fail(ErrorCode::ShapeMismatch, "adding laws of different dimension");
  return MaterialLaw(sum({expr, o.expr}), std::min(r, o.r), dim);
}

MaterialLaw MaterialLaw::scaled(cplx c) const { return MaterialLaw(product({constant(c), expr}), r, dim); }

std::vector<cplx> positivity_samples(double r, int n_rad, int n_ang) {
  if (!(r > 0.0)) fail(ErrorCode::Validation, "radius must be positive");
  if (n_rad < 8 || n_ang < 8) fail(ErrorCode::Validation, "sample counts must be >= 8");
  const double eps = 1e-9 * r;
  std::vector<cplx> out;
  out.reserve(1 + n_rad * n_ang);
  out.emplace_back(r, 0.0);
  for (int i = 1; i <= n_rad; ++i) {
    double rho = (r - eps) * i / n_rad;
    for (int j = 0; j < n_ang; ++j) {
      double th = 2.0 * kPi * j / n_ang;
      out.emplace_back(r + rho * std::cos(th), rho * std::sin(th));
    }
  }
  return out;
}

std::vector<cplx> stability_samples(double nu_prime, int samples) {
  if (!(nu_prime > 0.0)) fail(ErrorCode::Validation, "nu' must be positive");
  if (samples < 8) fail(ErrorCode::Validation, "sample count must be >= 8");
  const double rho = 0.5 / nu_prime;
  std::vector<cplx> out;
  for (int i = 0; i < samples; ++i) {
    double th = 2.0 * kPi * (i + 0.5) / samples;
    out.emplace_back(-rho + rho * std::cos(th), rho * std::sin(th));
  }
  for (double R : {10.0, 100.0})
    for (int i = 0; i < samples; ++i) {
      double th = 2.0 * kPi * (i + 0.5) / samples;
      cplx z(R * std::cos(th), R * std::sin(th));
      if (std::abs(z + rho) > rho) out.push_back(z);
    }
  return out;
}

double positivity_value(const MaterialLaw& law, cplx z) {
  SpMatC m = law.eval_sparse(z);
  m *= 1.0 / z;
  return lambda_min_herm(m);
}

namespace {

PositivityReport scan(const MaterialLaw& law, const std::vector<cplx>& zs) {
  PositivityReport rep;
  rep.c_est = std::numeric_limits<double>::infinity();
  rep.samples = static_cast<int>(zs.size());
  for (cplx z : zs) {
    double v;
    try {
      v = positivity_value(law, z);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Divergence) throw;
      v = -std::numeric_limits<double>::infinity();
    }
    if (std::isnan(v)) v = -std::numeric_limits<double>::infinity();
    if (v < rep.c_est) {
      rep.c_est = v;
      rep.argmin_z = z;
    }
  }
  rep.pass = rep.c_est > 0.0;
  return rep;
}

}  // namespace

PositivityReport check_positivity(const MaterialLaw& law, double r, int n_rad, int n_ang) {
  return scan(law, positivity_samples(r, n_rad, n_ang));
}

PositivityReport check_stability(const MaterialLaw& law, double nu0, double nu_prime, int samples) {
  if (!(nu_prime > 0.0 && nu_prime < nu0)) fail(ErrorCode::Validation, "need 0 < nu' < nu0");
  return scan(law, stability_samples(nu_prime, samples));
}

MaterialLaw build_affine(const SpMatC& m0, const SpMatC& m1, double r) {
  if (m0.rows() != m1.rows() || m0.rows() != m0.cols() || m1.rows() != m1.cols())
    fail(ErrorCode::ShapeMismatch, "affine law blocks must be square and equal-sized");
  return MaterialLaw(sum({constant(m0), product({zpow(1.0), constant(m1)})}), r,
                     static_cast<int>(m0.rows()));
}

MaterialLaw build_heat(double kappa, int n0, int n1, double r) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) fail(ErrorCode::SpdViolation, "kappa must be positive");
  if (n0 < 1 || n1 < 1) fail(ErrorCode::ShapeMismatch, "block sizes must be >= 1");
  Eigen::VectorXcd d0 = Eigen::VectorXcd::Zero(n0 + n1), d1 = Eigen::VectorXcd::Zero(n0 + n1);
  d0.head(n0).setOnes();
  d1.tail(n1).setConstant(1.0 / kappa);
  return build_affine(diag_sparse(d0), diag_sparse(d1), r);
}

MaterialLaw build_maxwell(const SpMatC& eps, const SpMatC& mu, const SpMatC& sigma, double r) {
  if (eps.rows() != sigma.rows() || eps.rows() != eps.cols() || mu.rows() != mu.cols() ||
      sigma.rows() != sigma.cols())
    fail(ErrorCode::ShapeMismatch, "Maxwell coefficient shapes");
  // Blocks are checked through their sparsity components to keep large fields cheap.
  auto herm_min = [](const SpMatC& m, const char* what) {
    SpMatC d = m - SpMatC(m.adjoint());
    double skew = d.nonZeros() ? d.coeffs().cwiseAbs().maxCoeff() : 0.0;
    if (skew > 1e-12) fail(ErrorCode::SpdViolation, std::string(what) + " must be selfadjoint");
    return lambda_min_herm(m);
  };
  double e_min = herm_min(eps, "eps");
  if (herm_min(mu, "mu") <= 0.0) fail(ErrorCode::SpdViolation, "mu must be positive definite");
  bool eps_zero = eps.nonZeros() == 0 || eps.coeffs().cwiseAbs().maxCoeff() == 0.0;
  if (eps_zero) {
    if (lambda_min_herm(sigma) <= 0.0)
      fail(ErrorCode::SpdViolation, "eddy-current form needs Re sigma positive definite");
  } else if (e_min <= 0.0) {
    fail(ErrorCode::SpdViolation, "eps must be positive definite or zero");
  }
  const int nm = static_cast<int>(mu.rows());
  SpMatC zero_mu(nm, nm);
  SpMatC m0 = block_diag(eps, mu);
  SpMatC m1 = block_diag(sigma, zero_mu);
  return build_affine(m0, m1, r);
}

MaterialLaw build_maxwell(const Eigen::MatrixXcd& eps, const Eigen::MatrixXcd& mu,
                          const Eigen::MatrixXcd& sigma, double r) {
  return build_maxwell(to_sparse(eps), to_sparse(mu), to_sparse(sigma), r);
}

MaterialLaw build_elastic(const Eigen::MatrixXcd& C, int n0, double r) {
  require_spd(C, "C");
  const int n1 = static_cast<int>(C.rows());
  Eigen::MatrixXcd m0 = Eigen::MatrixXcd::Zero(n0 + n1, n0 + n1);
  m0.topLeftCorner(n0, n0).setIdentity();
  m0.bottomRightCorner(n1, n1) = C.inverse();
  return MaterialLaw(constant(m0), r, n0 + n1);
}

MaterialLaw build_kelvin_voigt(const Eigen::MatrixXcd& C, const Eigen::MatrixXcd& D, double r, int n0) {
  require_hermitian(C, "C");
  require_spd(D, "D");
  if (C.rows() != D.rows()) fail(ErrorCode::ShapeMismatch, "C and D must have equal size");
  const int n1 = static_cast<int>(C.rows());
  Eigen::MatrixXcd dinv = D.inverse();
  Eigen::MatrixXcd top = Eigen::MatrixXcd::Zero(n0 + n1, n0 + n1);
  top.topLeftCorner(n0, n0).setIdentity();
  Expr e = product({zpow(1.0), constant(embed(n0, dinv * C))});
  Expr stress = product({zpow(1.0), neumann_inverse(e, r), constant(embed(n0, dinv))});
  return MaterialLaw(sum({constant(top), stress}), r, n0 + n1);
}

MaterialLaw build_integro(const Kernel& k, double c_mod, double r, int n0, int n1) {
  if (!(c_mod > 0.0)) fail(ErrorCode::SpdViolation, "elastic modulus must be positive");
  if (k.dim != 1) fail(ErrorCode::ShapeMismatch, "integro builder expects a scalar kernel");
  Eigen::VectorXcd top = Eigen::VectorXcd::Zero(n0 + n1), bot = Eigen::VectorXcd::Zero(n0 + n1);
  top.head(n0).setOnes();
  bot.tail(n1).setConstant(1.0 / c_mod);
  Expr e = product({constant(cplx(-1.0 / c_mod)), kernel_hat(k)});
  Expr stress = product({constant(diag_sparse(bot)), neumann_inverse(e, r)});
  return MaterialLaw(sum({constant(diag_sparse(top)), stress}), r, n0 + n1);
}

MaterialLaw build_fractional(const SpMatC& m0, const std::vector<std::pair<double, SpMatC>>& terms,
                             const SpMatC& m1, double r) {
  const int d = static_cast<int>(m0.rows());
  if (m0.cols() != d || m1.rows() != d || m1.cols() != d)
    fail(ErrorCode::ShapeMismatch, "fractional law blocks must be square and equal-sized");
  std::vector<Expr> parts{constant(m0)};
  for (const auto& [alpha, ma] : terms) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::Validation, "fractional orders must lie in (0,1)");
    if (ma.rows() != d || ma.cols() != d) fail(ErrorCode::ShapeMismatch, "fractional term size");
    parts.push_back(product({zpow(alpha), constant(ma)}));
  }
  parts.push_back(product({zpow(1.0), constant(m1)}));
  return MaterialLaw(sum(std::move(parts)), r, d);
}

MaterialLaw build_fractional(const Eigen::MatrixXcd& m0,
                             const std::vector<std::pair<double, Eigen::MatrixXcd>>& terms,
                             const Eigen::MatrixXcd& m1, double r) {
  std::vector<std::pair<double, SpMatC>> sp;
  for (const auto& [a, m] : terms) sp.emplace_back(a, to_sparse(m));
  return build_fractional(to_sparse(m0), sp, to_sparse(m1), r);
}

MaterialLaw build_delay(double h, const SpMatC& B, double r) {
  if (B.rows() != B.cols()) fail(ErrorCode::ShapeMismatch, "delay coefficient must be square");
  return MaterialLaw(product({zpow(1.0), exp_delay(h), constant(B)}), r, static_cast<int>(B.rows()));
}

bool check_integro_kernel(const Kernel& k, double nu0) {
  if (k.samples.empty()) return true;
  // (a) selfadjoint samples.
  for (const auto& s : k.samples)
    if (!is_hermitian(s, 1e-12)) return false;
  if (!std::isfinite(k.l1_weighted(nu0))) return false;
  // (c) pairwise commutativity on a sub-sample.
  if (k.dim > 1) {
    const size_t stride = std::max<size_t>(1, k.samples.size() / 32);
    for (size_t i = 0; i < k.samples.size(); i += stride)
      for (size_t j = i + stride; j < k.samples.size(); j += stride) {
        const auto& a = k.samples[i];
        const auto& b = k.samples[j];
        double scale = std::max(1.0, a.norm() * b.norm());
        if ((a * b - b * a).norm() > 1e-10 * scale) return false;
      }
  }
  // (b) t Im K(nu0 + i t) <= d: bounded growth across frequency decades up to Nyquist.
  // Sampled sups of t Im K over [0, t_max/10] and [t_max/10, t_max]; a bounded quantity
  // saturates, an unbounded one keeps growing up to the Nyquist frequency.
  const double t_max = kPi / k.ds;
  auto sup_on = [&](double a, double b, int n) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
      double t = a + (b - a) * i / n;
      for (double sgn : {1.0, -1.0}) {
        Eigen::MatrixXcd K = k.laplace(cplx(nu0, sgn * t));
        Eigen::MatrixXcd im = (K - K.adjoint()) / cplx(0.0, 2.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sgn * t * im, Eigen::EigenvaluesOnly);
        best = std::max(best, es.eigenvalues().maxCoeff());
      }
    }
    return best;
  };
  const double low = std::max(0.0, sup_on(0.0, 0.1 * t_max, 128));
  const double high = sup_on(0.1 * t_max, t_max, 256);
  const bool grows = high > 1.5 * low + 1e-12;
  return !grows;
}

bool check_fractional_conditions(const Eigen::MatrixXcd& P, const Eigen::MatrixXcd& Q,
                                 const Eigen::MatrixXcd& F, const Eigen::MatrixXcd& m0,
                                 const std::vector<std::pair<double, Eigen::MatrixXcd>>& terms,
                                 const Eigen::MatrixXcd& m1) {
  const int d = static_cast<int>(P.rows());
  const double tol = 1e-10;
  for (const auto* m : {&P, &Q, &F, &m0, &m1})
    if (m->rows() != d || m->cols() != d) fail(ErrorCode::ShapeMismatch, "fractional condition shapes");
  for (const auto* p : {&P, &Q, &F})
    if (!is_hermitian(*p, tol) || ((*p) * (*p) - *p).cwiseAbs().maxCoeff() > tol)
      fail(ErrorCode::ProjectorInvalid, "P, Q, F must be orthogonal projectors");
  Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
  if ((P + Q + F - I).cwiseAbs().maxCoeff() > tol)
    fail(ErrorCode::ProjectorInvalid, "P + Q + F must equal the identity");

  // Increasing enumeration of the fractional orders.
  std::vector<std::pair<double, Eigen::MatrixXcd>> sorted = terms;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  auto commutes = [&](const Eigen::MatrixXcd& m) {
    for (const auto* p : {&P, &Q, &F})
      if ((m * (*p) - (*p) * m).cwiseAbs().maxCoeff() > tol) return false;
    return true;
  };
  // lambda_min of the Hermitian part compressed to the range of a projector (+inf on {0}).
  auto min_on = [&](const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& p) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p);
    std::vector<int> cols;
    for (int i = 0; i < d; ++i)
      if (es.eigenvalues()[i] > 0.5) cols.push_back(i);
    if (cols.empty()) return std::numeric_limits<double>::infinity();
    Eigen::MatrixXcd basis(d, cols.size());
    for (size_t i = 0; i < cols.size(); ++i) basis.col(i) = es.eigenvectors().col(cols[i]);
    return lambda_min_herm(Eigen::MatrixXcd(basis.adjoint() * m * basis));
  };

  if (!is_hermitian(m0, tol) || !commutes(m0)) return false;
  for (const auto& [a, ma] : sorted)
    if (!is_hermitian(ma, tol) || !commutes(ma)) return false;
  if (lambda_min_herm(m0) < -tol) return false;
  for (const auto& [a, ma] : sorted)
    if (min_on(ma, P) < -tol || min_on(ma, Q) < -tol) return false;
  if (!(min_on(m0, P) > tol)) return false;
  if (!(min_on(m1, Q) > tol)) return false;
  // With no fractional orders the lowest remaining power on R(F) is z^0, i.e. M1.
  const Eigen::MatrixXcd& lowest = sorted.empty() ? m1 : sorted.front().second;
  if (!(min_on(lowest, F) > tol)) return false;
  return true;
}

}  // namespace evokit
