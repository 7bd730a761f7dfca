#include "evokit/spatial_ops.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "evokit/error.hpp"

namespace evokit {

namespace {

using Trip = Eigen::Triplet<double>;

SpMat diag_real(const Eigen::VectorXd& d) {
  std::vector<Trip> t;
  for (int i = 0; i < d.size(); ++i) t.emplace_back(i, i, d[i]);
  SpMat m(d.size(), d.size());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SpMat assemble(int rows, int cols, const std::vector<Trip>& t) {
  SpMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Eigen::VectorXd random_vec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

double wdot(const Eigen::VectorXd& q, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (q.array() * a.array() * b.array()).sum();
}

}  // namespace

int OperatorPair::n_c() const {
  int c = 0;
  for (bool b : c_mask) c += b ? 1 : 0;
  return c;
}

std::vector<int> OperatorPair::c_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(c_mask.size()); ++i)
    if (c_mask[i]) out.push_back(i);
  return out;
}

SpMat OperatorPair::embed_c() const {
  std::vector<Trip> t;
  auto idx = c_indices();
  for (int k = 0; k < static_cast<int>(idx.size()); ++k) t.emplace_back(idx[k], k, 1.0);
  return assemble(n_V(), static_cast<int>(idx.size()), t);
}

SpMat OperatorPair::Gc() const { return G * embed_c(); }

SpMat OperatorPair::D() const {
  SpMat E = embed_c();
  Eigen::VectorXd qc = E.transpose() * quad_V;
  SpMat gct = SpMat(Gc().transpose());
  return SpMat(-(diag_real(qc.cwiseInverse()) * gct * diag_real(quad_W)));
}

SpMat OperatorPair::D_full_adjoint() const {
  SpMat gt = SpMat(G.transpose());
  return SpMat(-(diag_real(quad_V.cwiseInverse()) * gt * diag_real(quad_W)));
}

OperatorPair grad_pair_1d(int n_nodes, double length, Boundary bc) {
  if (n_nodes < 3) fail(ErrorCode::Validation, "grad_pair_1d needs at least 3 nodes");
  if (!(length > 0.0)) fail(ErrorCode::Validation, "interval length must be positive");
  const int nc = n_nodes - 1;
  const double h = length / nc;
  std::vector<Trip> t;
  for (int c = 0; c < nc; ++c) {
    t.emplace_back(c, c, -1.0 / h);
    t.emplace_back(c, c + 1, 1.0 / h);
  }
  OperatorPair p;
  p.G = assemble(nc, n_nodes, t);
  p.quad_V = Eigen::VectorXd::Constant(n_nodes, h);
  p.quad_V[0] = p.quad_V[n_nodes - 1] = 0.5 * h;
  p.quad_W = Eigen::VectorXd::Constant(nc, h);
  p.c_mask.assign(n_nodes, true);
  if (bc == Boundary::dirichlet) p.c_mask.front() = p.c_mask.back() = false;
  p.label_V = "nodes";
  p.label_W = "cells";
  p.spatial_dim = 1;
  p.length = length;
  return p;
}

namespace {

struct Yee {
  int n;
  int nx_edges() const { return n * (n + 1) * (n + 1); }
  int n_edges() const { return 3 * nx_edges(); }
  int nx_faces() const { return (n + 1) * n * n; }
  int n_faces() const { return 3 * nx_faces(); }
  int n_nodes() const { return (n + 1) * (n + 1) * (n + 1); }
  int node(int i, int j, int k) const { return (i * (n + 1) + j) * (n + 1) + k; }
  int ex(int i, int j, int k) const { return (i * (n + 1) + j) * (n + 1) + k; }
  int ey(int i, int j, int k) const { return nx_edges() + (i * n + j) * (n + 1) + k; }
  int ez(int i, int j, int k) const { return 2 * nx_edges() + (i * (n + 1) + j) * n + k; }
  int fx(int i, int j, int k) const { return (i * n + j) * n + k; }
  int fy(int i, int j, int k) const { return nx_faces() + (i * (n + 1) + j) * n + k; }
  int fz(int i, int j, int k) const { return 2 * nx_faces() + (i * n + j) * (n + 1) + k; }
};

}  // namespace

OperatorPair curl_pair_3d(int n) {
  if (n < 2) fail(ErrorCode::Validation, "curl_pair_3d needs n >= 2");
  if (n > 16) fail(ErrorCode::SizeExceeded, "curl_pair_3d is limited to n <= 16 per axis");
  Yee y{n};
  const double h = 1.0 / n;
  std::vector<Trip> t;
  // x-faces: dEz/dy - dEy/dz.
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        int f = y.fx(i, j, k);
        t.emplace_back(f, y.ez(i, j + 1, k), 1.0 / h);
        t.emplace_back(f, y.ez(i, j, k), -1.0 / h);
        t.emplace_back(f, y.ey(i, j, k + 1), -1.0 / h);
        t.emplace_back(f, y.ey(i, j, k), 1.0 / h);
      }
  // y-faces: dEx/dz - dEz/dx.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= n; ++j)
      for (int k = 0; k < n; ++k) {
        int f = y.fy(i, j, k);
        t.emplace_back(f, y.ex(i, j, k + 1), 1.0 / h);
        t.emplace_back(f, y.ex(i, j, k), -1.0 / h);
        t.emplace_back(f, y.ez(i + 1, j, k), -1.0 / h);
        t.emplace_back(f, y.ez(i, j, k), 1.0 / h);
      }
  // z-faces: dEy/dx - dEx/dy.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k <= n; ++k) {
        int f = y.fz(i, j, k);
        t.emplace_back(f, y.ey(i + 1, j, k), 1.0 / h);
        t.emplace_back(f, y.ey(i, j, k), -1.0 / h);
        t.emplace_back(f, y.ex(i, j + 1, k), -1.0 / h);
        t.emplace_back(f, y.ex(i, j, k), 1.0 / h);
      }
  OperatorPair p;
  p.G = assemble(y.n_faces(), y.n_edges(), t);
  p.quad_V = Eigen::VectorXd::Constant(y.n_edges(), h * h * h);
  p.quad_W = Eigen::VectorXd::Constant(y.n_faces(), h * h * h);
  p.c_mask.assign(y.n_edges(), true);
  auto bnd = [n](int a) { return a == 0 || a == n; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= n; ++j)
      for (int k = 0; k <= n; ++k)
        if (bnd(j) || bnd(k)) p.c_mask[y.ex(i, j, k)] = false;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k <= n; ++k)
        if (bnd(i) || bnd(k)) p.c_mask[y.ey(i, j, k)] = false;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      for (int k = 0; k < n; ++k)
        if (bnd(i) || bnd(j)) p.c_mask[y.ez(i, j, k)] = false;
  p.label_V = "edges";
  p.label_W = "faces";
  p.spatial_dim = 3;
  return p;
}

SpMat grad_3d(int n) {
  if (n < 2) fail(ErrorCode::Validation, "grad_3d needs n >= 2");
  if (n > 16) fail(ErrorCode::SizeExceeded, "grad_3d is limited to n <= 16 per axis");
  Yee y{n};
  const double h = 1.0 / n;
  std::vector<Trip> t;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      for (int k = 0; k <= n; ++k) {
        if (i < n) {
          t.emplace_back(y.ex(i, j, k), y.node(i + 1, j, k), 1.0 / h);
          t.emplace_back(y.ex(i, j, k), y.node(i, j, k), -1.0 / h);
        }
        if (j < n) {
          t.emplace_back(y.ey(i, j, k), y.node(i, j + 1, k), 1.0 / h);
          t.emplace_back(y.ey(i, j, k), y.node(i, j, k), -1.0 / h);
        }
        if (k < n) {
          t.emplace_back(y.ez(i, j, k), y.node(i, j, k + 1), 1.0 / h);
          t.emplace_back(y.ez(i, j, k), y.node(i, j, k), -1.0 / h);
        }
      }
  return assemble(y.n_edges(), y.n_nodes(), t);
}

BlockSkew block_skew(const OperatorPair& pair, BcSide side) {
  BlockSkew b;
  SpMat lower, upper;
  Eigen::VectorXd q1;
  if (side == BcSide::first) {
    lower = pair.Gc();
    upper = pair.D();
    q1 = pair.embed_c().transpose() * pair.quad_V;
  } else {
    lower = pair.G;
    upper = pair.D_full_adjoint();
    q1 = pair.quad_V;
  }
  const int n1 = static_cast<int>(lower.cols()), n2 = pair.n_W();
  std::vector<Trip> t;
  for (int k = 0; k < upper.outerSize(); ++k)
    for (SpMat::InnerIterator it(upper, k); it; ++it) t.emplace_back(it.row(), n1 + it.col(), it.value());
  for (int k = 0; k < lower.outerSize(); ++k)
    for (SpMat::InnerIterator it(lower, k); it; ++it) t.emplace_back(n1 + it.row(), it.col(), it.value());
  b.A = assemble(n1 + n2, n1 + n2, t);
  b.quad.resize(n1 + n2);
  b.quad << q1, pair.quad_W;
  b.n_first = n1;
  b.n_second = n2;
  return b;
}

double skew_defect(const BlockSkew& a, int pairs, unsigned seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    Eigen::VectorXd u = random_vec(a.dim(), rng), v = random_vec(a.dim(), rng);
    double s = wdot(a.quad, a.A * u, v) + wdot(a.quad, u, a.A * v);
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

double adjoint_defect(const OperatorPair& p, int pairs, unsigned seed) {
  std::mt19937_64 rng(seed);
  SpMat E = p.embed_c(), D = p.D();
  Eigen::VectorXd qc = E.transpose() * p.quad_V;
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    Eigen::VectorXd uc = random_vec(p.n_c(), rng), w = random_vec(p.n_W(), rng);
    double s = wdot(p.quad_W, p.Gc() * uc, w) + wdot(qc, uc, D * w);
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

double graph_inner(const OperatorPair& p, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  return wdot(p.quad_V, u, v) + wdot(p.quad_W, p.G * u, p.G * v);
}

BdBasis bd_basis(const OperatorPair& pair, int expected) {
  if (pair.spatial_dim != 1) fail(ErrorCode::Validation, "boundary data spaces are supported in 1D only");
  const int nv = pair.n_V();
  std::vector<int> inner = pair.c_indices(), outer;
  for (int i = 0; i < nv; ++i)
    if (!pair.c_mask[i]) outer.push_back(i);
  BdBasis out;
  out.expected = expected < 0 ? static_cast<int>(outer.size()) : expected;
  // Interior rows of the graph form Q_V + G^T Q_W G vanish on the complement.
  SpMat gram = SpMat(diag_real(pair.quad_V)) + SpMat(SpMat(pair.G.transpose()) * diag_real(pair.quad_W) * pair.G);
  Eigen::MatrixXd gd(gram);
  Eigen::MatrixXd raw(nv, outer.size());
  if (!inner.empty() && !outer.empty()) {
    Eigen::MatrixXd kii(inner.size(), inner.size()), kib(inner.size(), outer.size());
    for (size_t a = 0; a < inner.size(); ++a) {
      for (size_t b = 0; b < inner.size(); ++b) kii(a, b) = gd(inner[a], inner[b]);
      for (size_t b = 0; b < outer.size(); ++b) kib(a, b) = gd(inner[a], outer[b]);
    }
    Eigen::MatrixXd sol = kii.ldlt().solve(-kib);
    raw.setZero();
    for (size_t b = 0; b < outer.size(); ++b) {
      raw(outer[b], b) = 1.0;
      for (size_t a = 0; a < inner.size(); ++a) raw(inner[a], b) = sol(a, b);
    }
  } else if (!outer.empty()) {
    raw.setZero();
    for (size_t b = 0; b < outer.size(); ++b) raw(outer[b], b) = 1.0;
  }
  int rank = 0;
  if (raw.cols() > 0) {
    // Graph-orthonormalize through the eigen-decomposition of the Gram matrix.
    Eigen::MatrixXd g = raw.transpose() * gd * raw;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    double top = es.eigenvalues().maxCoeff();
    std::vector<int> keep;
    for (int i = 0; i < g.rows(); ++i)
      if (es.eigenvalues()[i] > 1e-12 * top) keep.push_back(i);
    rank = static_cast<int>(keep.size());
    out.basis.resize(nv, rank);
    for (int i = 0; i < rank; ++i)
      out.basis.col(i) = raw * es.eigenvectors().col(keep[i]) / std::sqrt(es.eigenvalues()[keep[i]]);
    // Put columns in a stable orientation: largest-magnitude node positive.
    for (int i = 0; i < rank; ++i) {
      Eigen::Index idx;
      out.basis.col(i).cwiseAbs().maxCoeff(&idx);
      if (out.basis(idx, i) < 0) out.basis.col(i) *= -1.0;
    }
  } else {
    out.basis.resize(nv, 0);
  }
  if (rank != out.expected)
    fail(ErrorCode::DegenerateBasis, "boundary data space has rank " + std::to_string(rank) +
                                         ", expected " + std::to_string(out.expected));
  return out;
}

OperatorPair dual_pair_1d(const OperatorPair& grad) {
  if (grad.spatial_dim != 1 || grad.label_V != "nodes")
    fail(ErrorCode::Validation, "dual_pair_1d expects a 1D nodal gradient pair");
  const int nn = grad.n_V(), nc = grad.n_W();
  const double h = grad.length / nc;
  // W+ ordering: cells 0..nc-1, flux at x=0, flux at x=L.
  const int left = nc, right = nc + 1;
  std::vector<Trip> t;
  t.emplace_back(0, 0, 1.0 / (0.5 * h));
  t.emplace_back(0, left, -1.0 / (0.5 * h));
  for (int i = 1; i < nn - 1; ++i) {
    t.emplace_back(i, i, 1.0 / h);
    t.emplace_back(i, i - 1, -1.0 / h);
  }
  t.emplace_back(nn - 1, right, 1.0 / (0.5 * h));
  t.emplace_back(nn - 1, nc - 1, -1.0 / (0.5 * h));
  OperatorPair d;
  d.G = assemble(nn, nc + 2, t);
  d.quad_V.resize(nc + 2);
  d.quad_V.head(nc) = grad.quad_W;
  d.quad_V[left] = d.quad_V[right] = 0.5 * h;
  d.quad_W = grad.quad_V;
  d.c_mask.assign(nc + 2, true);
  d.c_mask[left] = d.c_mask[right] = false;
  d.label_V = "cells+flux";
  d.label_W = "nodes";
  d.spatial_dim = 1;
  d.length = grad.length;
  return d;
}

Eigen::VectorXd extend_gradient(const OperatorPair& grad, const Eigen::VectorXd& u) {
  const int nn = grad.n_V(), nc = grad.n_W();
  const double h = grad.length / nc;
  Eigen::VectorXd w(nc + 2);
  w.head(nc) = grad.G * u;
  // (w_{1/2} - w_0)/(h/2) = u_0 and (w_L - w_{N-3/2})/(h/2) = u_{N-1}.
  w[nc] = w[0] - 0.5 * h * u[0];
  w[nc + 1] = w[nc - 1] + 0.5 * h * u[nn - 1];
  return w;
}

BdMap bd_map(const OperatorPair& pair) {
  BdMap out;
  out.source = bd_basis(pair);
  OperatorPair dual = dual_pair_1d(pair);
  out.target = bd_basis(dual);
  const int ks = static_cast<int>(out.source.basis.cols()), kt = static_cast<int>(out.target.basis.cols());
  out.matrix.resize(kt, ks);
  for (int j = 0; j < ks; ++j) {
    Eigen::VectorXd w = extend_gradient(pair, out.source.basis.col(j));
    for (int i = 0; i < kt; ++i) out.matrix(i, j) = graph_inner(dual, out.target.basis.col(i), w);
  }
  if (ks > 0 && kt > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.matrix);
    out.defect = (svd.singularValues().array() - 1.0).abs().maxCoeff();
  }
  return out;
}

Eigen::VectorXd principal_angles(const OperatorPair& p, const Eigen::MatrixXd& basis,
                                 const Eigen::MatrixXd& other) {
  auto onb = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd g(m.cols(), m.cols());
    for (int i = 0; i < m.cols(); ++i)
      for (int j = 0; j < m.cols(); ++j) g(i, j) = graph_inner(p, m.col(i), m.col(j));
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    return Eigen::MatrixXd(m * Eigen::MatrixXd(llt.matrixU()).inverse());
  };
  Eigen::MatrixXd a = onb(basis), b = onb(other);
  Eigen::MatrixXd c(a.cols(), b.cols());
  for (int i = 0; i < a.cols(); ++i)
    for (int j = 0; j < b.cols(); ++j) c(i, j) = graph_inner(p, a.col(i), b.col(j));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c);
  Eigen::VectorXd s = svd.singularValues();
  for (int i = 0; i < s.size(); ++i) s[i] = std::acos(std::min(1.0, s[i]));
  return s;
}

void write_coo(const SpMat& m, std::ostream& os) {
  os << std::setprecision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) os << it.row() << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace evokit
