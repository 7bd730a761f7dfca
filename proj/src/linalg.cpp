#include "evokit/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace evokit {

SpMatC sparse_identity(int n) {
  SpMatC I(n, n);
  I.setIdentity();
  return I;
}

SpMatC to_sparse(const Eigen::MatrixXcd& m, double drop) {
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i)
      if (std::abs(m(i, j)) > drop) trip.emplace_back(i, j, m(i, j));
  SpMatC out(m.rows(), m.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SpMatC to_complex(const SpMat& m) { return m.cast<cplx>(); }

SpMatC diag_sparse(const Eigen::VectorXcd& d) {
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int i = 0; i < d.size(); ++i)
    if (d[i] != 0.0) trip.emplace_back(i, i, d[i]);
  SpMatC out(d.size(), d.size());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

std::vector<std::vector<int>> components(const SpMatC& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMatC::InnerIterator it(m, k); it; ++it) {
      if (it.value() == 0.0) continue;
      int a = find_root(parent, static_cast<int>(it.row()));
      int b = find_root(parent, static_cast<int>(it.col()));
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::vector<int> label(n, -1);
  std::vector<std::vector<int>> out;
  for (int i = 0; i < n; ++i) {
    int r = find_root(parent, i);
    if (label[r] < 0) {
      label[r] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[label[r]].push_back(i);
  }
  return out;
}

Eigen::MatrixXcd dense_block(const SpMatC& m, const std::vector<int>& idx) {
  const int k = static_cast<int>(idx.size());
  std::vector<int> pos(m.rows(), -1);
  for (int i = 0; i < k; ++i) pos[idx[i]] = i;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(k, k);
  for (int c = 0; c < k; ++c)
    for (SpMatC::InnerIterator it(m, idx[c]); it; ++it) {
      int r = pos[it.row()];
      if (r >= 0) out(r, c) = it.value();
    }
  return out;
}

double lambda_min_herm(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  if (h.rows() == 1) return h(0, 0).real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double lambda_min_herm(const SpMatC& m) {
  bool diagonal = true;
  for (int k = 0; k < m.outerSize() && diagonal; ++k)
    for (SpMatC::InnerIterator it(m, k); it; ++it)
      if (it.row() != it.col() && it.value() != 0.0) {
        diagonal = false;
        break;
      }
  if (diagonal) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXcd d = m.diagonal();
    for (int i = 0; i < d.size(); ++i) best = std::min(best, d[i].real());
    return best;
  }
  SpMatC h = 0.5 * (m + SpMatC(m.adjoint()));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& comp : components(h)) best = std::min(best, lambda_min_herm(dense_block(h, comp)));
  return best;
}

double op_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

double op_norm(const SpMatC& m) {
  const int n = static_cast<int>(m.rows());
  if (n != m.cols()) {
    Eigen::MatrixXcd d(m);
    return op_norm(d);
  }
  // Couple rows and columns so each component is an invariant block of M and M^*.
  SpMatC pattern = m + SpMatC(m.adjoint());
  double best = 0.0;
  for (const auto& comp : components(pattern)) {
    if (comp.size() <= 400) {
      best = std::max(best, op_norm(dense_block(m, comp)));
      continue;
    }
    Eigen::MatrixXcd blk = dense_block(m, comp);
    Eigen::VectorXcd v(blk.rows());
    for (int i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.5 * std::sin(1.7 * i + 0.3);
    v.normalize();
    double est = 0.0;
    for (int it = 0; it < 500; ++it) {
      Eigen::VectorXcd w = blk.adjoint() * (blk * v);
      double nw = w.norm();
      if (nw == 0.0) break;
      double next = std::sqrt(nw);
      v = w / nw;
      if (std::abs(next - est) <= 1e-12 * next) {
        est = next;
        break;
      }
      est = next;
    }
    best = std::max(best, est);
  }
  return best;
}

double norm_bound(const SpMatC& m) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows()), cols = Eigen::VectorXd::Zero(m.cols());
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMatC::InnerIterator it(m, k); it; ++it) {
      rows[it.row()] += std::abs(it.value());
      cols[it.col()] += std::abs(it.value());
    }
  double r = rows.size() ? rows.maxCoeff() : 0.0;
  double c = cols.size() ? cols.maxCoeff() : 0.0;
  return std::sqrt(r * c);
}

bool is_hermitian(const Eigen::MatrixXcd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

bool sparse_is_real(const SpMatC& m) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMatC::InnerIterator it(m, k); it; ++it)
      if (it.value().imag() != 0.0) return false;
  return true;
}

}  // namespace evokit
