#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <vector>

#include "evokit/error.hpp"

namespace evokit {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<cplx>;

SpMatC sparse_identity(int n);
SpMatC to_sparse(const Eigen::MatrixXcd& m, double drop = 0.0);
SpMatC to_complex(const SpMat& m);
SpMatC diag_sparse(const Eigen::VectorXcd& d);

// Connected components of the symmetrized sparsity graph.
std::vector<std::vector<int>> components(const SpMatC& m);
// Dense principal submatrix on the listed indices.
Eigen::MatrixXcd dense_block(const SpMatC& m, const std::vector<int>& idx);

// Smallest eigenvalue of (M + M^*)/2.
double lambda_min_herm(const Eigen::MatrixXcd& m);
// Same for a sparse matrix, decoupled along its sparsity components.
double lambda_min_herm(const SpMatC& m);
// Spectral norm via the same decoupling; large blocks use power iteration.
double op_norm(const SpMatC& m);
double op_norm(const Eigen::MatrixXcd& m);
// Cheap upper bound sqrt(|M|_1 |M|_inf).
double norm_bound(const SpMatC& m);

bool is_hermitian(const Eigen::MatrixXcd& m, double tol);
bool sparse_is_real(const SpMatC& m);

}  // namespace evokit
