#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "evokit/linalg.hpp"

namespace evokit {

enum class Boundary { dirichlet, neumann };

// Discrete closed pair: G maps V -> W; c_mask marks the DOFs spanning V_c.
struct OperatorPair {
  SpMat G;
  std::vector<bool> c_mask;
  Eigen::VectorXd quad_V;
  Eigen::VectorXd quad_W;
  std::string label_V = "V";
  std::string label_W = "W";
  int spatial_dim = 1;
  double length = 1.0;

  int n_V() const { return static_cast<int>(G.cols()); }
  int n_W() const { return static_cast<int>(G.rows()); }
  int n_c() const;
  std::vector<int> c_indices() const;
  // Embedding V_c -> V (n_V x n_c).
  SpMat embed_c() const;
  // G restricted to V_c (n_W x n_c).
  SpMat Gc() const;
  // -Q_Vc^{-1} Gc^T Q_W (n_c x n_W), the negative weighted adjoint of Gc.
  SpMat D() const;
  // -Q_V^{-1} G^T Q_W (n_V x n_W), the negative weighted adjoint of the full G.
  SpMat D_full_adjoint() const;
};

// V-side block carries the first component of the state.
enum class BcSide { first, second };

struct BlockSkew {
  SpMat A;
  Eigen::VectorXd quad;
  int n_first = 0;
  int n_second = 0;
  int dim() const { return static_cast<int>(A.rows()); }
};

OperatorPair grad_pair_1d(int n_nodes, double length, Boundary bc);
// Yee curl on the unit cube with n cells per axis; E on edges (V), H on faces (W).
OperatorPair curl_pair_3d(int n);
// Nodal gradient (edges x nodes) on the same Yee grid.
SpMat grad_3d(int n);

// first: [[0, D], [Gc, 0]] on V_c + W.  second: [[0, -G^*], [G, 0]] on V + W.
BlockSkew block_skew(const OperatorPair& pair, BcSide side = BcSide::first);

// Weighted skewness defect max |<Au, v> + <u, Av>| over random pairs.
double skew_defect(const BlockSkew& a, int pairs, unsigned seed);
double adjoint_defect(const OperatorPair& p, int pairs, unsigned seed);

struct BdBasis {
  Eigen::MatrixXd basis;  // n_V x k, orthonormal in the graph inner product
  int expected = 0;
};

// Graph inner product <u, v>_V + <G u, G v>_W of a pair.
double graph_inner(const OperatorPair& p, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Graph-orthogonal complement of V_c in V (1D pairs). expected < 0: number of masked DOFs.
BdBasis bd_basis(const OperatorPair& pair, int expected = -1);

// D-side pair of a 1D nodal gradient: cells plus two boundary flux DOFs (weight h/2) as V,
// nodes as W, boundary flux DOFs masked.
OperatorPair dual_pair_1d(const OperatorPair& grad);
// G u on cells, completed at the boundary flux DOFs by (D w)_b = u_b.
Eigen::VectorXd extend_gradient(const OperatorPair& grad, const Eigen::VectorXd& u);

struct BdMap {
  Eigen::MatrixXd matrix;  // coefficients of G-dot in the two computed bases
  BdBasis source;
  BdBasis target;
  double defect = 0.0;     // max |sigma_i - 1| over singular values
};

BdMap bd_map(const OperatorPair& pair);

// Principal angles (radians) between the span of `basis` and `other`, graph inner product.
Eigen::VectorXd principal_angles(const OperatorPair& p, const Eigen::MatrixXd& basis,
                                 const Eigen::MatrixXd& other);

void write_coo(const SpMat& m, std::ostream& os);

}  // namespace evokit
