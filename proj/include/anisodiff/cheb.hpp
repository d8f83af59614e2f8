#pragma once

#include <Eigen/Dense>
#include <vector>

namespace anisodiff {

/// Chebyshev-Gauss-Lobatto grid on [0,1], nodes ascending:
/// x_i = (1 - cos(i*pi/n)) / 2, i = 0..n.
struct ChebGrid {
    int n = 0;                 // polynomial degree; n+1 nodes
    Eigen::VectorXd nodes;     // ascending, nodes[0] = 0, nodes[n] = 1

    int num_points() const { return n + 1; }
};

ChebGrid gauss_lobatto_nodes(int n);

/// First-derivative collocation matrix on [0,1] and the row/column splits
/// used by the operator assembly and the Jacobian source patterns.
struct DiffOperators {
    Eigen::MatrixXd D;       // (n+1) x (n+1)
    Eigen::MatrixXd D1;      // (n+1) x (n-1), columns d_1..d_{n-1}
    Eigen::MatrixXd D2;      // (n-1) x (n+1), rows r_1..r_{n-1}
    Eigen::MatrixXd D1_0;    // D1 padded with a zero column on each side
    Eigen::MatrixXd D_hat;   // [row 0 of D1_0; D2; row n of D1_0]

    Eigen::VectorXd row(int i) const { return D.row(i).transpose(); }
    Eigen::VectorXd col(int i) const { return D.col(i); }
};

DiffOperators diff_matrix(const ChebGrid& grid);

/// Permutation exchanging the roles of the two grid axes for vectors in
/// block order (block j holds x-index 0..n at fixed y_j).  Symmetric
/// involution: P = P^T = P^{-1}.
struct GridPermutation {
    int n = 0;
    std::vector<int> index;  // (P u)[r] = u[index[r]]

    int size() const { return (n + 1) * (n + 1); }
    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
    Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& A) const;  // P * A
    Eigen::MatrixXd matrix() const;
};

GridPermutation grid_permutation(int n);

/// Flattened grid index for block order: x-index i within block j.
inline int grid_index(int i, int j, int n) { return i + j * (n + 1); }

}  // namespace anisodiff
