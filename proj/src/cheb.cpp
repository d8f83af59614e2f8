#include "anisodiff/cheb.hpp"

#include <cmath>
#include <stdexcept>

namespace anisodiff {

ChebGrid gauss_lobatto_nodes(int n) {
    if (n < 1)
        throw std::invalid_argument("gauss_lobatto_nodes: degree must be >= 1");
    ChebGrid grid;
    grid.n = n;
    grid.nodes.resize(n + 1);
    for (int i = 0; i <= n; ++i)
        grid.nodes[i] = 0.5 * (1.0 - std::cos(i * M_PI / n));
    grid.nodes[0] = 0.0;
    grid.nodes[n] = 1.0;
    // enforce exact symmetry about 1/2
    for (int i = 1; i < n - i; ++i)
        grid.nodes[n - i] = 1.0 - grid.nodes[i];
    if (n % 2 == 0) grid.nodes[n / 2] = 0.5;
    return grid;
}

DiffOperators diff_matrix(const ChebGrid& grid) {
    const int n = grid.n;
    const int m = n + 1;

    // Barycentric weights for Chebyshev-Lobatto nodes: w_i = (-1)^i * delta_i,
    // delta = 1/2 at the endpoints.  Valid under any affine map of the nodes.
    Eigen::VectorXd w(m);
    for (int i = 0; i < m; ++i) {
        double s = (i % 2 == 0) ? 1.0 : -1.0;
        w[i] = (i == 0 || i == n) ? 0.5 * s : s;
    }

    DiffOperators ops;
    ops.D.setZero(m, m);
    for (int i = 0; i < m; ++i) {
        double diag = 0.0;
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            double v = (w[j] / w[i]) / (grid.nodes[i] - grid.nodes[j]);
            ops.D(i, j) = v;
            diag -= v;  // negative-sum trick
        }
        ops.D(i, i) = diag;
    }

    if (n >= 2) {
        ops.D1 = ops.D.middleCols(1, n - 1);
        ops.D2 = ops.D.middleRows(1, n - 1);
    } else {
        ops.D1.resize(m, 0);
        ops.D2.resize(0, m);
    }
    ops.D1_0.setZero(m, m);
    if (n >= 2) ops.D1_0.middleCols(1, n - 1) = ops.D1;

    ops.D_hat.setZero(m, m);
    ops.D_hat.row(0) = ops.D1_0.row(0);
    if (n >= 2) ops.D_hat.middleRows(1, n - 1) = ops.D2;
    ops.D_hat.row(n) = ops.D1_0.row(n);
    return ops;
}

GridPermutation grid_permutation(int n) {
    if (n < 1)
        throw std::invalid_argument("grid_permutation: degree must be >= 1");
    GridPermutation perm;
    perm.n = n;
    perm.index.resize((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            perm.index[grid_index(j, i, n)] = grid_index(i, j, n);
    return perm;
}

Eigen::VectorXd GridPermutation::apply(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(u.size());
    for (int r = 0; r < u.size(); ++r) out[r] = u[index[r]];
    return out;
}

Eigen::MatrixXd GridPermutation::apply_rows(const Eigen::MatrixXd& A) const {
    Eigen::MatrixXd out(A.rows(), A.cols());
    for (int r = 0; r < A.rows(); ++r) out.row(r) = A.row(index[r]);
    return out;
}

Eigen::MatrixXd GridPermutation::matrix() const {
    const int N = size();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(N, N);
    for (int r = 0; r < N; ++r) P(r, index[r]) = 1.0;
    return P;
}

}  // namespace anisodiff
