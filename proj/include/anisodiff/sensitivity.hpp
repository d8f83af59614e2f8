#pragma once

#include <Eigen/Dense>
#include <vector>

#include "anisodiff/forward.hpp"

namespace anisodiff {

/// Derivative of the affine semi-discrete right-hand side with respect to
/// one unknown k_ell.  The k-dependence of M enters through at most one
/// grid node p, so dM/dk_ell = Dx[:,p] w1^T + Dy[:,p] w2^T and the
/// boundary-data part of dSg/dk_ell is Dx[:,p] s1 + Dy[:,p] s2.
struct ParamDerivative {
    int ell = 0;
    int node = 0;           // flattened grid index p
    Eigen::VectorXd dx_col;  // column p of Dx
    Eigen::VectorXd dy_col;  // column p of Dy
    Eigen::VectorXd w1, w2;
    double s1 = 0.0, s2 = 0.0;

    /// dM * U
    Eigen::VectorXd apply(const Eigen::VectorXd& U) const {
        return dx_col * w1.dot(U) + dy_col * w2.dot(U);
    }
    Eigen::VectorXd dSg() const { return dx_col * s1 + dy_col * s2; }
    /// W(t) = dM U + dSg, the forcing of the sensitivity system.
    Eigen::VectorXd forcing(const Eigen::VectorXd& U) const {
        return dx_col * (w1.dot(U) + s1) + dy_col * (w2.dot(U) + s2);
    }
    Eigen::MatrixXd dense_dM() const {
        return dx_col * w1.transpose() + dy_col * w2.transpose();
    }
};

/// Unknown index layout: ell in [0, (n+1)^2) addresses k11 at node ell,
/// ell in [(n+1)^2, 2(n+1)^2) addresses k22 at node ell - (n+1)^2,
/// both in the lexicographic block order of the state vector.
ParamDerivative dM_dk(int ell, const Assembler& assembler, double t);

/// Jacobian of the measured trajectory with respect to all 2(n+1)^2
/// unknowns, rows grouped by measurement time.
struct StackedJacobian {
    Eigen::MatrixXd J;              // (N_times * (n+1)^2) x 2(n+1)^2
    std::vector<double> times;
};

Eigen::VectorXd jacobian_column(int ell, const ForwardProblem& problem,
                                const Trajectory& trajectory,
                                const std::vector<double>& measurement_times);

StackedJacobian full_jacobian(const ForwardProblem& problem,
                              const Trajectory& trajectory,
                              const std::vector<double>& measurement_times,
                              int threads = 1);

/// Central finite-difference oracle on solve_forward; rebuild_problem must
/// produce a ForwardProblem for a perturbed unknown vector.
StackedJacobian fd_jacobian(
    const Eigen::VectorXd& k,
    const std::function<ForwardProblem(const Eigen::VectorXd&)>& rebuild_problem,
    const std::vector<double>& measurement_times, double h);

/// Richardson extrapolation of two central-difference Jacobians (steps h
/// and h/2), eliminating the O(h^2) truncation term.  Plain central
/// differences cannot reach 1e-5 relative accuracy on the smallest
/// nonzero entries in double precision; this can.
StackedJacobian richardson_fd_jacobian(
    const Eigen::VectorXd& k,
    const std::function<ForwardProblem(const Eigen::VectorXd&)>& rebuild_problem,
    const std::vector<double>& measurement_times, double h);

/// Pack/unpack between the stacked unknown vector and the field grids.
Eigen::VectorXd pack_unknowns(const PrincipalField& field);
PrincipalField unpack_unknowns(const Eigen::VectorXd& k, int n);

}  // namespace anisodiff
