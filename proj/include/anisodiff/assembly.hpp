#pragma once

#include <Eigen/Dense>
#include <functional>

#include "anisodiff/cheb.hpp"
#include "anisodiff/tensor.hpp"

namespace anisodiff {

struct TrigCoeffs {
    double C2;   // cos^2 theta
    double Si;   // (1/2) sin 2theta
    double Si2;  // sin^2 theta
};

TrigCoeffs trig_coeffs(double theta);

/// Robin boundary data for the four edges x=0, x=1, y=0, y=1.  The second
/// argument is the coordinate along the edge (y for f1/f2, x for f3/f4).
struct BoundaryData {
    std::function<double(double, double)> f1, f2, f3, f4;
};

BoundaryData zero_boundary_data();

enum class Edge { X0, X1, Y0, Y1 };

/// Scalars of the Robin elimination at one edge node: the effective
/// normal-flux coefficient (the pivot divided out) and the tangential
/// coupling multiplying the along-edge derivative of the state.
struct EdgeClosure {
    double normal_coeff;      // K11 at x-edges, K22 at y-edges
    double tangential_coeff;  // K12 = K21
};

EdgeClosure boundary_coefficients(const PrincipalField& field, double theta,
                                  Edge edge, int index);

/// Boundary-closed within-line operator block plus its data vector.
struct ClosedOperator {
    Eigen::MatrixXd A;  // (n+1) x (n+1)
    Eigen::VectorXd b;  // (n+1)
    double c0 = 0.0;    // 1 / normal pivot at the low edge of the line
    double cn = 0.0;    // 1 / normal pivot at the high edge
};

/// Assembled semi-discrete operator: U'(t) = M U + b_global + g samples.
struct SystemOperator {
    Eigen::MatrixXd M;
    Eigen::VectorXd b_global;  // boundary-data contributions only
    double t = 0.0;
};

/// Builds M(t) and the source/boundary vector for a fixed grid, field,
/// angle schedule and boundary data.  Immutable after construction.
class Assembler {
  public:
    Assembler(ChebGrid grid, DiffOperators diff, GridPermutation perm,
              PrincipalField field, ThetaSchedule schedule, BoundaryData bdata);

    /// Pure x-sweep closed block for line y_j (terms C2 [k11 Ux]_x +
    /// Si2 [k22 Ux]_x); cross-derivative couplings live in system().
    ClosedOperator block_F(double t, int j) const;
    /// Pure y-sweep closed block for line x_i.
    ClosedOperator block_G(double t, int i) const;

    SystemOperator system(double t) const;

    /// Sg(t) = b_global(t) + grid samples of g(t, x, y) in block order.
    Eigen::VectorXd source(const std::function<double(double, double, double)>& g,
                           double t) const;

    const ChebGrid& grid() const { return grid_; }
    const DiffOperators& diff() const { return diff_; }
    const GridPermutation& perm() const { return perm_; }
    const PrincipalField& field() const { return field_; }
    const ThetaSchedule& schedule() const { return schedule_; }
    const BoundaryData& bdata() const { return bdata_; }
    int size() const { return N_; }

    /// Internal affine pieces of the closure, shared with the parameter
    /// derivatives: UX/UY are the derivative operators whose x-edge/y-edge
    /// rows carry the eliminated Robin fluxes; cx/cy the matching data
    /// vectors; t11/t12/t22 the tensor-entry diagonals.
    struct Closure {
        Eigen::MatrixXd UX, UY;
        Eigen::VectorXd cx, cy;
        Eigen::VectorXd t11, t12, t22;
        double theta;
    };
    Closure closure(double t) const;

    /// y-derivative of u along grid columns: (P (I kron D) P^T) u.
    const Eigen::MatrixXd& dy_matrix() const { return Dy_; }
    /// x-derivative along grid rows: (I kron D).
    const Eigen::MatrixXd& dx_matrix() const { return Dx_; }

  private:
    ChebGrid grid_;
    DiffOperators diff_;
    GridPermutation perm_;
    PrincipalField field_;
    ThetaSchedule schedule_;
    BoundaryData bdata_;
    int N_;
    Eigen::MatrixXd Dx_, Dy_;  // cached global derivative matrices
};

}  // namespace anisodiff
