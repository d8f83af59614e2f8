#include "anisodiff/assembly.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace anisodiff {

namespace {

constexpr double kPivotFloor = 1e-12;

// X <- (I kron D) X, applied block-wise.
Eigen::MatrixXd apply_dx(const Eigen::MatrixXd& D, const Eigen::MatrixXd& X) {
    const int m = static_cast<int>(D.rows());
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (int j = 0; j * m < X.rows(); ++j)
        out.middleRows(j * m, m).noalias() = D * X.middleRows(j * m, m);
    return out;
}

}  // namespace

TrigCoeffs trig_coeffs(double theta) {
    TrigCoeffs c;
    c.C2 = std::cos(theta) * std::cos(theta);
    c.Si = 0.5 * std::sin(2.0 * theta);
    c.Si2 = std::sin(theta) * std::sin(theta);
    return c;
}

BoundaryData zero_boundary_data() {
    auto zero = [](double, double) { return 0.0; };
    return BoundaryData{zero, zero, zero, zero};
}

EdgeClosure boundary_coefficients(const PrincipalField& field, double theta,
                                  Edge edge, int index) {
    const int n = field.n();
    if (index < 0 || index > n)
        throw std::invalid_argument("boundary_coefficients: index out of range");
    int i = 0, j = 0;
    switch (edge) {
        case Edge::X0: i = 0; j = index; break;
        case Edge::X1: i = n; j = index; break;
        case Edge::Y0: i = index; j = 0; break;
        case Edge::Y1: i = index; j = n; break;
    }
    const TensorSample K = tensor_at(field.k11(i, j), field.k22(i, j), theta);
    const bool x_edge = (edge == Edge::X0 || edge == Edge::X1);
    EdgeClosure c;
    c.normal_coeff = x_edge ? K.K11 : K.K22;
    c.tangential_coeff = K.K12;
    if (std::abs(c.normal_coeff) < kPivotFloor)
        throw std::runtime_error(
            "boundary_coefficients: singular Robin closure (normal tensor "
            "coefficient below 1e-12)");
    return c;
}

Assembler::Assembler(ChebGrid grid, DiffOperators diff, GridPermutation perm,
                     PrincipalField field, ThetaSchedule schedule,
                     BoundaryData bdata)
    : grid_(std::move(grid)),
      diff_(std::move(diff)),
      perm_(std::move(perm)),
      field_(std::move(field)),
      schedule_(std::move(schedule)),
      bdata_(std::move(bdata)),
      N_((grid_.n + 1) * (grid_.n + 1)) {
    const auto report = validate_field(field_);
    if (!report.ok())
        throw std::invalid_argument(
            "Assembler: principal field must be strictly positive");
    const int m = grid_.n + 1;
    Dx_ = Eigen::MatrixXd::Zero(N_, N_);
    for (int j = 0; j < m; ++j)
        Dx_.block(j * m, j * m, m, m) = diff_.D;
    Dy_ = perm_.apply_rows(perm_.apply_rows(Dx_).transpose()).transpose();
}

Assembler::Closure Assembler::closure(double t) const {
    const int n = grid_.n;
    const double theta = schedule_.eval(t);

    Closure cl;
    cl.theta = theta;
    cl.t11.resize(N_);
    cl.t12.resize(N_);
    cl.t22.resize(N_);
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const int r = grid_index(i, j, n);
            const TensorSample K =
                tensor_at(field_.k11(i, j), field_.k22(i, j), theta);
            cl.t11[r] = K.K11;
            cl.t12[r] = K.K12;
            cl.t22[r] = K.K22;
        }
    }

    cl.UX = Dx_;
    cl.UY = Dy_;
    cl.cx = Eigen::VectorXd::Zero(N_);
    cl.cy = Eigen::VectorXd::Zero(N_);

    // Robin eliminations: solve each edge relation for the normal
    // derivative, with the tangential derivative taken spectrally along
    // the edge line.
    for (int j = 0; j <= n; ++j) {
        const double y = grid_.nodes[j];
        {
            const auto c = boundary_coefficients(field_, theta, Edge::X0, j);
            const int r = grid_index(0, j, n);
            cl.UX.row(r) = -(c.tangential_coeff / c.normal_coeff) * Dy_.row(r);
            cl.UX(r, r) += 1.0 / c.normal_coeff;
            cl.cx[r] = -bdata_.f1(t, y) / c.normal_coeff;
        }
        {
            const auto c = boundary_coefficients(field_, theta, Edge::X1, j);
            const int r = grid_index(n, j, n);
            cl.UX.row(r) = -(c.tangential_coeff / c.normal_coeff) * Dy_.row(r);
            cl.UX(r, r) -= 1.0 / c.normal_coeff;
            cl.cx[r] = bdata_.f2(t, y) / c.normal_coeff;
        }
    }
    for (int i = 0; i <= n; ++i) {
        const double x = grid_.nodes[i];
        {
            const auto c = boundary_coefficients(field_, theta, Edge::Y0, i);
            const int r = grid_index(i, 0, n);
            cl.UY.row(r) = -(c.tangential_coeff / c.normal_coeff) * Dx_.row(r);
            cl.UY(r, r) += 1.0 / c.normal_coeff;
            cl.cy[r] = -bdata_.f3(t, x) / c.normal_coeff;
        }
        {
            const auto c = boundary_coefficients(field_, theta, Edge::Y1, i);
            const int r = grid_index(i, n, n);
            cl.UY.row(r) = -(c.tangential_coeff / c.normal_coeff) * Dx_.row(r);
            cl.UY(r, r) -= 1.0 / c.normal_coeff;
            cl.cy[r] = bdata_.f4(t, x) / c.normal_coeff;
        }
    }
    return cl;
}

SystemOperator Assembler::system(double t) const {
    const Closure cl = closure(t);

    Eigen::MatrixXd B1 = cl.t11.asDiagonal() * cl.UX;
    B1 += cl.t12.asDiagonal() * cl.UY;
    Eigen::MatrixXd B2 = cl.t12.asDiagonal() * cl.UX;
    B2 += cl.t22.asDiagonal() * cl.UY;

    SystemOperator op;
    op.t = t;
    op.M = apply_dx(diff_.D, B1);
    op.M += perm_.apply_rows(apply_dx(diff_.D, perm_.apply_rows(B2)));

    const Eigen::VectorXd b1 =
        cl.t11.cwiseProduct(cl.cx) + cl.t12.cwiseProduct(cl.cy);
    const Eigen::VectorXd b2 =
        cl.t12.cwiseProduct(cl.cx) + cl.t22.cwiseProduct(cl.cy);
    op.b_global = apply_dx(diff_.D, b1);
    op.b_global += perm_.apply(apply_dx(diff_.D, perm_.apply(b2)));
    return op;
}

ClosedOperator Assembler::block_F(double t, int j) const {
    const int n = grid_.n;
    if (j < 0 || j > n)
        throw std::invalid_argument("block_F: line index out of range");
    const double theta = schedule_.eval(t);
    const double y = grid_.nodes[j];

    const auto c0 = boundary_coefficients(field_, theta, Edge::X0, j);
    const auto cn = boundary_coefficients(field_, theta, Edge::X1, j);

    ClosedOperator op;
    op.c0 = 1.0 / c0.normal_coeff;
    op.cn = 1.0 / cn.normal_coeff;
    op.A = Eigen::MatrixXd::Zero(n + 1, n + 1);
    op.A.col(0) += diff_.D.col(0);    // edge flux reduces to u - f1
    op.A.col(n) -= diff_.D.col(n);
    if (n >= 2) {
        Eigen::VectorXd kk(n - 1);
        for (int i = 1; i < n; ++i) {
            const TensorSample K =
                tensor_at(field_.k11(i, j), field_.k22(i, j), theta);
            kk[i - 1] = K.K11;
        }
        op.A += diff_.D1 * kk.asDiagonal() * diff_.D2;
    }
    op.b = -diff_.D.col(0) * bdata_.f1(t, y) + diff_.D.col(n) * bdata_.f2(t, y);
    return op;
}

ClosedOperator Assembler::block_G(double t, int i) const {
    const int n = grid_.n;
    if (i < 0 || i > n)
        throw std::invalid_argument("block_G: line index out of range");
    const double theta = schedule_.eval(t);
    const double x = grid_.nodes[i];

    const auto c0 = boundary_coefficients(field_, theta, Edge::Y0, i);
    const auto cn = boundary_coefficients(field_, theta, Edge::Y1, i);

    ClosedOperator op;
    op.c0 = 1.0 / c0.normal_coeff;
    op.cn = 1.0 / cn.normal_coeff;
    op.A = Eigen::MatrixXd::Zero(n + 1, n + 1);
    op.A.col(0) += diff_.D.col(0);
    op.A.col(n) -= diff_.D.col(n);
    if (n >= 2) {
        Eigen::VectorXd kk(n - 1);
        for (int j = 1; j < n; ++j) {
            const TensorSample K =
                tensor_at(field_.k11(i, j), field_.k22(i, j), theta);
            kk[j - 1] = K.K22;
        }
        op.A += diff_.D1 * kk.asDiagonal() * diff_.D2;
    }
    op.b = -diff_.D.col(0) * bdata_.f3(t, x) + diff_.D.col(n) * bdata_.f4(t, x);
    return op;
}

Eigen::VectorXd Assembler::source(
    const std::function<double(double, double, double)>& g, double t) const {
    const Closure cl = closure(t);
    const Eigen::VectorXd b1 =
        cl.t11.cwiseProduct(cl.cx) + cl.t12.cwiseProduct(cl.cy);
    const Eigen::VectorXd b2 =
        cl.t12.cwiseProduct(cl.cx) + cl.t22.cwiseProduct(cl.cy);
    Eigen::VectorXd out = apply_dx(diff_.D, b1);
    out += perm_.apply(apply_dx(diff_.D, perm_.apply(b2)));
    const int n = grid_.n;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            out[grid_index(i, j, n)] += g(t, grid_.nodes[i], grid_.nodes[j]);
    return out;
}

}  // namespace anisodiff
