#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "anisodiff/cheb.hpp"

namespace anisodiff {

/// Grid samples of the two principal diffusivities.  Entry (i,j) is the
/// value at (x_i, y_j).
struct PrincipalField {
    Eigen::MatrixXd k11;  // (n+1) x (n+1)
    Eigen::MatrixXd k22;

    int n() const { return static_cast<int>(k11.rows()) - 1; }
};

/// Known rotation-angle schedule theta(t) on [0, t_f].  Values must stay
/// in [0, pi/2); eval() rejects anything outside.
class ThetaSchedule {
  public:
    enum class Kind { Constant, Linear, Sinusoidal, Tabulated };

    static ThetaSchedule constant(double theta0, double t_f);
    static ThetaSchedule linear(double rate, double t_f);
    static ThetaSchedule sinusoidal(double offset, double amplitude,
                                    double omega, double t_f);
    static ThetaSchedule tabulated(std::vector<std::pair<double, double>> knots,
                                   double t_f);

    double eval(double t) const;
    double t_f() const { return t_f_; }
    Kind kind() const { return kind_; }
    /// True when theta(t) is the same for all t (enables operator caching).
    bool is_constant() const;

  private:
    Kind kind_ = Kind::Constant;
    double a_ = 0.0, b_ = 0.0, c_ = 0.0;
    std::vector<std::pair<double, double>> knots_;
    double t_f_ = 1.0;
};

/// 2x2 symmetric diffusion tensor at one point and time.
struct TensorSample {
    double K11, K12, K21, K22;

    Eigen::Matrix2d matrix() const {
        Eigen::Matrix2d K;
        K << K11, K12, K21, K22;
        return K;
    }
};

/// K = Phi(theta) diag(k11,k22) Phi(theta)^T, written out in trig form.
TensorSample tensor_at(double k11, double k22, double theta);

Eigen::Matrix2d rotation_matrix(double theta);

struct FieldValidation {
    struct Violation {
        int i, j;
        char component;  // '1' for k11, '2' for k22
        double value;
    };
    std::vector<Violation> violations;
    double min_det = 0.0;

    bool ok() const { return violations.empty(); }
};

/// Reports every grid index violating strict positivity of k11/k22.
FieldValidation validate_field(const PrincipalField& field);

}  // namespace anisodiff
