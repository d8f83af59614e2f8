#include "anisodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace anisodiff {

ThetaSchedule ThetaSchedule::constant(double theta0, double t_f) {
    ThetaSchedule s;
    s.kind_ = Kind::Constant;
    s.a_ = theta0;
    s.t_f_ = t_f;
    return s;
}

ThetaSchedule ThetaSchedule::linear(double rate, double t_f) {
    ThetaSchedule s;
    s.kind_ = Kind::Linear;
    s.a_ = rate;
    s.t_f_ = t_f;
    return s;
}

ThetaSchedule ThetaSchedule::sinusoidal(double offset, double amplitude,
                                        double omega, double t_f) {
    ThetaSchedule s;
    s.kind_ = Kind::Sinusoidal;
    s.a_ = offset;
    s.b_ = amplitude;
    s.c_ = omega;
    s.t_f_ = t_f;
    return s;
}

ThetaSchedule ThetaSchedule::tabulated(
    std::vector<std::pair<double, double>> knots, double t_f) {
    if (knots.size() < 2)
        throw std::invalid_argument("ThetaSchedule: need at least two knots");
    for (std::size_t q = 1; q < knots.size(); ++q)
        if (knots[q].first <= knots[q - 1].first)
            throw std::invalid_argument(
                "ThetaSchedule: knot abscissae must be strictly increasing");
    ThetaSchedule s;
    s.kind_ = Kind::Tabulated;
    s.knots_ = std::move(knots);
    s.t_f_ = t_f;
    return s;
}

bool ThetaSchedule::is_constant() const {
    switch (kind_) {
        case Kind::Constant:
            return true;
        case Kind::Linear:
            return a_ == 0.0;
        case Kind::Sinusoidal:
            return b_ == 0.0 || c_ == 0.0;
        case Kind::Tabulated: {
            for (const auto& [t, v] : knots_)
                if (v != knots_.front().second) return false;
            return true;
        }
    }
    return false;
}

double ThetaSchedule::eval(double t) const {
    const double slack = 1e-12 * std::max(1.0, t_f_);
    if (t < -slack || t > t_f_ + slack)
        throw std::domain_error("ThetaSchedule: t outside [0, t_f]");
    double theta = 0.0;
    switch (kind_) {
        case Kind::Constant:
            theta = a_;
            break;
        case Kind::Linear:
            theta = a_ * t;
            break;
        case Kind::Sinusoidal:
            theta = a_ + b_ * std::sin(c_ * t);
            break;
        case Kind::Tabulated: {
            if (t <= knots_.front().first) {
                theta = knots_.front().second;
            } else if (t >= knots_.back().first) {
                theta = knots_.back().second;
            } else {
                auto it = std::upper_bound(
                    knots_.begin(), knots_.end(), t,
                    [](double v, const auto& k) { return v < k.first; });
                const auto& [t1, v1] = *it;
                const auto& [t0, v0] = *(it - 1);
                theta = v0 + (v1 - v0) * (t - t0) / (t1 - t0);
            }
            break;
        }
    }
    if (theta < 0.0 || theta >= M_PI / 2)
        throw std::domain_error(
            "ThetaSchedule: angle outside the supported range [0, pi/2)");
    return theta;
}

TensorSample tensor_at(double k11, double k22, double theta) {
    if (!(k11 > 0.0) || !(k22 > 0.0))
        throw std::invalid_argument(
            "tensor_at: principal diffusivities must be positive");
    const double c2 = std::cos(theta) * std::cos(theta);
    const double s2 = std::sin(theta) * std::sin(theta);
    const double half_sin2 = 0.5 * std::sin(2.0 * theta);
    TensorSample K;
    K.K11 = k11 * c2 + k22 * s2;
    K.K12 = (k11 - k22) * half_sin2;
    K.K21 = K.K12;
    K.K22 = k11 * s2 + k22 * c2;
    return K;
}

Eigen::Matrix2d rotation_matrix(double theta) {
    Eigen::Matrix2d phi;
    phi << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return phi;
}

FieldValidation validate_field(const PrincipalField& field) {
    FieldValidation report;
    report.min_det = std::numeric_limits<double>::infinity();
    const int n = field.n();
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const double a = field.k11(i, j);
            const double b = field.k22(i, j);
            if (!(a > 0.0)) report.violations.push_back({i, j, '1', a});
            if (!(b > 0.0)) report.violations.push_back({i, j, '2', b});
            report.min_det = std::min(report.min_det, a * b);
        }
    }
    return report;
}

}  // namespace anisodiff
