#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "anisodiff/tensor.hpp"

using namespace anisodiff;

TEST_CASE("constant schedule returns its parameter everywhere") {
    const ThetaSchedule s = ThetaSchedule::constant(0.0, 2.0);
    CHECK(s.eval(0.0) == 0.0);
    CHECK(s.eval(1.3) == 0.0);
    CHECK(s.is_constant());
}

TEST_CASE("linear schedule evaluates omega*t") {
    const ThetaSchedule s = ThetaSchedule::linear(M_PI / 8.0, 2.0);
    CHECK(s.eval(2.0) == doctest::Approx(M_PI / 4.0).epsilon(1e-15));
    CHECK_FALSE(s.is_constant());
}

TEST_CASE("tabulated schedule interpolates linearly") {
    const ThetaSchedule s =
        ThetaSchedule::tabulated({{0.0, 0.0}, {1.0, M_PI / 3.0}}, 1.0);
    CHECK(s.eval(0.5) == doctest::Approx(M_PI / 6.0).epsilon(1e-15));
}

TEST_CASE("schedule rejects out-of-domain times and angles") {
    const ThetaSchedule s = ThetaSchedule::constant(0.3, 1.0);
    CHECK_THROWS_AS(s.eval(-0.1), std::domain_error);
    CHECK_THROWS_AS(s.eval(1.5), std::domain_error);
    // angle leaves [0, pi/2) inside the evaluation window
    const ThetaSchedule bad = ThetaSchedule::linear(M_PI / 2.0, 2.0);
    CHECK_THROWS_AS(bad.eval(1.5), std::domain_error);
}

TEST_CASE("orthotropic tensor at theta = 0") {
    const TensorSample K = tensor_at(3.0, 1.0, 0.0);
    CHECK(K.K11 == 3.0);
    CHECK(K.K22 == 1.0);
    CHECK(K.K12 == 0.0);
    CHECK(K.K21 == 0.0);
}

TEST_CASE("isotropic tensor is rotation invariant") {
    for (double theta : {0.0, 0.3, 1.2}) {
        const TensorSample K = tensor_at(2.5, 2.5, theta);
        CHECK(K.K11 == doctest::Approx(2.5).epsilon(1e-15));
        CHECK(K.K22 == doctest::Approx(2.5).epsilon(1e-15));
        CHECK(std::abs(K.K12) <= 1e-15);
    }
}

TEST_CASE("tensor at pi/4 mixes the principal values evenly") {
    const TensorSample K = tensor_at(2.0, 1.0, M_PI / 4.0);
    CHECK(K.K11 == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(K.K22 == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(K.K12 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(K.K12 == K.K21);
}

TEST_CASE("conjugation oracle and spectrum over random triples") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> kd(0.1, 5.0);
    std::uniform_real_distribution<double> td(0.0, M_PI / 2.0 * 0.999);
    for (int trial = 0; trial < 200; ++trial) {
        const double k11 = kd(rng), k22 = kd(rng), theta = td(rng);
        const TensorSample K = tensor_at(k11, k22, theta);

        // independent oracle: explicit matrix product
        const Eigen::Matrix2d phi = rotation_matrix(theta);
        Eigen::Matrix2d lambda;
        lambda << k11, 0.0, 0.0, k22;
        const Eigen::Matrix2d ref = phi * lambda * phi.transpose();
        CHECK((K.matrix() - ref).lpNorm<Eigen::Infinity>() <= 1e-14);

        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(K.matrix());
        const double lo = std::min(k11, k22), hi = std::max(k11, k22);
        CHECK(eig.eigenvalues()[0] == doctest::Approx(lo).epsilon(1e-12));
        CHECK(eig.eigenvalues()[1] == doctest::Approx(hi).epsilon(1e-12));

        CHECK(K.K11 + K.K22 == doctest::Approx(k11 + k22).epsilon(1e-13));
        CHECK(K.K11 * K.K22 - K.K12 * K.K21 ==
              doctest::Approx(k11 * k22).epsilon(1e-12));

        const TensorSample Kp = tensor_at(k11, k22, theta + M_PI);
        CHECK(std::abs(K.K11 - Kp.K11) <= 1e-12);
        CHECK(std::abs(K.K12 - Kp.K12) <= 1e-12);
        CHECK(std::abs(K.K22 - Kp.K22) <= 1e-12);
    }
}

TEST_CASE("nonpositive principal values rejected") {
    CHECK_THROWS_AS(tensor_at(0.0, 1.0, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(tensor_at(1.0, -0.5, 0.2), std::invalid_argument);
}

TEST_CASE("rotation matrix basics") {
    CHECK((rotation_matrix(0.0) - Eigen::Matrix2d::Identity()).norm() == 0.0);
    const Eigen::Matrix2d q = rotation_matrix(M_PI / 2.0);
    CHECK(q(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(q(0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(q(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
    const Eigen::Matrix2d r = rotation_matrix(0.3);
    CHECK((r * r.transpose() - Eigen::Matrix2d::Identity())
              .lpNorm<Eigen::Infinity>() <= 1e-15);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("field validation reports positivity violations") {
    PrincipalField f;
    f.k11 = Eigen::MatrixXd::Ones(4, 4);
    f.k22 = Eigen::MatrixXd::Ones(4, 4);
    CHECK(validate_field(f).ok());

    f.k11(2, 1) = 0.0;
    const FieldValidation bad = validate_field(f);
    REQUIRE(bad.violations.size() == 1);
    CHECK(bad.violations[0].i == 2);
    CHECK(bad.violations[0].j == 1);
    CHECK(bad.violations[0].component == '1');

    f.k11.setConstant(2.0);
    const FieldValidation good = validate_field(f);
    CHECK(good.ok());
    CHECK(good.min_det == doctest::Approx(2.0).epsilon(1e-15));
}
