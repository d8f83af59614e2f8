#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "anisodiff/forward.hpp"

using namespace anisodiff;

namespace {

FieldModel constant_model(double k11, double k22) {
    FieldModel fm;
    fm.k11 = [k11](double, double) { return k11; };
    fm.k22 = [k22](double, double) { return k22; };
    auto zero = [](double, double) { return 0.0; };
    fm.dk11_dx = fm.dk11_dy = fm.dk22_dx = fm.dk22_dy = zero;
    return fm;
}

ManufacturedSolution decaying_product(bool cosine) {
    ManufacturedSolution s;
    const double sgn = cosine ? -1.0 : 1.0;
    auto fx = [cosine](double x) {
        return cosine ? std::cos(M_PI * x) : std::sin(M_PI * x);
    };
    auto dfx = [cosine](double x) {
        return cosine ? -M_PI * std::sin(M_PI * x) : M_PI * std::cos(M_PI * x);
    };
    s.U = [fx](double t, double x, double y) {
        return std::exp(-t) * fx(x) * fx(y);
    };
    s.Ut = [s](double t, double x, double y) { return -s.U(t, x, y); };
    s.Ux = [fx, dfx](double t, double x, double y) {
        return std::exp(-t) * dfx(x) * fx(y);
    };
    s.Uy = [fx, dfx](double t, double x, double y) {
        return std::exp(-t) * fx(x) * dfx(y);
    };
    s.Uxx = [s](double t, double x, double y) {
        return -M_PI * M_PI * s.U(t, x, y);
    };
    s.Uyy = s.Uxx;
    s.Uxy = [fx, dfx](double t, double x, double y) {
        return std::exp(-t) * dfx(x) * dfx(y);
    };
    (void)sgn;
    return s;
}

double solve_max_error(const ManufacturedSolution& exact,
                       const FieldModel& fm, const ThetaSchedule& schedule,
                       int n, int steps, double t_f) {
    const ChebGrid grid = gauss_lobatto_nodes(n);
    const ManufacturedData data = manufactured_data(exact, fm, schedule, grid);
    ForwardProblem problem;
    problem.assembler = std::make_shared<Assembler>(
        grid, diff_matrix(grid), grid_permutation(n), fm.sample(grid),
        schedule, data.bdata);
    problem.source = data.g;
    problem.U0 = data.U0;
    problem.t_f = t_f;
    problem.steps = steps;
    const Trajectory traj = solve_forward(problem);
    double err = 0.0;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            err = std::max(err,
                           std::abs(traj.states.back()[grid_index(i, j, n)] -
                                    exact.U(t_f, grid.nodes[i],
                                            grid.nodes[j])));
    return err;
}

}  // namespace

TEST_CASE("cn_step with zero operator is pure quadrature") {
    const Eigen::MatrixXd M = Eigen::MatrixXd::Zero(3, 3);
    const Eigen::VectorXd s = Eigen::VectorXd::Constant(3, 2.0);
    Eigen::VectorXd u(3);
    u << 1.0, -1.0, 0.5;
    const Eigen::VectorXd next = cn_step(M, M, s, s, u, 0.25);
    CHECK((next - (u.array() + 0.5).matrix()).lpNorm<Eigen::Infinity>() <=
          1e-15);
}

TEST_CASE("cn_step reproduces the scalar amplification factor") {
    const double lambda = -3.7, dt = 0.1;
    Eigen::MatrixXd M(1, 1);
    M << lambda;
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd u(1);
    u << 2.0;
    const Eigen::VectorXd next = cn_step(M, M, z, z, u, dt);
    const double amp = (1.0 + 0.5 * lambda * dt) / (1.0 - 0.5 * lambda * dt);
    CHECK(next[0] == doctest::Approx(2.0 * amp).epsilon(1e-14));

    // consistency: amplification -> 1 + lambda dt as dt -> 0
    const double dts = 1e-5;
    const Eigen::VectorXd tiny = cn_step(M, M, z, z, u, dts);
    CHECK(tiny[0] ==
          doctest::Approx(2.0 * (1.0 + lambda * dts)).epsilon(1e-9));
}

TEST_CASE("zero data produce the zero trajectory") {
    const int n = 3;
    const ChebGrid grid = gauss_lobatto_nodes(n);
    PrincipalField f;
    f.k11 = Eigen::MatrixXd::Ones(n + 1, n + 1);
    f.k22 = Eigen::MatrixXd::Ones(n + 1, n + 1);
    ForwardProblem problem;
    problem.assembler = std::make_shared<Assembler>(
        grid, diff_matrix(grid), grid_permutation(n), f,
        ThetaSchedule::constant(0.0, 1.0), zero_boundary_data());
    problem.source = [](double, double, double) { return 0.0; };
    problem.U0 = Eigen::VectorXd::Zero((n + 1) * (n + 1));
    problem.t_f = 1.0;
    problem.steps = 20;
    const Trajectory traj = solve_forward(problem);
    REQUIRE(traj.states.size() == 21);
    for (const auto& u : traj.states)
        CHECK(u.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("manufactured cosine solution is resolved to 1e-6") {
    const double err = solve_max_error(
        decaying_product(true), constant_model(1.0, 1.0),
        ThetaSchedule::constant(0.0, 0.1), 12, 2000, 0.1);
    CHECK(err <= 1e-6);
}

TEST_CASE("temporal convergence is second order") {
    const ManufacturedSolution exact = decaying_product(false);
    const FieldModel fm = constant_model(1.0, 1.0);
    const ThetaSchedule sched = ThetaSchedule::constant(0.0, 0.1);
    const double e1 = solve_max_error(exact, fm, sched, 12, 5, 0.1);
    const double e2 = solve_max_error(exact, fm, sched, 12, 10, 0.1);
    const double ratio = e1 / e2;
    CHECK(ratio >= 3.6);
    CHECK(ratio <= 4.4);
}

TEST_CASE("spatial error decays spectrally") {
    const ManufacturedSolution exact = decaying_product(false);
    const FieldModel fm = constant_model(1.0, 1.0);
    const ThetaSchedule sched = ThetaSchedule::constant(0.0, 0.1);
    const double e8 = solve_max_error(exact, fm, sched, 8, 40, 0.1);
    const double e16 = solve_max_error(exact, fm, sched, 16, 40, 0.1);
    CHECK(e16 < 1e-2 * e8);
}

TEST_CASE("stationary solutions are preserved") {
    ManufacturedSolution s;
    s.U = [](double, double x, double y) { return 1.0 + x * x + y * y; };
    s.Ut = [](double, double, double) { return 0.0; };
    s.Ux = [](double, double x, double) { return 2.0 * x; };
    s.Uy = [](double, double, double y) { return 2.0 * y; };
    s.Uxx = [](double, double, double) { return 2.0; };
    s.Uyy = [](double, double, double) { return 2.0; };
    s.Uxy = [](double, double, double) { return 0.0; };
    const double err = solve_max_error(s, constant_model(2.0, 1.0),
                                       ThetaSchedule::constant(0.4, 1.0), 8,
                                       100, 1.0);
    CHECK(err <= 1e-9);
}

TEST_CASE("manufactured source matches an FD evaluation of the PDE residual") {
    // rotated, anisotropic: g must equal U_t - div(K grad U)
    const ManufacturedSolution exact = decaying_product(false);
    const FieldModel fm = constant_model(2.0, 1.0);
    const ThetaSchedule sched = ThetaSchedule::linear(M_PI / 8.0, 1.0);
    const ChebGrid grid = gauss_lobatto_nodes(6);
    const ManufacturedData data = manufactured_data(exact, fm, sched, grid);

    const double h = 1e-5;
    for (double t : {0.2, 0.9}) {
        const double theta = sched.eval(t);
        for (double x : {0.3, 0.62}) {
            for (double y : {0.15, 0.8}) {
                auto flux = [&](double xx, double yy, int comp) {
                    const TensorSample K = tensor_at(2.0, 1.0, theta);
                    const double ux =
                        (exact.U(t, xx + h, yy) - exact.U(t, xx - h, yy)) /
                        (2.0 * h);
                    const double uy =
                        (exact.U(t, xx, yy + h) - exact.U(t, xx, yy - h)) /
                        (2.0 * h);
                    return comp == 0 ? K.K11 * ux + K.K12 * uy
                                     : K.K21 * ux + K.K22 * uy;
                };
                const double div =
                    (flux(x + h, y, 0) - flux(x - h, y, 0)) / (2.0 * h) +
                    (flux(x, y + h, 1) - flux(x, y - h, 1)) / (2.0 * h);
                const double residual = exact.Ut(t, x, y) - div;
                CHECK(std::abs(data.g(t, x, y) - residual) <= 1e-6);
            }
        }
    }
}

TEST_CASE("CN consistency residual vanishes at every step") {
    const int n = 5;
    const ChebGrid grid = gauss_lobatto_nodes(n);
    PrincipalField f;
    f.k11 = Eigen::MatrixXd::Constant(n + 1, n + 1, 2.0);
    f.k22 = Eigen::MatrixXd::Ones(n + 1, n + 1);
    const ThetaSchedule sched = ThetaSchedule::linear(M_PI / 8.0, 1.0);
    BoundaryData bd;
    bd.f1 = bd.f2 = bd.f3 = bd.f4 = [](double t, double s) {
        return std::sin(t + s);
    };
    auto asmb = std::make_shared<Assembler>(grid, diff_matrix(grid),
                                            grid_permutation(n), f, sched, bd);
    ForwardProblem problem;
    problem.assembler = asmb;
    problem.source = [](double t, double x, double y) { return x * y + t; };
    problem.U0 = Eigen::VectorXd::Constant((n + 1) * (n + 1), 0.5);
    problem.t_f = 0.5;
    problem.steps = 10;
    const Trajectory traj = solve_forward(problem);

    for (int step : {0, 4, 9}) {
        const double t0 = traj.times[step], t1 = traj.times[step + 1];
        const auto op0 = asmb->system(t0);
        const auto op1 = asmb->system(t1);
        const Eigen::VectorXd s0 = asmb->source(problem.source, t0);
        const Eigen::VectorXd s1 = asmb->source(problem.source, t1);
        const Eigen::VectorXd lhs =
            (traj.states[step + 1] - traj.states[step]) / traj.dt;
        const Eigen::VectorXd rhs = 0.5 * (op0.M * traj.states[step] + s0 +
                                           op1.M * traj.states[step + 1] + s1);
        CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
}

TEST_CASE("early stop retains the requested number of steps") {
    const int n = 2;
    const ChebGrid grid = gauss_lobatto_nodes(n);
    PrincipalField f;
    f.k11 = Eigen::MatrixXd::Ones(n + 1, n + 1);
    f.k22 = Eigen::MatrixXd::Ones(n + 1, n + 1);
    ForwardProblem problem;
    problem.assembler = std::make_shared<Assembler>(
        grid, diff_matrix(grid), grid_permutation(n), f,
        ThetaSchedule::constant(0.0, 1.0), zero_boundary_data());
    problem.source = [](double, double, double) { return 1.0; };
    problem.U0 = Eigen::VectorXd::Zero((n + 1) * (n + 1));
    problem.t_f = 1.0;
    problem.steps = 10;
    problem.stop_after = 3;
    const Trajectory traj = solve_forward(problem);
    CHECK(traj.states.size() == 4);
    CHECK(traj.times[3] == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("trajectory interpolation is linear between snapshots") {
    Trajectory traj;
    traj.times.resize(3);
    traj.times << 0.0, 1.0, 2.0;
    traj.dt = 1.0;
    traj.states = {Eigen::VectorXd::Constant(2, 0.0),
                   Eigen::VectorXd::Constant(2, 2.0),
                   Eigen::VectorXd::Constant(2, 6.0)};
    CHECK(traj.at(0.5)[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(traj.at(1.25)[1] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(traj.at(2.0)[0] == doctest::Approx(6.0).epsilon(1e-15));
}
