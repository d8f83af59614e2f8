#include "anisodiff/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace anisodiff {

namespace {

ParamDerivative param_derivative(int ell, const Assembler& asmb,
                                 const Assembler::Closure& cl) {
    const int N = asmb.size();
    if (ell < 0 || ell >= 2 * N)
        throw std::out_of_range("dM_dk: unknown index out of range");
    const bool is_k11 = ell < N;
    const int p = is_k11 ? ell : ell - N;
    const int n = asmb.grid().n;
    const int ip = p % (n + 1);
    const int jp = p / (n + 1);

    const TrigCoeffs c = trig_coeffs(cl.theta);
    const double dT11 = is_k11 ? c.C2 : c.Si2;
    const double dT12 = is_k11 ? c.Si : -c.Si;
    const double dT22 = is_k11 ? c.Si2 : c.C2;

    const Eigen::MatrixXd& Dx = asmb.dx_matrix();
    const Eigen::MatrixXd& Dy = asmb.dy_matrix();

    // Closure rows depend on k only at their own edge node.
    Eigen::VectorXd dux = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd duy = Eigen::VectorXd::Zero(N);
    double dcx = 0.0, dcy = 0.0;
    if (ip == 0 || ip == n) {
        const double pv = cl.t11[p];
        dux = -(dT11 / pv) * cl.UX.row(p).transpose() -
              (dT12 / pv) * Dy.row(p).transpose();
        dcx = -(dT11 / pv) * cl.cx[p];
    }
    if (jp == 0 || jp == n) {
        const double pv = cl.t22[p];
        duy = -(dT22 / pv) * cl.UY.row(p).transpose() -
              (dT12 / pv) * Dx.row(p).transpose();
        dcy = -(dT22 / pv) * cl.cy[p];
    }

    ParamDerivative d;
    d.ell = ell;
    d.node = p;
    d.dx_col = Dx.col(p);
    d.dy_col = Dy.col(p);
    d.w1 = dT11 * cl.UX.row(p).transpose() + dT12 * cl.UY.row(p).transpose() +
           cl.t11[p] * dux + cl.t12[p] * duy;
    d.w2 = dT12 * cl.UX.row(p).transpose() + dT22 * cl.UY.row(p).transpose() +
           cl.t12[p] * dux + cl.t22[p] * duy;
    d.s1 = dT11 * cl.cx[p] + dT12 * cl.cy[p] + cl.t11[p] * dcx +
           cl.t12[p] * dcy;
    d.s2 = dT12 * cl.cx[p] + dT22 * cl.cy[p] + cl.t12[p] * dcx +
           cl.t22[p] * dcy;
    return d;
}

// Integrates the sensitivity IVPs for the given unknowns with the same CN
// scheme and step size as the forward solve, sampling at measurement times.
// Returns a (N_times * N) x |ells| matrix.
Eigen::MatrixXd integrate_block(const ForwardProblem& problem,
                                const Trajectory& traj,
                                const std::vector<int>& ells,
                                const std::vector<double>& mtimes) {
    const Assembler& asmb = *problem.assembler;
    const int N = asmb.size();
    const int L = static_cast<int>(ells.size());
    const int steps = static_cast<int>(traj.states.size()) - 1;
    const double dt = traj.dt;

    Eigen::MatrixXd out((int)mtimes.size() * N, L);
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(N, L);       // zero IC
    Eigen::MatrixXd Vprev = V;

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);

    Assembler::Closure cl_i = asmb.closure(0.0);
    std::vector<ParamDerivative> pd_i(L);
    for (int c = 0; c < L; ++c) pd_i[c] = param_derivative(ells[c], asmb, cl_i);

    Eigen::MatrixXd M_i = asmb.system(0.0).M;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(I - 0.5 * dt * M_i);
    double theta_fact = cl_i.theta;

    auto forcing = [&](const std::vector<ParamDerivative>& pds,
                       const Eigen::VectorXd& U) {
        Eigen::MatrixXd W(N, L);
        for (int c = 0; c < L; ++c) W.col(c) = pds[c].forcing(U);
        return W;
    };

    // record columns at any measurement time equal to 0
    auto record = [&](double t0, double t1, const Eigen::MatrixXd& V0,
                      const Eigen::MatrixXd& V1) {
        for (std::size_t q = 0; q < mtimes.size(); ++q) {
            const double tq = mtimes[q];
            const double lo = t0 - 1e-12 * std::max(1.0, problem.t_f);
            const double hi = t1 + 1e-12 * std::max(1.0, problem.t_f);
            if (tq <= lo || tq > hi) continue;
            const double w = std::clamp((tq - t0) / (t1 - t0), 0.0, 1.0);
            out.middleRows((int)q * N, N) = (1.0 - w) * V0 + w * V1;
        }
    };
    for (std::size_t q = 0; q < mtimes.size(); ++q)
        if (mtimes[q] <= 1e-12 * std::max(1.0, problem.t_f))
            out.middleRows((int)q * N, N).setZero();

    Eigen::MatrixXd W_i = forcing(pd_i, traj.states[0]);

    for (int step = 0; step < steps; ++step) {
        const double t0 = traj.times[step];
        const double t1 = traj.times[step + 1];

        Assembler::Closure cl_next = asmb.closure(t1);
        std::vector<ParamDerivative> pd_next(L);
        for (int c = 0; c < L; ++c)
            pd_next[c] = param_derivative(ells[c], asmb, cl_next);
        Eigen::MatrixXd M_next = M_i;
        if (std::abs(cl_next.theta - theta_fact) > 1e-14) {
            M_next = asmb.system(t1).M;
            lu.compute(I - 0.5 * dt * M_next);
            theta_fact = cl_next.theta;
        }
        Eigen::MatrixXd W_next = forcing(pd_next, traj.states[step + 1]);

        Vprev = V;
        Eigen::MatrixXd rhs = V + 0.5 * dt * (M_i * V + W_i + W_next);
        V = lu.solve(rhs);

        record(t0, t1, Vprev, V);
        M_i = M_next;
        W_i = W_next;
    }
    return out;
}

}  // namespace

ParamDerivative dM_dk(int ell, const Assembler& assembler, double t) {
    return param_derivative(ell, assembler, assembler.closure(t));
}

Eigen::VectorXd jacobian_column(int ell, const ForwardProblem& problem,
                                const Trajectory& trajectory,
                                const std::vector<double>& measurement_times) {
    return integrate_block(problem, trajectory, {ell}, measurement_times);
}

StackedJacobian full_jacobian(const ForwardProblem& problem,
                              const Trajectory& trajectory,
                              const std::vector<double>& measurement_times,
                              int threads) {
    const int N = problem.assembler->size();
    const int L = 2 * N;
    StackedJacobian jac;
    jac.times = measurement_times;
    jac.J.resize(static_cast<int>(measurement_times.size()) * N, L);

    threads = std::clamp(threads, 1, L);
    if (threads == 1) {
        std::vector<int> ells(L);
        for (int c = 0; c < L; ++c) ells[c] = c;
        jac.J = integrate_block(problem, trajectory, ells, measurement_times);
        return jac;
    }

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const int chunk = (L + threads - 1) / threads;
    for (int tix = 0; tix < threads; ++tix) {
        pool.emplace_back([&, tix] {
            try {
                const int lo = tix * chunk;
                const int hi = std::min(L, lo + chunk);
                if (lo >= hi) return;
                std::vector<int> ells;
                for (int c = lo; c < hi; ++c) ells.push_back(c);
                jac.J.middleCols(lo, hi - lo) =
                    integrate_block(problem, trajectory, ells,
                                    measurement_times);
            } catch (...) {
                errors[tix] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    return jac;
}

StackedJacobian fd_jacobian(
    const Eigen::VectorXd& k,
    const std::function<ForwardProblem(const Eigen::VectorXd&)>& rebuild_problem,
    const std::vector<double>& measurement_times, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("fd_jacobian: h <= 0");
    const int L = static_cast<int>(k.size());

    auto sample = [&](const Eigen::VectorXd& kv) {
        ForwardProblem problem = rebuild_problem(kv);
        const Trajectory traj = solve_forward(problem);
        const int N = problem.assembler->size();
        Eigen::VectorXd stacked(static_cast<int>(measurement_times.size()) * N);
        for (std::size_t q = 0; q < measurement_times.size(); ++q)
            stacked.segment(static_cast<int>(q) * N, N) =
                traj.at(measurement_times[q]);
        return stacked;
    };

    StackedJacobian jac;
    jac.times = measurement_times;
    for (int ell = 0; ell < L; ++ell) {
        const double he = h * (1.0 + std::abs(k[ell]));
        Eigen::VectorXd kp = k, km = k;
        kp[ell] += he;
        km[ell] -= he;
        if (!(km[ell] > 0.0))
            throw std::domain_error(
                "fd_jacobian: perturbed unknown loses positivity");
        const Eigen::VectorXd up = sample(kp);
        const Eigen::VectorXd um = sample(km);
        if (ell == 0) jac.J.resize(up.size(), L);
        jac.J.col(ell) = (up - um) / (2.0 * he);
    }
    return jac;
}

StackedJacobian richardson_fd_jacobian(
    const Eigen::VectorXd& k,
    const std::function<ForwardProblem(const Eigen::VectorXd&)>& rebuild_problem,
    const std::vector<double>& measurement_times, double h) {
    StackedJacobian coarse = fd_jacobian(k, rebuild_problem,
                                         measurement_times, h);
    const StackedJacobian fine = fd_jacobian(k, rebuild_problem,
                                             measurement_times, h / 2.0);
    coarse.J = (4.0 * fine.J - coarse.J) / 3.0;
    return coarse;
}

Eigen::VectorXd pack_unknowns(const PrincipalField& field) {
    const int N = static_cast<int>(field.k11.size());
    Eigen::VectorXd k(2 * N);
    k.head(N) = Eigen::Map<const Eigen::VectorXd>(field.k11.data(), N);
    k.tail(N) = Eigen::Map<const Eigen::VectorXd>(field.k22.data(), N);
    return k;
}

PrincipalField unpack_unknowns(const Eigen::VectorXd& k, int n) {
    const int N = (n + 1) * (n + 1);
    if (k.size() != 2 * N)
        throw std::invalid_argument("unpack_unknowns: wrong length");
    PrincipalField f;
    f.k11 = Eigen::Map<const Eigen::MatrixXd>(k.data(), n + 1, n + 1);
    f.k22 = Eigen::Map<const Eigen::MatrixXd>(k.data() + N, n + 1, n + 1);
    return f;
}

}  // namespace anisodiff
