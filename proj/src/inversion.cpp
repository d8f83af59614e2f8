#include "anisodiff/inversion.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace anisodiff {

void MeasurementSet::validate(double t_f) const {
    if (times.empty())
        throw std::invalid_argument("MeasurementSet: no measurement times");
    if (times.size() != data.size())
        throw std::invalid_argument("MeasurementSet: times/data size mismatch");
    for (std::size_t q = 0; q < times.size(); ++q) {
        if (times[q] < 0.0 || times[q] > t_f * (1.0 + 1e-12))
            throw std::invalid_argument(
                "MeasurementSet: time outside [0, t_f]");
        if (q > 0 && times[q] <= times[q - 1])
            throw std::invalid_argument(
                "MeasurementSet: times must be strictly increasing");
    }
    if (delta < 0.0)
        throw std::invalid_argument("MeasurementSet: negative noise level");
}

Eigen::VectorXd MeasurementSet::stacked() const {
    const int N = data.empty() ? 0 : static_cast<int>(data.front().size());
    Eigen::VectorXd out(static_cast<int>(data.size()) * N);
    for (std::size_t q = 0; q < data.size(); ++q)
        out.segment(static_cast<int>(q) * N, N) = data[q];
    return out;
}

void LMOptions::validate() const {
    if (!(tau > 1.0)) throw std::invalid_argument("LMOptions: tau must be > 1");
    if (!(positivity_floor > 0.0))
        throw std::invalid_argument("LMOptions: positivity floor must be > 0");
    if (max_iterations < 1)
        throw std::invalid_argument("LMOptions: max_iterations < 1");
    if (!(mu_scale > 0.0))
        throw std::invalid_argument("LMOptions: mu_scale must be > 0");
}

ForwardProblem InverseProblem::forward_for(const Eigen::VectorXd& k) const {
    ForwardProblem fwd;
    fwd.assembler = std::make_shared<Assembler>(
        grid, diff, perm, unpack_unknowns(k, grid.n), schedule, bdata);
    fwd.source = source;
    fwd.U0 = U0;
    fwd.t_f = t_f;
    fwd.steps = steps;
    return fwd;
}

ResidualEval residual(const Eigen::VectorXd& k, const InverseProblem& problem,
                      const MeasurementSet& measurements) {
    if ((k.array() <= 0.0).any())
        throw std::domain_error("residual: unknown vector must be positive");
    measurements.validate(problem.t_f);

    ResidualEval eval;
    eval.trajectory = solve_forward(problem.forward_for(k));
    const int N = (problem.grid.n + 1) * (problem.grid.n + 1);
    eval.F.resize(static_cast<int>(measurements.times.size()) * N);
    for (std::size_t q = 0; q < measurements.times.size(); ++q)
        eval.F.segment(static_cast<int>(q) * N, N) =
            eval.trajectory.at(measurements.times[q]) - measurements.data[q];
    eval.phi = 0.5 * eval.F.squaredNorm();
    return eval;
}

Eigen::VectorXd lm_direction(const Eigen::MatrixXd& J, const Eigen::VectorXd& F,
                             double mu, const Eigen::VectorXd& Dscale) {
    if (mu < 0.0) throw std::invalid_argument("lm_direction: mu < 0");
    Eigen::MatrixXd A = J.transpose() * J;
    A.diagonal() += mu * Dscale.cwiseAbs2();
    const Eigen::VectorXd rhs = -J.transpose() * F;

    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
        Eigen::VectorXd d = llt.solve(rhs);
        if (d.allFinite()) return d;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd d = lu.solve(rhs);
    if (!d.allFinite())
        throw std::runtime_error(
            "lm_direction: normal equations indefinite at mu = " +
            std::to_string(mu) + "; increase the damping");
    return d;
}

namespace {

Eigen::VectorXd scaling_vector(const Eigen::MatrixXd& J,
                               LMOptions::Scaling mode) {
    if (mode == LMOptions::Scaling::Identity)
        return Eigen::VectorXd::Ones(J.cols());
    Eigen::VectorXd s(J.cols());
    for (int c = 0; c < J.cols(); ++c)
        s[c] = std::max(J.col(c).norm(), 1e-8);
    return s;
}

}  // namespace

LMResult lm_solve(const Eigen::VectorXd& k0, const InverseProblem& problem,
                  const MeasurementSet& measurements, const LMOptions& opts) {
    opts.validate();
    measurements.validate(problem.t_f);

    LMResult result;
    Eigen::VectorXd k = k0.cwiseMax(opts.positivity_floor);
    ResidualEval eval = residual(k, problem, measurements);
    double res_norm = eval.F.norm();
    result.history.push_back({0, eval.phi, res_norm, 0.0, true});

    const double data_scale = std::max(1.0, measurements.stacked().norm());
    const double morozov = opts.tau * measurements.delta;

    auto finish = [&](LMStop stop, bool converged, int iters) {
        result.k = k;
        result.stop = stop;
        result.converged = converged;
        result.res_norm = res_norm;
        result.iterations = iters;
        return result;
    };

    if (measurements.delta > 0.0 && res_norm <= morozov)
        return finish(LMStop::Immediate, true, 0);
    if (res_norm <= 1e-14 * data_scale)
        return finish(LMStop::Immediate, true, 0);

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        const StackedJacobian jac = full_jacobian(
            problem.forward_for(k), eval.trajectory, measurements.times,
            opts.threads);
        const Eigen::VectorXd Dscale = scaling_vector(jac.J, opts.scaling);

        double mu = std::clamp(opts.mu_scale * eval.F.squaredNorm(), 1e-12,
                               1e8);
        bool accepted = false;
        double step_norm = 0.0;
        while (true) {
            const Eigen::VectorXd d = lm_direction(jac.J, eval.F, mu, Dscale);
            const Eigen::VectorXd k_trial =
                (k + d).cwiseMax(opts.positivity_floor);
            ResidualEval trial = residual(k_trial, problem, measurements);
            if (trial.phi < eval.phi) {
                step_norm = (k_trial - k).norm();
                k = k_trial;
                eval = std::move(trial);
                res_norm = eval.F.norm();
                result.history.push_back({iter, eval.phi, res_norm, mu, true});
                accepted = true;
                break;
            }
            result.history.push_back({iter, trial.phi, trial.F.norm(), mu,
                                      false});
            mu *= 10.0;
            if (mu > 1e8) break;
        }
        if (!accepted) return finish(LMStop::MaxIterations, false, iter);

        if (measurements.delta > 0.0 && res_norm <= morozov)
            return finish(LMStop::Discrepancy, true, iter);
        if (step_norm <= opts.step_tol * (1.0 + k.norm())) {
            // with noisy data, stalling above the discrepancy level is a
            // failure, not convergence
            const bool ok = measurements.delta <= 0.0 || res_norm <= morozov;
            return finish(LMStop::StepTol, ok, iter);
        }
    }
    return finish(LMStop::MaxIterations, false, opts.max_iterations);
}

MeasurementSet add_noise(const MeasurementSet& clean, double level,
                         std::uint64_t seed) {
    if (level < 0.0) throw std::invalid_argument("add_noise: negative level");
    MeasurementSet noisy = clean;
    noisy.delta = 0.0;
    if (level == 0.0) return noisy;

    double uinf = 0.0;
    for (const auto& u : clean.data)
        uinf = std::max(uinf, u.lpNorm<Eigen::Infinity>());
    const double sigma = level * uinf;

    // Box-Muller on top of mt19937_64 keeps the stream independent of the
    // standard library's normal_distribution implementation.
    std::mt19937_64 rng(seed);
    auto gauss = [&rng]() {
        const double u1 =
            (static_cast<double>(rng() >> 11) + 1.0) / 9007199254740993.0;
        const double u2 = static_cast<double>(rng() >> 11) / 9007199254740992.0;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };

    double delta_sq = 0.0;
    for (auto& u : noisy.data)
        for (int r = 0; r < u.size(); ++r) {
            const double xi = sigma * gauss();
            u[r] += xi;
            delta_sq += xi * xi;
        }
    noisy.delta = std::sqrt(delta_sq);
    return noisy;
}

}  // namespace anisodiff
