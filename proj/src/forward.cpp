#include "anisodiff/forward.hpp"

#include <cmath>
#include <stdexcept>

namespace anisodiff {

void ForwardProblem::validate() const {
    if (!assembler) throw std::invalid_argument("ForwardProblem: no assembler");
    if (!source) throw std::invalid_argument("ForwardProblem: no source");
    if (!(t_f > 0.0)) throw std::invalid_argument("ForwardProblem: t_f <= 0");
    if (steps < 1) throw std::invalid_argument("ForwardProblem: steps < 1");
    if (U0.size() != assembler->size())
        throw std::invalid_argument("ForwardProblem: U0 has wrong length");
    if (stop_after && (*stop_after < 1 || *stop_after > steps))
        throw std::invalid_argument("ForwardProblem: stop_after out of range");
}

Eigen::VectorXd Trajectory::at(double t) const {
    const int count = static_cast<int>(states.size());
    if (count == 0) throw std::logic_error("Trajectory: empty");
    if (t <= times[0]) return states.front();
    if (t >= times[count - 1]) return states.back();
    const double pos = (t - times[0]) / dt;
    int i = std::min(static_cast<int>(pos), count - 2);
    const double w = (t - times[i]) / dt;
    if (w < 1e-12) return states[i];
    if (w > 1.0 - 1e-12) return states[i + 1];
    return (1.0 - w) * states[i] + w * states[i + 1];
}

namespace {

void check_conditioning(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                        int step_index) {
    const Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
    const double dmax = diag.maxCoeff();
    const double dmin = diag.minCoeff();
    if (!(dmin > 0.0) || dmax / dmin > 1e14)
        throw StepFailure(step_index,
                          "Crank-Nicolson matrix singular or ill-conditioned "
                          "(pivot ratio above 1e14) at step " +
                              std::to_string(step_index));
}

}  // namespace

Eigen::VectorXd cn_step(const Eigen::MatrixXd& M_i,
                        const Eigen::MatrixXd& M_ip1,
                        const Eigen::VectorXd& Sg_i,
                        const Eigen::VectorXd& Sg_ip1,
                        const Eigen::VectorXd& U_i, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("cn_step: dt <= 0");
    const int N = static_cast<int>(U_i.size());
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(N, N) - 0.5 * dt * M_ip1;
    Eigen::VectorXd rhs = U_i + 0.5 * dt * (M_i * U_i + Sg_i + Sg_ip1);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
    check_conditioning(lu, 0);
    return lu.solve(rhs);
}

Trajectory solve_forward(const ForwardProblem& problem) {
    problem.validate();
    const Assembler& asmb = *problem.assembler;
    const int N = asmb.size();
    const int steps = problem.stop_after.value_or(problem.steps);
    const double dt = problem.t_f / problem.steps;

    Trajectory traj;
    traj.dt = dt;
    traj.times.resize(steps + 1);
    traj.states.reserve(steps + 1);
    traj.states.push_back(problem.U0);
    traj.times[0] = 0.0;

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);

    Eigen::MatrixXd M_i = asmb.system(0.0).M;
    Eigen::VectorXd Sg_i = asmb.source(problem.source, 0.0);
    double theta_i = asmb.schedule().eval(0.0);

    // LU of (I - dt/2 M) is refactored only when theta moves; M depends
    // on t through theta alone.
    Eigen::MatrixXd M_next = M_i;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(I - 0.5 * dt * M_i);
    double theta_fact = theta_i;
    check_conditioning(lu, 0);

    for (int step = 0; step < steps; ++step) {
        const double t1 = (step + 1) * dt;
        const double theta_next = asmb.schedule().eval(t1);
        if (std::abs(theta_next - theta_fact) > 1e-14) {
            M_next = asmb.system(t1).M;
            lu.compute(I - 0.5 * dt * M_next);
            theta_fact = theta_next;
            try {
                check_conditioning(lu, step);
            } catch (const StepFailure&) {
                throw StepFailure(step, "Crank-Nicolson factorization failed at "
                                        "step " + std::to_string(step));
            }
        }
        const Eigen::VectorXd Sg_next = asmb.source(problem.source, t1);
        Eigen::VectorXd rhs =
            traj.states.back() +
            0.5 * dt * (M_i * traj.states.back() + Sg_i + Sg_next);
        traj.states.push_back(lu.solve(rhs));
        traj.times[step + 1] = t1;
        if (!traj.states.back().allFinite())
            throw StepFailure(step, "non-finite state after step " +
                                        std::to_string(step));
        M_i = M_next;
        Sg_i = Sg_next;
    }
    return traj;
}

PrincipalField FieldModel::sample(const ChebGrid& grid) const {
    const int n = grid.n;
    PrincipalField f;
    f.k11.resize(n + 1, n + 1);
    f.k22.resize(n + 1, n + 1);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            f.k11(i, j) = k11(grid.nodes[i], grid.nodes[j]);
            f.k22(i, j) = k22(grid.nodes[i], grid.nodes[j]);
        }
    return f;
}

ManufacturedData manufactured_data(const ManufacturedSolution& exact,
                                   const FieldModel& field,
                                   const ThetaSchedule& schedule,
                                   const ChebGrid& grid) {
    ManufacturedData out;

    out.g = [exact, field, schedule](double t, double x, double y) {
        const TrigCoeffs c = trig_coeffs(schedule.eval(t));
        const double k11 = field.k11(x, y), k22 = field.k22(x, y);
        const double k11x = field.dk11_dx(x, y), k11y = field.dk11_dy(x, y);
        const double k22x = field.dk22_dx(x, y), k22y = field.dk22_dy(x, y);
        const double ux = exact.Ux(t, x, y), uy = exact.Uy(t, x, y);
        const double uxx = exact.Uxx(t, x, y), uxy = exact.Uxy(t, x, y);
        const double uyy = exact.Uyy(t, x, y);
        // div(K grad U) expanded term by term with theta(t) frozen
        double div = 0.0;
        div += c.C2 * (k11x * ux + k11 * uxx);
        div += c.Si2 * (k22x * ux + k22 * uxx);
        div += c.Si * (k11x * uy + k11 * uxy);
        div -= c.Si * (k22x * uy + k22 * uxy);
        div += c.Si * (k11y * ux + k11 * uxy);
        div -= c.Si * (k22y * ux + k22 * uxy);
        div += c.Si2 * (k11y * uy + k11 * uyy);
        div += c.C2 * (k22y * uy + k22 * uyy);
        return exact.Ut(t, x, y) - div;
    };

    auto tensor = [field, schedule](double t, double x, double y) {
        return tensor_at(field.k11(x, y), field.k22(x, y), schedule.eval(t));
    };
    out.bdata.f1 = [exact, tensor](double t, double y) {
        const TensorSample K = tensor(t, 0.0, y);
        return exact.U(t, 0.0, y) - K.K11 * exact.Ux(t, 0.0, y) -
               K.K12 * exact.Uy(t, 0.0, y);
    };
    out.bdata.f2 = [exact, tensor](double t, double y) {
        const TensorSample K = tensor(t, 1.0, y);
        return exact.U(t, 1.0, y) + K.K11 * exact.Ux(t, 1.0, y) +
               K.K12 * exact.Uy(t, 1.0, y);
    };
    out.bdata.f3 = [exact, tensor](double t, double x) {
        const TensorSample K = tensor(t, x, 0.0);
        return exact.U(t, x, 0.0) - K.K21 * exact.Ux(t, x, 0.0) -
               K.K22 * exact.Uy(t, x, 0.0);
    };
    out.bdata.f4 = [exact, tensor](double t, double x) {
        const TensorSample K = tensor(t, x, 1.0);
        return exact.U(t, x, 1.0) + K.K21 * exact.Ux(t, x, 1.0) +
               K.K22 * exact.Uy(t, x, 1.0);
    };

    const int n = grid.n;
    out.U0.resize((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            out.U0[grid_index(i, j, n)] =
                exact.U(0.0, grid.nodes[i], grid.nodes[j]);
    return out;
}

}  // namespace anisodiff
