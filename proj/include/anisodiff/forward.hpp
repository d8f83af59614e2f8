#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "anisodiff/assembly.hpp"

namespace anisodiff {

using SourceFn = std::function<double(double, double, double)>;  // g(t,x,y)

struct ForwardProblem {
    std::shared_ptr<const Assembler> assembler;
    SourceFn source;
    Eigen::VectorXd U0;     // (n+1)^2 entries, block order
    double t_f = 1.0;
    int steps = 1;          // number of CN steps
    std::optional<int> stop_after;  // integrate only this many steps

    void validate() const;
};

struct Trajectory {
    Eigen::VectorXd times;
    std::vector<Eigen::VectorXd> states;
    double dt = 0.0;

    /// State at an arbitrary time in [times(0), times(last)], linear
    /// interpolation between snapshots.
    Eigen::VectorXd at(double t) const;
};

struct StepFailure : std::runtime_error {
    int step_index;
    StepFailure(int idx, const std::string& what)
        : std::runtime_error(what), step_index(idx) {}
};

/// One Crank-Nicolson step:
/// (I - dt/2 M_{i+1}) U_{i+1} = (I + dt/2 M_i) U_i + dt/2 (Sg_i + Sg_{i+1}).
Eigen::VectorXd cn_step(const Eigen::MatrixXd& M_i,
                        const Eigen::MatrixXd& M_ip1,
                        const Eigen::VectorXd& Sg_i,
                        const Eigen::VectorXd& Sg_ip1,
                        const Eigen::VectorXd& U_i, double dt);

Trajectory solve_forward(const ForwardProblem& problem);

/// Closed-form exact solution with the derivatives needed to manufacture
/// source and boundary data.
struct ManufacturedSolution {
    std::function<double(double, double, double)> U, Ut, Ux, Uy, Uxx, Uxy, Uyy;
};

/// Closed-form principal diffusivities with first partials.
struct FieldModel {
    std::function<double(double, double)> k11, k22;
    std::function<double(double, double)> dk11_dx, dk11_dy;
    std::function<double(double, double)> dk22_dx, dk22_dy;

    PrincipalField sample(const ChebGrid& grid) const;
};

struct ManufacturedData {
    SourceFn g;
    BoundaryData bdata;
    Eigen::VectorXd U0;  // samples on the given grid, block order
};

/// Reverse-engineers g = U_t - div(K grad U) and the four Robin data
/// functions from an exact solution, so the solver can be verified
/// against it.
ManufacturedData manufactured_data(const ManufacturedSolution& exact,
                                   const FieldModel& field,
                                   const ThetaSchedule& schedule,
                                   const ChebGrid& grid);

}  // namespace anisodiff
