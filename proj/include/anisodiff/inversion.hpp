#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "anisodiff/sensitivity.hpp"

namespace anisodiff {

/// Time-stamped state observations plus the noise level used by the
/// discrepancy stopping rule.
struct MeasurementSet {
    std::vector<double> times;           // strictly increasing, in [0, t_f]
    std::vector<Eigen::VectorXd> data;   // one (n+1)^2 vector per time
    double delta = 0.0;                  // ||noisy - clean||_2 (0 if clean)

    void validate(double t_f) const;
    Eigen::VectorXd stacked() const;
};

struct LMOptions {
    double mu_scale = 1.0;        // mu_j = mu_scale * ||F||^2 (Yamashita-Fukushima)
    enum class Scaling { Identity, ColumnNorm };
    Scaling scaling = Scaling::Identity;
    double tau = 1.05;            // Morozov factor
    int max_iterations = 50;
    double step_tol = 1e-12;
    double positivity_floor = 1e-6;
    int threads = 1;

    void validate() const;
};

/// Everything needed to evaluate the forward map for a candidate field.
/// The field inside the template assembler is replaced per evaluation.
struct InverseProblem {
    ChebGrid grid;
    DiffOperators diff;
    GridPermutation perm;
    ThetaSchedule schedule;
    BoundaryData bdata;
    SourceFn source;
    Eigen::VectorXd U0;
    double t_f = 1.0;
    int steps = 1;

    ForwardProblem forward_for(const Eigen::VectorXd& k) const;
};

struct ResidualEval {
    Eigen::VectorXd F;   // stacked U(k, t_q) - data_q
    double phi = 0.0;    // 0.5 ||F||^2
    Trajectory trajectory;
};

ResidualEval residual(const Eigen::VectorXd& k, const InverseProblem& problem,
                      const MeasurementSet& measurements);

/// Solves (J^T J + mu D^T D) d = -J^T F.
Eigen::VectorXd lm_direction(const Eigen::MatrixXd& J, const Eigen::VectorXd& F,
                             double mu, const Eigen::VectorXd& Dscale);

struct LMRecord {
    int iteration = 0;
    double phi = 0.0;
    double res_norm = 0.0;
    double mu = 0.0;
    bool accepted = true;
};

enum class LMStop { Discrepancy, StepTol, MaxIterations, Immediate };

struct LMResult {
    Eigen::VectorXd k;
    std::vector<LMRecord> history;
    LMStop stop = LMStop::MaxIterations;
    bool converged = false;
    double res_norm = 0.0;
    int iterations = 0;
};

LMResult lm_solve(const Eigen::VectorXd& k0, const InverseProblem& problem,
                  const MeasurementSet& measurements, const LMOptions& opts);

/// Adds i.i.d. Gaussian noise of size level * ||U||_inf to every sample
/// and records the exact delta.  Deterministic for a fixed seed.
MeasurementSet add_noise(const MeasurementSet& clean, double level,
                         std::uint64_t seed);

}  // namespace anisodiff
