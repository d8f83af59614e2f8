#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "anisodiff/expr.hpp"
#include "anisodiff/inversion.hpp"

namespace anisodiff {

enum class RunMode { Forward, Synth, Invert, CheckJacobian, MmsConvergence };

struct RunConfig {
    RunMode mode = RunMode::Forward;
    int n = 4;
    double t_f = 1.0;
    int steps = 100;

    ThetaSchedule schedule = ThetaSchedule::constant(0.0, 1.0);

    // field: either expressions in (x, y) or a field file
    std::optional<Expression> k11_expr, k22_expr;
    std::optional<std::string> field_file;

    Expression f1 = Expression::parse("0");
    Expression f2 = Expression::parse("0");
    Expression f3 = Expression::parse("0");
    Expression f4 = Expression::parse("0");
    Expression source_expr = Expression::parse("0");
    Expression initial_expr = Expression::parse("0");

    std::vector<double> measurement_times;  // empty: solver time nodes
    double noise_level = 0.0;
    std::uint64_t seed = 0;
    std::optional<std::string> measurements_file;

    std::optional<Expression> truth_k11, truth_k22;

    LMOptions lm;
    std::optional<Expression> guess_k11, guess_k22;
    double guess_value = 1.0;

    std::string output_dir = ".";
};

/// Parses and validates a JSON run configuration.  Errors carry the file
/// path and the offending field.
RunConfig parse_config(const std::string& path);

/// Runs the configured mode, writing artifacts into output_dir.
/// Returns the process exit status: 0 success, 1 usage/config error,
/// 2 numerical failure, 3 non-convergence.
int run(const RunConfig& config);

}  // namespace anisodiff
