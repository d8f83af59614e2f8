#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "anisodiff/config.hpp"
#include "anisodiff/io.hpp"

namespace anisodiff {

namespace {

namespace fs = std::filesystem;

struct Setup {
    ChebGrid grid;
    DiffOperators diff;
    GridPermutation perm;
    BoundaryData bdata;
    SourceFn source;
    Eigen::VectorXd U0;
};

Setup make_setup(const RunConfig& cfg) {
    Setup s;
    s.grid = gauss_lobatto_nodes(cfg.n);
    s.diff = diff_matrix(s.grid);
    s.perm = grid_permutation(cfg.n);
    s.bdata.f1 = [e = cfg.f1](double t, double y) { return e.eval(t, 0.0, y); };
    s.bdata.f2 = [e = cfg.f2](double t, double y) { return e.eval(t, 1.0, y); };
    s.bdata.f3 = [e = cfg.f3](double t, double x) { return e.eval(t, x, 0.0); };
    s.bdata.f4 = [e = cfg.f4](double t, double x) { return e.eval(t, x, 1.0); };
    s.source = [e = cfg.source_expr](double t, double x, double y) {
        return e.eval(t, x, y);
    };
    const int n = cfg.n;
    s.U0.resize((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            s.U0[grid_index(i, j, n)] =
                cfg.initial_expr.eval(0.0, s.grid.nodes[i], s.grid.nodes[j]);
    return s;
}

PrincipalField field_from_exprs(const Expression& k11, const Expression& k22,
                                const ChebGrid& grid) {
    const int n = grid.n;
    PrincipalField f;
    f.k11.resize(n + 1, n + 1);
    f.k22.resize(n + 1, n + 1);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            f.k11(i, j) = k11.eval(0.0, grid.nodes[i], grid.nodes[j]);
            f.k22(i, j) = k22.eval(0.0, grid.nodes[i], grid.nodes[j]);
        }
    return f;
}

PrincipalField load_field(const RunConfig& cfg, const ChebGrid& grid) {
    if (cfg.field_file) return read_field_file(*cfg.field_file);
    if (cfg.k11_expr && cfg.k22_expr)
        return field_from_exprs(*cfg.k11_expr, *cfg.k22_expr, grid);
    throw std::invalid_argument("config: no \"field\" given");
}

std::vector<double> measurement_times(const RunConfig& cfg) {
    if (!cfg.measurement_times.empty()) return cfg.measurement_times;
    std::vector<double> times;  // default: the solver's own time nodes
    const double dt = cfg.t_f / cfg.steps;
    for (int s = 1; s <= cfg.steps; ++s) times.push_back(s * dt);
    return times;
}

double interior_rel_l2(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
    const int n = static_cast<int>(got.rows()) - 1;
    double num = 0.0, den = 0.0;
    for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i) {
            num += (got(i, j) - want(i, j)) * (got(i, j) - want(i, j));
            den += want(i, j) * want(i, j);
        }
    return std::sqrt(num) / std::sqrt(std::max(den, 1e-300));
}

int run_forward(const RunConfig& cfg, const Setup& setup) {
    ForwardProblem problem;
    problem.assembler = std::make_shared<Assembler>(
        setup.grid, setup.diff, setup.perm, load_field(cfg, setup.grid),
        cfg.schedule, setup.bdata);
    problem.source = setup.source;
    problem.U0 = setup.U0;
    problem.t_f = cfg.t_f;
    problem.steps = cfg.steps;

    const Trajectory traj = solve_forward(problem);
    write_snapshots(cfg.output_dir + "/snapshots.csv",
                    {cfg.n, cfg.t_f, cfg.steps}, traj);
    std::cout << "forward: wrote " << traj.states.size() << " snapshots\n";
    return 0;
}

int run_synth(const RunConfig& cfg, const Setup& setup) {
    ForwardProblem problem;
    problem.assembler = std::make_shared<Assembler>(
        setup.grid, setup.diff, setup.perm, load_field(cfg, setup.grid),
        cfg.schedule, setup.bdata);
    problem.source = setup.source;
    problem.U0 = setup.U0;
    problem.t_f = cfg.t_f;
    problem.steps = cfg.steps;

    const Trajectory traj = solve_forward(problem);
    write_snapshots(cfg.output_dir + "/snapshots.csv",
                    {cfg.n, cfg.t_f, cfg.steps}, traj);

    MeasurementSet clean;
    clean.times = measurement_times(cfg);
    for (double tq : clean.times) clean.data.push_back(traj.at(tq));
    const MeasurementSet noisy = add_noise(clean, cfg.noise_level, cfg.seed);
    write_measurements(cfg.output_dir + "/measurements.csv", cfg.n, noisy);
    std::cout << "synth: " << noisy.times.size()
              << " measurement times, delta=" << format_full(noisy.delta)
              << "\n";
    return 0;
}

int run_invert(const RunConfig& cfg, const Setup& setup) {
    if (!cfg.measurements_file)
        throw std::invalid_argument(
            "config: invert mode needs \"measurement.file\"");
    int n_meas = 0;
    const MeasurementSet measurements =
        read_measurements(*cfg.measurements_file, n_meas);
    if (n_meas != cfg.n)
        throw std::invalid_argument("config: measurement grid degree " +
                                    std::to_string(n_meas) +
                                    " does not match n");

    InverseProblem problem;
    problem.grid = setup.grid;
    problem.diff = setup.diff;
    problem.perm = setup.perm;
    problem.schedule = cfg.schedule;
    problem.bdata = setup.bdata;
    problem.source = setup.source;
    problem.U0 = setup.U0;
    problem.t_f = cfg.t_f;
    problem.steps = cfg.steps;

    Eigen::VectorXd k0;
    if (cfg.guess_k11 && cfg.guess_k22) {
        k0 = pack_unknowns(
            field_from_exprs(*cfg.guess_k11, *cfg.guess_k22, setup.grid));
    } else {
        const int N = (cfg.n + 1) * (cfg.n + 1);
        k0 = Eigen::VectorXd::Constant(2 * N, cfg.guess_value);
    }

    const LMResult result = lm_solve(k0, problem, measurements, cfg.lm);
    const PrincipalField recon = unpack_unknowns(result.k, cfg.n);
    write_field_file(cfg.output_dir + "/fields_out.csv", setup.grid, recon);
    write_history(cfg.output_dir + "/history.csv", result.history);

    std::ofstream summary(cfg.output_dir + "/summary.json", std::ios::binary);
    summary << "{\n  \"converged\": " << (result.converged ? "true" : "false")
            << ",\n  \"iterations\": " << result.iterations
            << ",\n  \"residual_norm\": " << format_full(result.res_norm)
            << ",\n  \"delta\": " << format_full(measurements.delta);
    if (cfg.truth_k11 && cfg.truth_k22) {
        const PrincipalField truth =
            field_from_exprs(*cfg.truth_k11, *cfg.truth_k22, setup.grid);
        summary << ",\n  \"interior_rel_l2_k11\": "
                << format_full(interior_rel_l2(recon.k11, truth.k11))
                << ",\n  \"interior_rel_l2_k22\": "
                << format_full(interior_rel_l2(recon.k22, truth.k22));
    }
    summary << "\n}\n";

    std::cout << "invert: " << (result.converged ? "converged" : "NOT converged")
              << " after " << result.iterations
              << " iterations, ||F|| = " << format_full(result.res_norm)
              << "\n";
    return result.converged ? 0 : 3;
}

int run_check_jacobian(const RunConfig& cfg, const Setup& setup) {
    const PrincipalField field = load_field(cfg, setup.grid);
    const Eigen::VectorXd k = pack_unknowns(field);
    const std::vector<double> times = measurement_times(cfg);

    InverseProblem problem;
    problem.grid = setup.grid;
    problem.diff = setup.diff;
    problem.perm = setup.perm;
    problem.schedule = cfg.schedule;
    problem.bdata = setup.bdata;
    problem.source = setup.source;
    problem.U0 = setup.U0;
    problem.t_f = cfg.t_f;
    problem.steps = cfg.steps;

    const ForwardProblem fwd = problem.forward_for(k);
    const Trajectory traj = solve_forward(fwd);
    const StackedJacobian sens = full_jacobian(fwd, traj, times,
                                               cfg.lm.threads);
    const StackedJacobian fd = richardson_fd_jacobian(
        k, [&](const Eigen::VectorXd& kv) { return problem.forward_for(kv); },
        times, 2e-3);

    double max_rel = 0.0;
    for (int r = 0; r < sens.J.rows(); ++r)
        for (int c = 0; c < sens.J.cols(); ++c) {
            const double ref = std::abs(fd.J(r, c));
            if (ref <= 1e-10) continue;
            max_rel = std::max(max_rel,
                               std::abs(sens.J(r, c) - fd.J(r, c)) / ref);
        }

    std::ofstream report(cfg.output_dir + "/jacobian_check.txt",
                         std::ios::binary);
    report << "max_relative_discrepancy=" << format_full(max_rel) << "\n";
    std::cout << "check-jacobian: max relative discrepancy = "
              << format_full(max_rel) << "\n";
    return 0;
}

int run_mms(const RunConfig& cfg) {
    // built-in exact solution U = exp(-t) sin(pi x) sin(pi y)
    ManufacturedSolution exact;
    exact.U = [](double t, double x, double y) {
        return std::exp(-t) * std::sin(M_PI * x) * std::sin(M_PI * y);
    };
    exact.Ut = [u = exact.U](double t, double x, double y) {
        return -u(t, x, y);
    };
    exact.Ux = [](double t, double x, double y) {
        return M_PI * std::exp(-t) * std::cos(M_PI * x) * std::sin(M_PI * y);
    };
    exact.Uy = [](double t, double x, double y) {
        return M_PI * std::exp(-t) * std::sin(M_PI * x) * std::cos(M_PI * y);
    };
    exact.Uxx = [u = exact.U](double t, double x, double y) {
        return -M_PI * M_PI * u(t, x, y);
    };
    exact.Uyy = exact.Uxx;
    exact.Uxy = [](double t, double x, double y) {
        return M_PI * M_PI * std::exp(-t) * std::cos(M_PI * x) *
               std::cos(M_PI * y);
    };

    const Expression k11e =
        cfg.k11_expr ? *cfg.k11_expr : Expression::parse("1");
    const Expression k22e =
        cfg.k22_expr ? *cfg.k22_expr : Expression::parse("1");
    FieldModel fm;
    fm.k11 = [k11e](double x, double y) { return k11e.eval(0.0, x, y); };
    fm.k22 = [k22e](double x, double y) { return k22e.eval(0.0, x, y); };
    const double h = 1e-6;
    auto fd_x = [h](const std::function<double(double, double)>& f) {
        return [f, h](double x, double y) {
            return (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        };
    };
    auto fd_y = [h](const std::function<double(double, double)>& f) {
        return [f, h](double x, double y) {
            return (f(x, y + h) - f(x, y - h)) / (2.0 * h);
        };
    };
    fm.dk11_dx = fd_x(fm.k11);
    fm.dk11_dy = fd_y(fm.k11);
    fm.dk22_dx = fd_x(fm.k22);
    fm.dk22_dy = fd_y(fm.k22);

    auto solve_error = [&](int n, int steps) {
        const ChebGrid grid = gauss_lobatto_nodes(n);
        const ManufacturedData data =
            manufactured_data(exact, fm, cfg.schedule, grid);
        ForwardProblem problem;
        problem.assembler = std::make_shared<Assembler>(
            grid, diff_matrix(grid), grid_permutation(n), fm.sample(grid),
            cfg.schedule, data.bdata);
        problem.source = data.g;
        problem.U0 = data.U0;
        problem.t_f = cfg.t_f;
        problem.steps = steps;
        const Trajectory traj = solve_forward(problem);
        double err = 0.0;
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i)
                err = std::max(err, std::abs(traj.states.back()
                                                 [grid_index(i, j, n)] -
                                             exact.U(cfg.t_f, grid.nodes[i],
                                                     grid.nodes[j])));
        return err;
    };

    std::ofstream table(cfg.output_dir + "/mms_convergence.csv",
                        std::ios::binary);
    table << "# sweep,n,steps,max_error\n";
    std::cout << "mms-convergence (U = exp(-t) sin(pi x) sin(pi y)):\n";
    for (int n : {4, 6, 8, 12, 16}) {
        const double err = solve_error(n, cfg.steps);
        table << "spatial," << n << ',' << cfg.steps << ','
              << format_full(err) << '\n';
        std::cout << "  n=" << n << "  steps=" << cfg.steps << "  error="
                  << format_full(err) << "\n";
    }
    for (int mult : {1, 2, 4}) {
        const double err = solve_error(cfg.n, cfg.steps * mult);
        table << "temporal," << cfg.n << ',' << cfg.steps * mult << ','
              << format_full(err) << '\n';
        std::cout << "  n=" << cfg.n << "  steps=" << cfg.steps * mult
                  << "  error=" << format_full(err) << "\n";
    }
    return 0;
}

}  // namespace

int run(const RunConfig& cfg) {
    try {
        fs::create_directories(cfg.output_dir);
        const Setup setup = make_setup(cfg);
        switch (cfg.mode) {
            case RunMode::Forward: return run_forward(cfg, setup);
            case RunMode::Synth: return run_synth(cfg, setup);
            case RunMode::Invert: return run_invert(cfg, setup);
            case RunMode::CheckJacobian: return run_check_jacobian(cfg, setup);
            case RunMode::MmsConvergence: return run_mms(cfg);
        }
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "{\"error\":\"usage\",\"detail\":\"" << e.what()
                  << "\"}\n";
        return 1;
    } catch (const StepFailure& e) {
        std::cerr << "{\"error\":\"numerical\",\"step\":" << e.step_index
                  << ",\"detail\":\"" << e.what() << "\"}\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\":\"numerical\",\"detail\":\"" << e.what()
                  << "\"}\n";
        return 2;
    }
}

}  // namespace anisodiff
