#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "anisodiff/config.hpp"
#include "anisodiff/io.hpp"

using namespace anisodiff;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("anisodiff_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_text(const fs::path& dir, const std::string& name,
                    const std::string& body) {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << body;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("expression evaluator on documented examples") {
    CHECK(Expression::parse("1+0.5*x*y").eval(0.0, 0.5, 0.5) ==
          doctest::Approx(1.125).epsilon(1e-15));
    CHECK(Expression::parse("sin(pi*x)*sin(pi*y)").eval(0.0, 0.5, 0.5) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(Expression::parse("exp(-t)").eval(2.0, 0.0, 0.0) ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
    CHECK(Expression::parse("2^3^2").eval(0, 0, 0) ==
          doctest::Approx(512.0).epsilon(1e-15));  // right associative
    CHECK(Expression::parse("-2^2").eval(0, 0, 0) ==
          doctest::Approx(-4.0).epsilon(1e-15));
    CHECK(Expression::parse("(1+2)*(3-4)/2").eval(0, 0, 0) ==
          doctest::Approx(-1.5).epsilon(1e-15));
    CHECK(Expression::parse("cos(0)").eval(0, 0, 0) == 1.0);
}

TEST_CASE("expression parse errors carry a position") {
    CHECK_THROWS_AS(Expression::parse("1+*2"), std::invalid_argument);
    CHECK_THROWS_AS(Expression::parse("sin(x"), std::invalid_argument);
    CHECK_THROWS_AS(Expression::parse("bogus(3)"), std::invalid_argument);
    CHECK_THROWS_AS(Expression::parse(""), std::invalid_argument);
    try {
        Expression::parse("1 + @");
        FAIL("expected parse failure");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("position") != std::string::npos);
    }
}

TEST_CASE("minimal config gets defaults") {
    const fs::path dir = scratch_dir("cfg_min");
    const fs::path p = write_text(dir, "run.json", R"({
        "mode": "forward",
        "n": 5,
        "t_f": 0.5,
        "steps": 10,
        "field": {"k11": "1", "k22": "2"}
    })");
    const RunConfig cfg = parse_config(p.string());
    CHECK(cfg.mode == RunMode::Forward);
    CHECK(cfg.n == 5);
    CHECK(cfg.lm.tau == 1.05);
    CHECK(cfg.lm.scaling == LMOptions::Scaling::Identity);
    CHECK(cfg.lm.max_iterations == 50);
    CHECK(cfg.noise_level == 0.0);
    CHECK(cfg.initial_expr.eval(0, 0.3, 0.4) == 0.0);
}

TEST_CASE("config validation errors name the offending field") {
    const fs::path dir = scratch_dir("cfg_bad");
    auto expect_error = [&](const std::string& body,
                            const std::string& needle) {
        const fs::path p = write_text(dir, "bad.json", body);
        try {
            parse_config(p.string());
            FAIL("expected config rejection for: ", needle);
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_error(R"({"mode": "fly"})", "mode");
    expect_error(R"({"mode": "forward", "t_f": -1})", "t_f");
    expect_error(R"({"mode": "invert", "n": 1})", "n");
    expect_error(
        R"({"mode": "forward", "field": {"k11": "1+", "k22": "1"}})",
        "field.k11");
    expect_error(
        R"({"mode": "forward", "t_f": 1, "measurement": {"times": [0.5, 0.2]}})",
        "times");
    expect_error(R"({"mode": "forward", "lm": {"tau": 0.9}})", "lm");
    CHECK_THROWS_AS(parse_config((dir / "missing.json").string()),
                    std::invalid_argument);
}

TEST_CASE("full-precision formatting round-trips doubles") {
    for (double v : {1.0 / 3.0, M_PI, 1e-300, -7.25, 0.1}) {
        const std::string s = format_full(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("snapshot files round-trip bit exactly") {
    const fs::path dir = scratch_dir("io_snap");
    Trajectory traj;
    traj.times.resize(3);
    traj.times << 0.0, 0.05, 0.1;
    traj.dt = 0.05;
    for (int s = 0; s < 3; ++s) {
        Eigen::VectorXd u(9);
        for (int r = 0; r < 9; ++r)
            u[r] = std::sin(0.7 * (s + 1) * (r + 1)) / 3.0;
        traj.states.push_back(u);
    }
    const fs::path p = dir / "snapshots.csv";
    write_snapshots(p.string(), {2, 0.1, 2}, traj);
    const auto [header, back] = read_snapshots(p.string());
    CHECK(header.n == 2);
    CHECK(header.t_f == 0.1);
    CHECK(header.steps == 2);
    REQUIRE(back.states.size() == 3);
    for (int s = 0; s < 3; ++s) {
        CHECK(back.times[s] == traj.times[s]);
        CHECK((back.states[s] - traj.states[s]).lpNorm<Eigen::Infinity>() ==
              0.0);
    }
    CHECK(slurp(p).find('\r') == std::string::npos);
    CHECK(slurp(p).find("ordering=block-j,x-within-block") !=
          std::string::npos);
}

TEST_CASE("measurement files preserve delta and data") {
    const fs::path dir = scratch_dir("io_meas");
    MeasurementSet set;
    set.times = {0.25, 0.5};
    set.delta = 0.0123456789012345678;
    for (int q = 0; q < 2; ++q) {
        Eigen::VectorXd u(4);
        u << 1.0 / 3.0, -2.0 / 7.0, 1e-17, 5.0;
        set.data.push_back(u * (q + 1));
    }
    const fs::path p = dir / "measurements.csv";
    write_measurements(p.string(), 1, set);
    int n = 0;
    const MeasurementSet back = read_measurements(p.string(), n);
    CHECK(n == 1);
    CHECK(back.delta == set.delta);
    REQUIRE(back.times.size() == 2);
    for (int q = 0; q < 2; ++q)
        CHECK((back.data[q] - set.data[q]).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("field files round-trip") {
    const fs::path dir = scratch_dir("io_field");
    const ChebGrid grid = gauss_lobatto_nodes(3);
    PrincipalField f;
    f.k11.resize(4, 4);
    f.k22.resize(4, 4);
    for (int j = 0; j <= 3; ++j)
        for (int i = 0; i <= 3; ++i) {
            f.k11(i, j) = 1.0 + grid.nodes[i] / 3.0;
            f.k22(i, j) = 2.0 - grid.nodes[j] / 7.0;
        }
    const fs::path p = dir / "fields.csv";
    write_field_file(p.string(), grid, f);
    const PrincipalField back = read_field_file(p.string());
    CHECK((back.k11 - f.k11).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.k22 - f.k22).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("synth then invert end to end through run()") {
    const fs::path dir = scratch_dir("run_e2e");

    const std::string common = R"json(
        "n": 3,
        "t_f": 0.25,
        "steps": 50,
        "initial": "1 + sin(pi*x)*sin(pi*y)",
    )json";
    const fs::path synth_cfg = write_text(dir, "synth.json", R"({
        "mode": "synth",)" + common + R"(
        "field": {"k11": "1+0.5*x*y", "k22": "1+0.25*x^2"},
        "measurement": {"times": [0.05, 0.1, 0.15, 0.2, 0.25]},
        "output_dir": ")" + (dir / "out").string() + R"("
    })");
    REQUIRE(run(parse_config(synth_cfg.string())) == 0);

    const fs::path invert_cfg = write_text(dir, "invert.json", R"({
        "mode": "invert",)" + common + R"(
        "measurement": {
            "times": [0.05, 0.1, 0.15, 0.2, 0.25],
            "file": ")" + (dir / "out" / "measurements.csv").string() + R"("
        },
        "truth": {"k11": "1+0.5*x*y", "k22": "1+0.25*x^2"},
        "output_dir": ")" + (dir / "out").string() + R"("
    })");
    REQUIRE(run(parse_config(invert_cfg.string())) == 0);

    nlohmann::json summary;
    std::ifstream in(dir / "out" / "summary.json");
    in >> summary;
    CHECK(summary["converged"].get<bool>());
    CHECK(summary["interior_rel_l2_k11"].get<double>() <= 1e-3);
    CHECK(summary["interior_rel_l2_k22"].get<double>() <= 1e-3);

    // reconstructed field file is readable and positive
    const PrincipalField rec =
        read_field_file((dir / "out" / "fields_out.csv").string());
    CHECK(rec.k11.minCoeff() > 0.0);
}

TEST_CASE("same-seed runs produce byte-identical outputs") {
    const fs::path dir = scratch_dir("run_repro");
    auto config_for = [&](const std::string& out) {
        return write_text(dir, "synth_" + out + ".json", R"({
            "mode": "synth",
            "n": 3,
            "t_f": 0.2,
            "steps": 20,
            "initial": "1 + x*y",
            "field": {"k11": "2", "k22": "1"},
            "measurement": {"times": [0.1, 0.2], "noise_level": 0.01,
                             "seed": 31415},
            "output_dir": ")" + (dir / out).string() + R"("
        })");
    };
    REQUIRE(run(parse_config(config_for("a").string())) == 0);
    REQUIRE(run(parse_config(config_for("b").string())) == 0);
    CHECK(slurp(dir / "a" / "measurements.csv") ==
          slurp(dir / "b" / "measurements.csv"));
    CHECK(slurp(dir / "a" / "snapshots.csv") ==
          slurp(dir / "b" / "snapshots.csv"));
    CHECK(!slurp(dir / "a" / "measurements.csv").empty());
}
