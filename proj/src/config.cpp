#include "anisodiff/config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace anisodiff {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument(path + ": " + what);
}

Expression parse_expr(const json& j, const std::string& field,
                      const std::string& path) {
    if (!j.is_string()) fail(path, "field \"" + field + "\" must be a string");
    try {
        return Expression::parse(j.get<std::string>());
    } catch (const std::exception& e) {
        fail(path, "field \"" + field + "\": " + e.what());
    }
}

ThetaSchedule parse_schedule(const json& j, double t_f,
                             const std::string& path) {
    if (!j.is_object()) fail(path, "\"theta\" must be an object");
    const std::string kind = j.value("kind", "constant");
    try {
        if (kind == "constant")
            return ThetaSchedule::constant(j.value("value", 0.0), t_f);
        if (kind == "linear")
            return ThetaSchedule::linear(j.at("rate").get<double>(), t_f);
        if (kind == "sinusoidal")
            return ThetaSchedule::sinusoidal(j.value("offset", 0.0),
                                             j.at("amplitude").get<double>(),
                                             j.at("omega").get<double>(), t_f);
        if (kind == "tabulated") {
            std::vector<std::pair<double, double>> knots;
            for (const auto& k : j.at("knots"))
                knots.emplace_back(k.at(0).get<double>(),
                                   k.at(1).get<double>());
            return ThetaSchedule::tabulated(std::move(knots), t_f);
        }
    } catch (const json::exception& e) {
        fail(path, std::string("\"theta\": ") + e.what());
    }
    fail(path, "\"theta.kind\" must be one of constant|linear|sinusoidal|"
               "tabulated, got \"" + kind + "\"");
}

}  // namespace

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open config file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        fail(path, std::string("malformed JSON: ") + e.what());
    }

    RunConfig cfg;
    const std::string mode = j.value("mode", "");
    if (mode == "forward") cfg.mode = RunMode::Forward;
    else if (mode == "synth") cfg.mode = RunMode::Synth;
    else if (mode == "invert") cfg.mode = RunMode::Invert;
    else if (mode == "check-jacobian") cfg.mode = RunMode::CheckJacobian;
    else if (mode == "mms-convergence") cfg.mode = RunMode::MmsConvergence;
    else fail(path, "\"mode\" must be one of forward|synth|invert|"
                    "check-jacobian|mms-convergence, got \"" + mode + "\"");

    cfg.n = j.value("n", 4);
    cfg.t_f = j.value("t_f", 1.0);
    cfg.steps = j.value("steps", 100);
    if (cfg.n < 1) fail(path, "\"n\" must be >= 1");
    if (cfg.mode == RunMode::Invert && cfg.n < 2)
        fail(path, "\"n\" must be >= 2 for invert (closures need interior "
                   "nodes)");
    if (!(cfg.t_f > 0.0)) fail(path, "\"t_f\" must be positive");
    if (cfg.steps < 1) fail(path, "\"steps\" must be >= 1");

    cfg.schedule = j.contains("theta")
                       ? parse_schedule(j["theta"], cfg.t_f, path)
                       : ThetaSchedule::constant(0.0, cfg.t_f);

    if (j.contains("field")) {
        const json& f = j["field"];
        if (f.contains("file")) {
            cfg.field_file = f["file"].get<std::string>();
        } else {
            if (!f.contains("k11") || !f.contains("k22"))
                fail(path, "\"field\" needs k11 and k22 expressions or a "
                           "file");
            cfg.k11_expr = parse_expr(f["k11"], "field.k11", path);
            cfg.k22_expr = parse_expr(f["k22"], "field.k22", path);
        }
    }

    if (j.contains("boundary")) {
        const json& b = j["boundary"];
        if (b.contains("f1")) cfg.f1 = parse_expr(b["f1"], "boundary.f1", path);
        if (b.contains("f2")) cfg.f2 = parse_expr(b["f2"], "boundary.f2", path);
        if (b.contains("f3")) cfg.f3 = parse_expr(b["f3"], "boundary.f3", path);
        if (b.contains("f4")) cfg.f4 = parse_expr(b["f4"], "boundary.f4", path);
    }
    if (j.contains("source"))
        cfg.source_expr = parse_expr(j["source"], "source", path);
    if (j.contains("initial"))
        cfg.initial_expr = parse_expr(j["initial"], "initial", path);

    if (j.contains("measurement")) {
        const json& m = j["measurement"];
        if (m.contains("times"))
            cfg.measurement_times = m["times"].get<std::vector<double>>();
        cfg.noise_level = m.value("noise_level", 0.0);
        cfg.seed = m.value("seed", std::uint64_t{0});
        if (m.contains("file"))
            cfg.measurements_file = m["file"].get<std::string>();
        if (cfg.noise_level < 0.0)
            fail(path, "\"measurement.noise_level\" must be >= 0");
        for (std::size_t q = 0; q < cfg.measurement_times.size(); ++q) {
            const double tq = cfg.measurement_times[q];
            if (tq < 0.0 || tq > cfg.t_f)
                fail(path, "\"measurement.times\" outside [0, t_f]");
            if (q > 0 && tq <= cfg.measurement_times[q - 1])
                fail(path, "\"measurement.times\" must be strictly "
                           "increasing");
        }
    }

    if (j.contains("truth")) {
        cfg.truth_k11 = parse_expr(j["truth"]["k11"], "truth.k11", path);
        cfg.truth_k22 = parse_expr(j["truth"]["k22"], "truth.k22", path);
    }

    if (j.contains("lm")) {
        const json& l = j["lm"];
        cfg.lm.tau = l.value("tau", 1.05);
        cfg.lm.max_iterations = l.value("max_iterations", 50);
        cfg.lm.mu_scale = l.value("mu_scale", 1.0);
        cfg.lm.step_tol = l.value("step_tol", 1e-12);
        cfg.lm.positivity_floor = l.value("positivity_floor", 1e-6);
        const std::string scaling = l.value("scaling", "identity");
        if (scaling == "identity")
            cfg.lm.scaling = LMOptions::Scaling::Identity;
        else if (scaling == "column-norm")
            cfg.lm.scaling = LMOptions::Scaling::ColumnNorm;
        else
            fail(path, "\"lm.scaling\" must be identity|column-norm");
        if (l.contains("initial_guess")) {
            const json& g = l["initial_guess"];
            if (g.is_number()) {
                cfg.guess_value = g.get<double>();
            } else {
                cfg.guess_k11 = parse_expr(g["k11"], "lm.initial_guess.k11",
                                           path);
                cfg.guess_k22 = parse_expr(g["k22"], "lm.initial_guess.k22",
                                           path);
            }
        }
        try {
            cfg.lm.validate();
        } catch (const std::exception& e) {
            fail(path, std::string("\"lm\": ") + e.what());
        }
    }

    cfg.output_dir = j.value("output_dir", ".");
    return cfg;
}

}  // namespace anisodiff
