#pragma once

// Experiment configuration: one JSON document merged over the defaults table
// below. Blocks that select a family by name (kernel, time scale, stiffness,
// nonlinearity, initial profiles, scenario) take their defaults from the entry
// of that family; keys that the table does not know are rejected, so a typo
// fails loudly with its full path instead of silently using a default.

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "viscomem/kernels/rescaled.hpp"
#include "viscomem/kernels/rheological.hpp"
#include "viscomem/kernels/validate.hpp"
#include "viscomem/solver/solve.hpp"

namespace viscomem::io {

using json = nlohmann::json;

/// Every default in one place. docs/config.md mirrors this table.
inline const json& defaults() {
    static const json table = json::parse(R"({
  "kernel": "rescaled",
  "kernels": {
    "zero": {},
    "rescaled": {"profile": "exponential", "scale": "constant"},
    "rheological": {"stiffness": "constant", "gamma": 1.0, "rho": 1.0, "K": 0.0}
  },
  "profiles": {"exponential": {}, "gamma-half": {}, "compact-quadratic": {}},
  "scales": {
    "constant": {"eps": 1.0},
    "exponential": {"eps0": 1.0, "rate": 1.0},
    "inverse-linear": {"eps0": 1.0, "rate": 1.0, "sharpness": 4.0},
    "linear": {"eps0": 1.0, "rate": 1.0}
  },
  "stiffnesses": {
    "constant": {"beta": 1.0},
    "tanh": {"beta": 1.0, "alpha": 2.0},
    "softplus": {"beta": 1.0, "t_max": 100.0}
  },
  "nonlinearity": "cubic",
  "nonlinearities": {
    "zero": {},
    "linear": {"c": 0.0},
    "cubic": {"a": 1.0, "b": -1.0}
  },
  "spectrum": {"n": 8, "collocation": 0, "lambda": []},
  "k_inf": 1.0,
  "kv_m": 0.0,
  "forcing": [],
  "time": {"tau": 0.0, "T": 1.0},
  "grids": {"dt": 1e-3, "output_every": 10, "J": 256, "s_min": 1e-4, "tail_tol": 1e-10, "s_max": 0.0},
  "initial": {"u": "zero", "v": "zero", "history": "zero"},
  "fields": {
    "zero": {},
    "modal": {"coeffs": []},
    "sine": {"mode": 1, "amplitude": 1.0},
    "parabola": {"amplitude": 1.0}
  },
  "histories": {
    "zero": {},
    "ramp": {"mode": 1, "amplitude": 0.2, "rate": 1.0}
  },
  "validate": {"t_min": -2.0, "t_max": 2.0, "nt": 21, "s_min": 1e-3, "s_max": 20.0, "ns": 200,
               "tol": 1e-9, "tail_tol": 1e-10},
  "checks": {"key_tol": 1e-6, "sigma": 0},
  "scenario": "none",
  "scenarios": {
    "none": {},
    "kv-limit": {"eps": [0.5, 0.25, 0.125, 0.0625], "profile": "exponential"},
    "continuous-dependence": {"deltas": [1e-2, 1e-3, 1e-4], "spread": 0.2},
    "delta-limit": {"nu": 0.5, "times": [10.0, 20.0, 40.0], "rel_tol": 1e-10},
    "stress": {"strain": "step", "t_start": 0.0, "t_stop": 5.0, "count": 51, "tol": 1e-6},
    "oracle": {"ref_dt": 0.0, "tol": 1e-4}
  },
  "strains": {
    "step": {"value": 0.2, "t0": 0.0},
    "constant": {"value": 0.2},
    "sine": {"amplitude": 1.0, "omega": 1.0}
  },
  "output": {"dir": "out", "prefix": "run"}
})");
    return table;
}

// ---------------------------------------------------------------------------
// Merging and typed access.

inline std::string join_path(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

[[noreturn]] inline void bad(const std::string& path, const std::string& what) {
    throw ConfigError("config key '" + path + "': " + what);
}

/// defaults patched by user, recursing into objects; user keys unknown to
/// the defaults and type changes are errors.
inline json merge_checked(const json& def, const json& user, const std::string& path) {
    if (user.is_null()) return def;
    if (!user.is_object()) bad(path, "expected an object");
    json out = def;
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string p = join_path(path, it.key());
        if (!def.contains(it.key())) bad(p, "unknown key");
        const json& d = def[it.key()];
        const json& u = it.value();
        if (d.is_object() && u.is_object()) {
            out[it.key()] = merge_checked(d, u, p);
        } else if (d.is_string() && u.is_object()) {
            out[it.key()] = u;  // a family selector given as {"type": ..., params}; resolved by typed_block
        } else if (d.is_number() != u.is_number() || d.is_string() != u.is_string() ||
                   d.is_array() != u.is_array() || d.is_boolean() != u.is_boolean() || d.is_object()) {
            bad(p, "expected " + std::string(d.type_name()) + ", got " + u.type_name());
        } else {
            out[it.key()] = u;
        }
    }
    return out;
}

/// A block selecting a family: either a bare name or {"type": name, ...}.
/// Returns the family's defaults patched by the block, with "type" set.
inline json typed_block(const json& user, const std::string& fallback, const json& registry,
                        const std::string& path) {
    std::string type = fallback;
    json rest = json::object();
    if (user.is_string()) {
        type = user.get<std::string>();
    } else if (user.is_object()) {
        rest = user;
        if (rest.contains("type")) {
            if (!rest["type"].is_string()) bad(join_path(path, "type"), "expected a string");
            type = rest["type"].get<std::string>();
            rest.erase("type");
        }
    } else if (!user.is_null()) {
        bad(path, "expected a family name or an object");
    }
    if (!registry.contains(type)) {
        std::string known;
        for (auto it = registry.begin(); it != registry.end(); ++it) known += (known.empty() ? "" : ", ") + it.key();
        bad(join_path(path, "type"), "unknown family '" + type + "' (known: " + known + ")");
    }
    json out = merge_checked(registry[type], rest, path);
    out["type"] = type;
    return out;
}

inline double num(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key) || !j[key].is_number()) bad(join_path(path, key), "expected a number");
    const double v = j[key].get<double>();
    if (!std::isfinite(v)) bad(join_path(path, key), "must be finite");
    return v;
}

inline double positive(const json& j, const std::string& key, const std::string& path) {
    const double v = num(j, key, path);
    if (!(v > 0.0)) bad(join_path(path, key), "must be positive");
    return v;
}

inline std::size_t count(const json& j, const std::string& key, const std::string& path, std::size_t min = 1) {
    const double v = num(j, key, path);
    if (v != std::floor(v) || v < static_cast<double>(min))
        bad(join_path(path, key), "must be an integer >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

inline std::vector<double> numbers(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key) || !j[key].is_array()) bad(join_path(path, key), "expected an array of numbers");
    std::vector<double> v;
    for (const auto& x : j[key]) {
        if (!x.is_number()) bad(join_path(path, key), "expected an array of numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

// ---------------------------------------------------------------------------
// Registries.

inline std::shared_ptr<const kernels::BaseProfile> make_profile(const std::string& name, const std::string& path) {
    if (name == "exponential") return std::make_shared<kernels::ExponentialProfile>();
    if (name == "gamma-half") return std::make_shared<kernels::GammaHalfProfile>();
    if (name == "compact-quadratic") return std::make_shared<kernels::CompactQuadraticProfile>();
    bad(path, "unknown profile '" + name + "'");
}

inline std::shared_ptr<const kernels::TimeScale> make_scale(const json& b, const std::string& path) {
    const std::string type = b["type"];
    if (type == "constant") return std::make_shared<kernels::ConstantScale>(positive(b, "eps", path));
    if (type == "exponential")
        return std::make_shared<kernels::ExponentialScale>(positive(b, "eps0", path), num(b, "rate", path));
    if (type == "inverse-linear")
        return std::make_shared<kernels::InverseLinearScale>(positive(b, "eps0", path), num(b, "rate", path),
                                                             positive(b, "sharpness", path));
    return std::make_shared<kernels::LinearScale>(positive(b, "eps0", path), num(b, "rate", path));
}

inline std::shared_ptr<const kernels::Stiffness> make_stiffness(const json& b, const std::string& path) {
    const std::string type = b["type"];
    const double beta = positive(b, "beta", path);
    if (type == "constant") return std::make_shared<kernels::ConstantStiffness>(beta);
    if (type == "tanh") {
        const double alpha = num(b, "alpha", path);
        if (alpha < 0.0) bad(join_path(path, "alpha"), "must be nonnegative");
        return std::make_shared<kernels::TanhStiffness>(beta, alpha);
    }
    return std::make_shared<kernels::SoftplusStiffness>(beta, -60.0, positive(b, "t_max", path));
}

inline kernels::KernelPtr make_kernel(const json& b) {
    const std::string type = b["type"];
    if (type == "zero") return std::make_shared<kernels::ZeroKernel>();
    if (type == "rescaled") {
        if (!b["profile"].is_string()) bad("kernel.profile", "expected a profile name");
        const json scale = typed_block(b["scale"], "constant", defaults()["scales"], "kernel.scale");
        return std::make_shared<kernels::RescaledKernel>(make_profile(b["profile"], "kernel.profile"),
                                                         make_scale(scale, "kernel.scale"));
    }
    const json st = typed_block(b["stiffness"], "constant", defaults()["stiffnesses"], "kernel.stiffness");
    const double K = num(b, "K", "kernel");
    if (K < 0.0) bad("kernel.K", "must be nonnegative");
    return std::make_shared<kernels::RheologicalKernel>(make_stiffness(st, "kernel.stiffness"),
                                                        positive(b, "gamma", "kernel"), positive(b, "rho", "kernel"),
                                                        K);
}

inline solver::Nonlinearity make_nonlinearity(const json& b) {
    const std::string type = b["type"];
    if (type == "zero") return solver::zero_nonlinearity();
    if (type == "linear") return solver::linear_nonlinearity(num(b, "c", "nonlinearity"));
    return solver::cubic_nonlinearity(num(b, "a", "nonlinearity"), num(b, "b", "nonlinearity"));
}

/// Modal coefficients of an initial field block.
inline std::vector<double> make_field(const json& b, const solver::Spectrum& sp, const std::string& path) {
    const std::string type = b["type"];
    const std::size_t n = sp.size();
    if (type == "zero") return std::vector<double>(n, 0.0);
    if (type == "modal") {
        auto c = numbers(b, "coeffs", path);
        if (c.size() > n) bad(join_path(path, "coeffs"), "more coefficients than modes");
        c.resize(n, 0.0);
        return c;
    }
    if (type == "sine") {
        const std::size_t m = count(b, "mode", path);
        std::vector<double> c(n, 0.0);
        if (m <= n) c[m - 1] = num(b, "amplitude", path);
        return c;
    }
    const double A = num(b, "amplitude", path);
    return sp.project([A](double x) { return A * x * (1.0 - x); });
}

inline std::function<std::vector<double>(double)> make_history(const json& b, std::size_t n,
                                                               const std::string& path) {
    const std::string type = b["type"];
    if (type == "zero") return nullptr;
    const std::size_t m = count(b, "mode", path);
    if (m > n) bad(join_path(path, "mode"), "exceeds the number of modes");
    const double A = num(b, "amplitude", path), r = positive(b, "rate", path);
    return [n, m, A, r](double s) {
        std::vector<double> e(n, 0.0);
        e[m - 1] = -A * std::expm1(-r * s);
        return e;
    };
}

// ---------------------------------------------------------------------------

struct ExperimentConfig {
    json doc;  // fully resolved, defaults included
    solver::Problem problem;
    solver::SolverOptions options;
    std::vector<double> a0, b0;
    std::function<std::vector<double>(double)> eta;
    std::vector<double> t_grid, s_grid;  // validator grids
    kernels::ValidateOptions validate;
    double key_tol = 1e-6;
    int sigma = 0;
    json scenario;
    std::string out_dir, prefix;
};

/// Resolves a parsed document against the defaults and builds every object.
inline ExperimentConfig build_config(const json& user) {
    if (!user.is_object()) throw ConfigError("config must be a JSON object");
    const json& D = defaults();
    for (auto it = user.begin(); it != user.end(); ++it) {
        static const char* families[] = {"kernels", "profiles", "scales", "stiffnesses", "nonlinearities",
                                         "fields", "histories", "scenarios", "strains"};
        for (const char* f : families)
            if (it.key() == f) bad(it.key(), "registry tables are not configurable");
        if (!D.contains(it.key())) bad(it.key(), "unknown key");
    }
    auto user_at = [&](const char* k) { return user.contains(k) ? user[k] : json(); };

    ExperimentConfig c;
    json doc;
    doc["kernel"] = typed_block(user_at("kernel"), D["kernel"], D["kernels"], "kernel");
    if (doc["kernel"]["type"] == "rescaled") {
        doc["kernel"]["scale"] = typed_block(doc["kernel"]["scale"], "constant", D["scales"], "kernel.scale");
        if (!D["profiles"].contains(doc["kernel"]["profile"].get<std::string>()))
            bad("kernel.profile", "unknown profile '" + doc["kernel"]["profile"].get<std::string>() + "'");
    } else if (doc["kernel"]["type"] == "rheological") {
        doc["kernel"]["stiffness"] =
            typed_block(doc["kernel"]["stiffness"], "constant", D["stiffnesses"], "kernel.stiffness");
    }
    doc["nonlinearity"] = typed_block(user_at("nonlinearity"), D["nonlinearity"], D["nonlinearities"], "nonlinearity");
    for (const char* k : {"spectrum", "time", "grids", "validate", "checks", "output"})
        doc[k] = merge_checked(D[k], user_at(k), k);
    for (const char* k : {"k_inf", "kv_m", "forcing"}) {
        doc[k] = D[k];
        if (user.contains(k)) {
            if (user[k].type() != D[k].type() && !(user[k].is_number() && D[k].is_number()))
                bad(k, std::string("expected ") + D[k].type_name());
            doc[k] = user[k];
        }
    }
    const json init = merge_checked(json{{"u", json()}, {"v", json()}, {"history", json()}},
                                    user_at("initial"), "initial");
    doc["initial"]["u"] = typed_block(init["u"], D["initial"]["u"], D["fields"], "initial.u");
    doc["initial"]["v"] = typed_block(init["v"], D["initial"]["v"], D["fields"], "initial.v");
    doc["initial"]["history"] =
        typed_block(init["history"], D["initial"]["history"], D["histories"], "initial.history");
    doc["scenario"] = typed_block(user_at("scenario"), D["scenario"], D["scenarios"], "scenario");
    if (doc["scenario"]["type"] == "stress")
        doc["scenario"]["strain"] = typed_block(doc["scenario"]["strain"], "step", D["strains"], "scenario.strain");
    c.doc = doc;

    // Spectrum.
    const json& sp = doc["spectrum"];
    const std::size_t n = count(sp, "n", "spectrum");
    const std::size_t N = static_cast<std::size_t>(num(sp, "collocation", "spectrum"));
    const auto lam = numbers(sp, "lambda", "spectrum");
    if (lam.empty()) {
        c.problem.spectrum = solver::Spectrum::dirichlet(n, N);
    } else {
        if (lam.size() != n) bad("spectrum.lambda", "must list exactly n eigenvalues");
        c.problem.spectrum = solver::Spectrum(lam, N ? N : 4 * n);
    }

    c.problem.kernel = make_kernel(doc["kernel"]);
    c.problem.nl = make_nonlinearity(doc["nonlinearity"]);
    solver::require_dissipative(c.problem.nl, c.problem.spectrum.lambda(0));
    c.problem.k_inf = positive(doc, "k_inf", "");
    c.problem.kv_m = num(doc, "kv_m", "");
    if (c.problem.kv_m < 0.0) bad("kv_m", "must be nonnegative");
    c.problem.g = numbers(doc, "forcing", "");
    if (!c.problem.g.empty()) {
        if (c.problem.g.size() > n) bad("forcing", "more coefficients than modes");
        c.problem.g.resize(n, 0.0);
    }
    c.problem.tau = num(doc["time"], "tau", "time");
    c.problem.T = num(doc["time"], "T", "time");
    if (!(c.problem.T > c.problem.tau)) bad("time.T", "must exceed time.tau");

    const json& g = doc["grids"];
    c.options.dt = positive(g, "dt", "grids");
    c.options.output_every = count(g, "output_every", "grids");
    c.options.J = count(g, "J", "grids", 2);
    c.options.s_min = positive(g, "s_min", "grids");
    c.options.tail_tol = positive(g, "tail_tol", "grids");
    c.options.s_max = num(g, "s_max", "grids");
    solver::step_count(c.problem.tau, c.problem.T, c.options.dt);

    c.a0 = make_field(doc["initial"]["u"], c.problem.spectrum, "initial.u");
    c.b0 = make_field(doc["initial"]["v"], c.problem.spectrum, "initial.v");
    c.eta = make_history(doc["initial"]["history"], n, "initial.history");

    const json& v = doc["validate"];
    c.t_grid = kernels::linspace(num(v, "t_min", "validate"), num(v, "t_max", "validate"), count(v, "nt", "validate"));
    c.s_grid = kernels::geomspace(positive(v, "s_min", "validate"), positive(v, "s_max", "validate"),
                                  count(v, "ns", "validate"));
    c.validate.tol = positive(v, "tol", "validate");
    c.validate.tail_tol = positive(v, "tail_tol", "validate");

    c.key_tol = positive(doc["checks"], "key_tol", "checks");
    const double sigma = num(doc["checks"], "sigma", "checks");
    if (sigma != -1.0 && sigma != 0.0 && sigma != 1.0) bad("checks.sigma", "must be -1, 0 or 1");
    c.sigma = static_cast<int>(sigma);

    c.scenario = doc["scenario"];
    if (!doc["output"]["dir"].is_string() || !doc["output"]["prefix"].is_string())
        bad("output", "dir and prefix must be strings");
    c.out_dir = doc["output"]["dir"];
    c.prefix = doc["output"]["prefix"];
    return c;
}

inline json parse_config_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ": " + e.what());
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return build_config(parse_config_text(ss.str(), path));
}

}  // namespace viscomem::io
