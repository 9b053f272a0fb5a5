#pragma once

// Command-line front end. Every subcommand builds its tables in memory and
// hands them to one Collector, which writes them after the computation is
// done; exit codes are 0 pass, 1 scientific failure, 2 usage or config error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "viscomem/history/key_inequality.hpp"
#include "viscomem/io/config.hpp"
#include "viscomem/io/csv.hpp"
#include "viscomem/kernels/rheology.hpp"
#include "viscomem/oracles/oracles.hpp"
#include "viscomem/parallel.hpp"

namespace viscomem::cli {

using io::json;

enum Exit : int { kPass = 0, kFail = 1, kUsage = 2 };

struct Flags {
    std::string config;
    std::string out;
    unsigned jobs = 1;
    std::optional<double> tol;
};

class Collector {
public:
    Collector(std::string dir, std::string prefix) : dir_(std::move(dir)), prefix_(std::move(prefix)) {}

    void add(const std::string& name, io::Table t) { tables_.emplace_back(name, std::move(t)); }
    void add_text(const std::string& file, std::string text) { texts_.emplace_back(file, std::move(text)); }

    /// Writes everything; returns the paths in write order.
    std::vector<std::string> flush() {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw ConfigError("cannot create output directory '" + dir_ + "': " + ec.message());
        std::vector<std::string> paths;
        for (const auto& [name, t] : tables_) {
            const std::string p = path(prefix_ + "_" + name + ".csv");
            io::write(t, p);
            paths.push_back(p);
        }
        for (const auto& [file, text] : texts_) {
            const std::string p = path(prefix_ + "_" + file);
            std::ofstream os(p, std::ios::binary);
            os << text;
            if (!os) throw ConfigError("write to '" + p + "' failed");
            paths.push_back(p);
        }
        tables_.clear();
        texts_.clear();
        return paths;
    }

private:
    std::string path(const std::string& file) const { return (std::filesystem::path(dir_) / file).string(); }

    std::string dir_, prefix_;
    std::vector<std::pair<std::string, io::Table>> tables_;
    std::vector<std::pair<std::string, std::string>> texts_;
};

inline io::ExperimentConfig load(const Flags& f) {
    io::ExperimentConfig c = io::load_config(f.config);
    if (!f.out.empty()) c.out_dir = f.out;
    return c;
}

inline Collector collector_for(const io::ExperimentConfig& c) {
    Collector col(c.out_dir, c.prefix);
    col.add_text("config.json", c.doc.dump(2) + "\n");
    return col;
}

inline void print_paths(std::ostream& out, const std::vector<std::string>& paths) {
    for (const auto& p : paths) out << "wrote " << p << "\n";
}

// ---------------------------------------------------------------------------

inline int cmd_validate_kernel(const Flags& f, std::ostream& out) {
    io::ExperimentConfig c = load(f);
    if (f.tol) c.validate.tol = *f.tol;
    if (!(c.validate.tol > 0.0)) throw ConfigError("--tol must be positive");
    const auto rep = kernels::validate_assumptions(*c.problem.kernel, c.t_grid, c.s_grid, c.validate);
    Collector col = collector_for(c);
    col.add("kernel_report", kernels::report_table(rep));
    print_paths(out, col.flush());
    out << "kernel " << rep.kernel << "\n" << "grids: " << rep.grids << "\n";
    for (const auto& ck : rep.checks) {
        out << "  " << ck.assumption << ": " << (ck.pass ? "pass" : "FAIL") << "  margin "
            << io::format_double(ck.margin);
        if (!ck.pass) out << " at t = " << io::format_double(ck.t) << ", s = " << io::format_double(ck.s);
        if (!ck.note.empty()) out << " (" << ck.note << ")";
        out << "\n";
    }
    return rep.passed() ? kPass : kFail;
}

inline int cmd_solve(const Flags& f, std::ostream& out, std::ostream& err) {
    io::ExperimentConfig c = load(f);
    const double key_tol = f.tol ? *f.tol : c.key_tol;
    const auto z0 = solver::modal_initial_data(c.problem, c.options, c.a0, c.b0, c.eta);
    solver::RunRecord r;
    try {
        r = solver::solve(c.problem, z0, c.options);
    } catch (const DivergenceError& e) {
        err << "divergence: solution blew up at t = " << io::format_double(e.time()) << "\n";
        return kFail;
    }

    // Key-inequality residual R(tau, t) at each output and the worst pair.
    const history::MemoryIntegrator mi(c.problem.kernel, r.s_cut);
    const history::MemoryNormSpec spec{c.sigma, c.problem.spectrum.lambda()};
    const auto ks = history::key_series(mi, r.hist, r.b, spec);
    std::vector<double> t_out;
    for (std::size_t i : r.outputs) t_out.push_back(r.time(i));
    const double M = history::growth_sup(*c.problem.kernel, t_out);
    const auto scan = history::key_inequality_scan(ks, M, r.outputs);

    io::Table led;
    led.header = {"t", "E", "calE", "L", "calL", "memory_norm", "H2", "R_key"};
    for (std::size_t j = 0; j < r.outputs.size(); ++j) {
        const auto& e = r.ledger.rows[j].e;
        const std::size_t i = r.outputs[j];
        led.add_numbers({r.time(i), e.E, e.calE, e.L, e.calL, ks.N[i], e.H2,
                         history::key_inequality_residual(ks, M, 0, i)});
    }
    Collector col = collector_for(c);
    col.add("trajectory", solver::trajectory_table(r));
    col.add("ledger", led);
    print_paths(out, col.flush());

    out << "steps " << r.steps() << ", outputs " << r.outputs.size() << ", M = " << io::format_double(M) << "\n"
        << "key inequality: min R = " << io::format_double(scan.min_R) << " over " << scan.pairs
        << " pairs (worst at t = " << io::format_double(r.time(scan.a)) << ", "
        << io::format_double(r.time(scan.b)) << "), tolerance " << io::format_double(key_tol) << "\n";
    if (scan.min_R < -key_tol) {
        err << "key inequality violated\n";
        return kFail;
    }
    return kPass;
}

// Experiments ----------------------------------------------------------------

inline const kernels::RheologicalKernel& rheological(const io::ExperimentConfig& c, const std::string& scenario) {
    const auto* k = dynamic_cast<const kernels::RheologicalKernel*>(c.problem.kernel.get());
    if (!k) throw ConfigError("config key 'kernel': scenario '" + scenario + "' needs a rheological kernel");
    return *k;
}

inline io::Table ratio_table(const std::string& label, const std::vector<double>& x, const std::vector<double>& err) {
    io::Table t;
    t.header = {label, "error", "ratio"};
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double ratio = j ? err[j] / err[j - 1] : std::numeric_limits<double>::quiet_NaN();
        t.add_numbers({x[j], err[j], ratio});
    }
    return t;
}

inline int exp_kv_limit(const io::ExperimentConfig& c, const Flags& f, Collector& col, std::ostream& out) {
    const json& s = c.scenario;
    const auto eps = io::numbers(s, "eps", "scenario");
    if (eps.size() < 2) throw ConfigError("config key 'scenario.eps': need at least two scales");
    if (!s["profile"].is_string()) throw ConfigError("config key 'scenario.profile': expected a profile name");
    const auto profile = io::make_profile(s["profile"], "scenario.profile");
    std::vector<kernels::KernelPtr> fam;
    for (double e : eps) {
        if (!(e > 0.0)) throw ConfigError("config key 'scenario.eps': scales must be positive");
        fam.push_back(std::make_shared<kernels::RescaledKernel>(profile, std::make_shared<kernels::ConstantScale>(e)));
    }
    const auto rows = oracles::kv_limit_experiment(c.problem, fam, eps, c.a0, c.b0, c.options, f.jobs);
    std::vector<double> err;
    for (const auto& r : rows) err.push_back(r.error);
    io::Table t = ratio_table("eps", eps, err);
    t.header.push_back("m");
    for (auto& row : t.rows) row.push_back(io::format_double(rows.front().m));
    col.add("kv_limit", t);
    print_paths(out, col.flush());
    bool mono = true;
    for (std::size_t j = 0; j < rows.size(); ++j) {
        out << "  eps " << io::format_double(eps[j]) << "  error " << io::format_double(err[j]) << "\n";
        if (j && !(err[j] < err[j - 1])) mono = false;
    }
    out << "kv-limit errors " << (mono ? "strictly decrease" : "do NOT strictly decrease") << "\n";
    return mono ? kPass : kFail;
}

inline int exp_continuous_dependence(const io::ExperimentConfig& c, const Flags& f, Collector& col,
                                     std::ostream& out) {
    const json& s = c.scenario;
    const auto deltas = io::numbers(s, "deltas", "scenario");
    if (deltas.empty()) throw ConfigError("config key 'scenario.deltas': need at least one perturbation");
    for (double d : deltas)
        if (d == 0.0) throw ConfigError("config key 'scenario.deltas': perturbation delta must be nonzero");
    const double spread = io::positive(s, "spread", "scenario");
    const auto rows = oracles::continuous_dependence_experiment(c.problem, c.a0, c.b0, c.eta, deltas, c.options,
                                                                f.jobs);
    io::Table t;
    t.header = {"delta", "error", "ratio", "ratio_Hm1", "lambda_rate", "lambda_slack"};
    double lo = rows.front().sup_ratio_H, hi = lo;
    bool fits = true;
    for (const auto& r : rows) {
        t.add_numbers({r.delta, r.sup_ratio_H * std::abs(r.delta), r.sup_ratio_H, r.sup_ratio_Hm1, r.lambda_fit.C,
                       r.lambda_fit.worst_slack});
        lo = std::min(lo, r.sup_ratio_H);
        hi = std::max(hi, r.sup_ratio_H);
        fits = fits && r.lambda_fit.ok && std::isfinite(r.sup_ratio_H);
    }
    col.add("continuous_dependence", t);
    print_paths(out, col.flush());
    const bool stable = hi <= (1.0 + spread) * lo;
    out << "sup ratio in [" << io::format_double(lo) << ", " << io::format_double(hi) << "], "
        << (stable ? "within" : "OUTSIDE") << " the " << io::format_double(spread) << " spread; envelope fits "
        << (fits ? "hold" : "FAIL") << "\n";
    return stable && fits ? kPass : kFail;
}

inline int exp_delta_limit(const io::ExperimentConfig& c, const Flags& f, Collector& col, std::ostream& out) {
    const auto& k = rheological(c, "delta-limit");
    const json& s = c.scenario;
    const double nu = io::num(s, "nu", "scenario");
    if (nu < 0.0) throw ConfigError("config key 'scenario.nu': must be nonnegative");
    const auto times = io::numbers(s, "times", "scenario");
    for (double t : times)
        if (t < nu) throw ConfigError("config key 'scenario.times': every time must be at least nu");
    const double rel = io::positive(s, "rel_tol", "scenario");
    const auto rows = parallel_map<kernels::DeltaLimit>(
        times.size(), f.jobs, [&](std::size_t j) { return kernels::delta_limit_diagnostics(k, nu, times[j], rel); });
    io::Table t;
    t.header = {"t", "nu", "I1", "log_I1", "I2", "Q", "log_Q"};
    for (const auto& d : rows) t.add_numbers({d.t, d.nu, d.I1, d.log_I1, d.I2, d.Q, d.log_Q});
    col.add("delta_limit", t);
    print_paths(out, col.flush());
    for (const auto& d : rows)
        out << "  t " << io::format_double(d.t) << "  log I1 " << io::format_double(d.log_I1) << "  I2 "
            << io::format_double(d.I2) << "\n";
    out << "gamma/rho = " << io::format_double(k.gamma() / k.rho()) << "\n";
    return kPass;
}

inline kernels::StrainHistory make_strain(const json& b) {
    const std::string type = b["type"];
    if (type == "step") {
        const double v = io::num(b, "value", "scenario.strain");
        return kernels::StrainHistory([v](double) { return v; }, [](double) { return 0.0; },
                                      io::num(b, "t0", "scenario.strain"));
    }
    if (type == "constant") {
        const double v = io::num(b, "value", "scenario.strain");
        return kernels::StrainHistory([v](double) { return v; }, [](double) { return 0.0; });
    }
    const double A = io::num(b, "amplitude", "scenario.strain"), w = io::num(b, "omega", "scenario.strain");
    return kernels::StrainHistory([A, w](double t) { return A * std::sin(w * t); },
                                  [A, w](double t) { return A * w * std::cos(w * t); });
}

inline int exp_stress(const io::ExperimentConfig& c, const Flags& f, Collector& col, std::ostream& out) {
    const auto& k = rheological(c, "stress");
    const json& s = c.scenario;
    const auto strain = make_strain(s["strain"]);
    const double tol = f.tol ? *f.tol : io::positive(s, "tol", "scenario");
    const auto times = kernels::linspace(io::num(s, "t_start", "scenario"), io::num(s, "t_stop", "scenario"),
                                         io::count(s, "count", "scenario"));
    const auto parts = parallel_map<kernels::StressResponse>(
        times.size(), f.jobs, [&](std::size_t j) { return kernels::stress_response(k, strain, {times[j]}); });
    io::Table t;
    t.header = {"t", "sigma1", "sigma2", "diff"};
    double worst = 0.0, scale = 0.0;
    for (const auto& p : parts) {
        const double d = p.sigma1[0] - p.sigma2[0];
        t.add_numbers({p.t[0], p.sigma1[0], p.sigma2[0], d});
        worst = std::max(worst, std::abs(d));
        scale = std::max({scale, std::abs(p.sigma1[0]), std::abs(p.sigma2[0])});
    }
    col.add("stress", t);
    print_paths(out, col.flush());
    const bool ok = worst <= tol * scale;
    out << "max |sigma1 - sigma2| = " << io::format_double(worst) << ", max |sigma| = " << io::format_double(scale)
        << (ok ? ", forms agree" : ", forms DISAGREE") << "\n";
    return ok ? kPass : kFail;
}

inline int exp_oracle(const io::ExperimentConfig& c, const Flags& f, Collector& col, std::ostream& out) {
    try {
        oracles::exponential_scale(*c.problem.kernel);
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("config key 'kernel': scenario 'oracle' is incompatible: ") + e.what());
    }
    const json& s = c.scenario;
    double ref_dt = io::num(s, "ref_dt", "scenario");
    if (ref_dt <= 0.0) ref_dt = c.options.dt / 4.0;
    const double tol = f.tol ? *f.tol : io::positive(s, "tol", "scenario");
    solver::SolverOptions o = c.options;
    o.ledger = false;
    const auto z0 = solver::modal_initial_data(c.problem, o, c.a0, c.b0, c.eta);
    const auto run = solver::solve(c.problem, z0, o);
    const auto ref = oracles::exp_kernel_oracle(c.problem, c.a0, c.b0, c.eta, ref_dt);
    const auto stride = static_cast<std::size_t>(std::llround(c.options.dt / ref_dt));
    if (std::abs(c.options.dt / ref_dt - static_cast<double>(stride)) > 1e-9 * static_cast<double>(stride))
        throw ConfigError("config key 'scenario.ref_dt': must divide grids.dt");
    const std::size_t n = run.modes();
    io::Table t;
    t.header = {"t", "a1", "a1_oracle", "error"};
    for (std::size_t i : run.outputs) {
        const std::size_t j = i * stride;
        double gap = 0.0;
        const auto a = run.a_at(i);
        for (std::size_t k = 0; k < n; ++k) gap = std::max(gap, std::abs(a[k] - ref.a[j * n + k]));
        t.add_numbers({run.time(i), a[0], ref.a[j * n], gap});
    }
    const double gap = oracles::trajectory_gap(run, ref);
    col.add("oracle", t);
    print_paths(out, col.flush());
    out << "max gap to the oracle " << io::format_double(gap) << " (tolerance " << io::format_double(tol) << ")\n";
    return gap <= tol ? kPass : kFail;
}

inline int cmd_experiment(const Flags& f, std::ostream& out) {
    io::ExperimentConfig c = load(f);
    if (f.jobs == 0) throw ConfigError("--jobs must be at least 1");
    Collector col = collector_for(c);
    const std::string type = c.scenario["type"];
    if (type == "kv-limit") return exp_kv_limit(c, f, col, out);
    if (type == "continuous-dependence") return exp_continuous_dependence(c, f, col, out);
    if (type == "delta-limit") return exp_delta_limit(c, f, col, out);
    if (type == "stress") return exp_stress(c, f, col, out);
    if (type == "oracle") return exp_oracle(c, f, col, out);
    throw ConfigError("config key 'scenario': no experiment selected");
}

/// Re-parses every CSV in the output directory and summarizes it. Exit 2 when
/// a file does not parse, 1 when a kernel report holds a failed verdict.
inline int cmd_report(const Flags& f, std::ostream& out, std::ostream& err) {
    std::string dir = f.out;
    if (dir.empty() && !f.config.empty()) dir = io::load_config(f.config).out_dir;
    if (dir.empty()) throw ConfigError("report needs --out DIR or --config PATH");
    if (!std::filesystem::is_directory(dir)) throw ConfigError("no output directory '" + dir + "'");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    int code = kPass;
    for (const auto& p : files) {
        io::Table t;
        try {
            t = io::read(p.string());
            for (std::size_t c = 0; c < t.header.size(); ++c)
                if (t.header[c] != "assumption" && t.header[c] != "verdict")
                    for (const auto& row : t.rows)
                        if (!row[c].empty()) io::parse_double(row[c]);
        } catch (const std::exception& e) {
            err << p.filename().string() << ": does not parse: " << e.what() << "\n";
            code = kUsage;
            continue;
        }
        out << p.filename().string() << ": " << t.rows.size() << " rows x " << t.header.size() << " columns";
        const auto has = [&](const char* name) {
            return std::find(t.header.begin(), t.header.end(), name) != t.header.end();
        };
        if (has("verdict")) {
            const std::size_t c = t.column("verdict");
            std::size_t fails = 0;
            for (const auto& row : t.rows) fails += row[c] == "fail";
            out << ", " << fails << " failed assumption(s)";
            if (fails && code == kPass) code = kFail;
        }
        if (has("R_key")) {
            const auto R = t.numbers("R_key");
            out << ", min R_key " << io::format_double(*std::min_element(R.begin(), R.end()));
        }
        if (has("error") && t.rows.size() > 0) {
            const auto e = t.numbers("error");
            out << ", max error " << io::format_double(*std::max_element(e.begin(), e.end()));
        }
        out << "\n";
    }
    if (files.empty()) out << "no CSV files in " << dir << "\n";
    return code;
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Numerical lab for viscoelastic waves with time-dependent memory", "viscomem"};
    app.require_subcommand(1);
    Flags f;
    double tol = 0.0;
    auto add_flags = [&](CLI::App* sub, bool need_config) {
        auto* c = sub->add_option("--config", f.config, "experiment config (JSON)");
        if (need_config) c->required();
        sub->add_option("--out", f.out, "output directory (overrides output.dir)");
        sub->add_option("--jobs", f.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
        sub->add_option("--tol", tol, "tolerance override for the command's check");
    };
    auto* v = app.add_subcommand("validate-kernel", "check the kernel assumptions on the configured grid");
    auto* s = app.add_subcommand("solve", "run the solver; write trajectory and ledger CSVs");
    auto* e = app.add_subcommand("experiment", "run the configured scenario");
    auto* r = app.add_subcommand("report", "re-parse and summarize the CSVs in an output directory");
    add_flags(v, true);
    add_flags(s, true);
    add_flags(e, true);
    add_flags(r, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        return app.exit(ex, out, err) == 0 ? kPass : kUsage;
    }
    for (auto* sub : {v, s, e, r})
        if (sub->parsed() && sub->count("--tol")) f.tol = tol;

    try {
        if (v->parsed()) return cmd_validate_kernel(f, out);
        if (s->parsed()) return cmd_solve(f, out, err);
        if (e->parsed()) return cmd_experiment(f, out);
        return cmd_report(f, out, err);
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << "\n";
        return kUsage;
    } catch (const DivergenceError& ex) {
        err << "divergence: solution blew up at t = " << io::format_double(ex.time()) << "\n";
        return kFail;
    } catch (const ArgumentError& ex) {
        err << "config error: " << ex.what() << "\n";
        return kUsage;
    } catch (const DomainError& ex) {
        err << "config error: " << ex.what() << "\n";
        return kUsage;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kFail;
    }
}

}  // namespace viscomem::cli
