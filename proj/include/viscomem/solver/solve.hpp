#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "viscomem/history/memory.hpp"
#include "viscomem/io/csv.hpp"
#include "viscomem/kernels/kernel.hpp"
#include "viscomem/solver/nonlinearity.hpp"
#include "viscomem/solver/spectrum.hpp"

namespace viscomem::solver {

/// Modal form of
///   u_tt + k_inf A u + \int_0^inf mu_t(s) A eta^t(s) ds + f(u) = g
/// (plus m A u_t when kv_m > 0, the Kelvin-Voigt path) on span{w_1..w_n}.
struct Problem {
    Spectrum spectrum;
    kernels::KernelPtr kernel = std::make_shared<kernels::ZeroKernel>();
    Nonlinearity nl;
    std::vector<double> g;  // modal forcing; empty means zero
    double k_inf = 1.0;
    double kv_m = 0.0;
    double tau = 0.0;
    double T = 1.0;
};

struct SolverOptions {
    double dt = 1e-3;
    std::size_t output_every = 1;
    std::size_t J = 256;
    double s_min = 1e-4;
    double tail_tol = 1e-10;
    double s_max = 0.0;  // 0: chosen from the kernel tail over [tau, T]
    bool ledger = true;
};

/// Lag grid for a run: J geometric nodes on [s_min, s_max], s_max from the
/// kernel tail unless given.
inline history::SGrid make_grid(const Problem& p, const SolverOptions& o) {
    double s_max = o.s_max;
    if (!(s_max > 0.0)) s_max = history::choose_s_max(*p.kernel, p.tau, p.T, o.tail_tol);
    s_max = std::max(s_max, 10.0 * o.s_min);
    return history::SGrid::geometric(o.J, o.s_min, s_max);
}

struct InitialState {
    std::vector<double> a, b;
    history::SGrid grid;
    std::vector<double> eta0;  // node-major, grid.size() x n
};

/// Projects (u_tau, v_tau, eta_tau) onto the first n modes. eta_tau(s, x) is
/// projected node by node on the lag grid; pass nullptr for a zero history.
inline InitialState project_initial_data(const Problem& p, const SolverOptions& o,
                                         const std::function<double(double)>& u,
                                         const std::function<double(double)>& v,
                                         const std::function<double(double, double)>& eta = nullptr) {
    InitialState z;
    z.grid = make_grid(p, o);
    const std::size_t n = p.spectrum.size();
    z.a = u ? p.spectrum.project(u) : std::vector<double>(n, 0.0);
    z.b = v ? p.spectrum.project(v) : std::vector<double>(n, 0.0);
    z.eta0.assign(z.grid.size() * n, 0.0);
    if (eta) {
        for (std::size_t j = 0; j < z.grid.size(); ++j) {
            const double s = z.grid.nodes[j];
            const auto c = p.spectrum.project([&](double x) { return eta(s, x); });
            std::copy(c.begin(), c.end(), z.eta0.begin() + static_cast<std::ptrdiff_t>(j * n));
        }
    }
    return z;
}

/// Initial state from modal data; eta(s) returns the modal vector of eta_tau(s).
inline InitialState modal_initial_data(const Problem& p, const SolverOptions& o, std::vector<double> a,
                                       std::vector<double> b,
                                       const std::function<std::vector<double>(double)>& eta = nullptr) {
    const std::size_t n = p.spectrum.size();
    if (a.size() != n || b.size() != n) throw ConfigError("initial data has the wrong number of modes");
    InitialState z;
    z.grid = make_grid(p, o);
    z.a = std::move(a);
    z.b = std::move(b);
    z.eta0.assign(z.grid.size() * n, 0.0);
    if (eta) {
        for (std::size_t j = 0; j < z.grid.size(); ++j) {
            const auto c = eta(z.grid.nodes[j]);
            if (c.size() != n) throw ConfigError("initial history has the wrong number of modes");
            std::copy(c.begin(), c.end(), z.eta0.begin() + static_cast<std::ptrdiff_t>(j * n));
        }
    }
    return z;
}

struct Energies {
    double E = 0.0;      // k_inf |u|_1^2 + |u_t|^2 + 2 <F(u), 1>
    double calE = 0.0;   // E + ||eta||^2_{M^0}
    double L = 0.0;      // k_inf |u|_1^2 + |u_t|^2 + 2 <f(u) - g, A u>
    double calL = 0.0;   // L + ||eta||^2_{M^1}
    double N[3] = {0.0, 0.0, 0.0};  // ||eta||^2 in M^{-1}, M^0, M^1
    double H2 = 0.0;     // ||z||^2_{H_t}   = |u|_1^2 + |u_t|^2 + N_0
    double Hm1_2 = 0.0;  // ||z||^2_{H^-1_t} = |u|^2 + |u_t|^2_{-1} + N_{-1}
};

/// Energy functionals of a modal state; sq[k] = \int mu |eta_k|^2 (empty: no memory).
inline Energies energy_functionals(const Spectrum& sp, const Nonlinearity& nl, const std::vector<double>& g,
                                   double k_inf, const std::vector<double>& a,
                                   const std::vector<double>& b, const std::vector<double>& sq) {
    const std::size_t n = sp.size();
    Energies e;
    double u1 = 0.0, u0 = 0.0, v0 = 0.0, vm1 = 0.0, fg = 0.0;
    std::vector<double> fk(n, 0.0);
    double Fint = 0.0;
    if (!nl.is_zero) {
        std::vector<double> u, fu;
        sp.synthesize(a, u);
        fu.resize(u.size());
        std::vector<double> Fu(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            fu[i] = nl.f(u[i]);
            Fu[i] = nl.F(u[i]);
        }
        sp.analyze(fu, fk);
        Fint = sp.integrate(Fu);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = sp.lambda(k);
        u1 += lam * a[k] * a[k];
        u0 += a[k] * a[k];
        v0 += b[k] * b[k];
        vm1 += b[k] * b[k] / lam;
        const double gk = g.empty() ? 0.0 : g[k];
        fg += lam * (fk[k] - gk) * a[k];
        if (!sq.empty()) {
            e.N[0] += sq[k];
            e.N[1] += lam * sq[k];
            e.N[2] += lam * lam * sq[k];
        }
    }
    e.E = k_inf * u1 + v0 + 2.0 * Fint;
    e.calE = e.E + e.N[1];
    e.L = k_inf * u1 + v0 + 2.0 * fg;
    e.calL = e.L + e.N[2];
    e.H2 = u1 + v0 + e.N[1];
    e.Hm1_2 = u0 + vm1 + e.N[0];
    return e;
}

struct LedgerRow {
    double t = 0.0;
    Energies e;
};

struct EnergyLedger {
    std::vector<LedgerRow> rows;

    std::vector<double> column(double Energies::*field) const {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r.e.*field);
        return v;
    }
    std::vector<double> times() const {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r.t);
        return v;
    }
};

struct RunRecord {
    Problem problem;
    history::HistorySnapshot hist;  // lag grid, eta_tau, trajectory of a
    std::vector<double> b;          // u_t at every step, step-major
    std::vector<std::size_t> outputs;
    EnergyLedger ledger;
    double s_cut = 0.0;

    std::size_t modes() const { return hist.modes(); }
    double dt() const { return hist.traj.dt(); }
    std::size_t steps() const { return hist.traj.count() - 1; }
    double time(std::size_t i) const { return hist.traj.time(i); }
    std::vector<double> a_at(std::size_t i) const {
        const double* p = hist.traj.at(i);
        return {p, p + modes()};
    }
    std::vector<double> b_at(std::size_t i) const {
        const double* p = b.data() + i * modes();
        return {p, p + modes()};
    }
};

/// Largest stable step of the explicit stepper, 2 / sqrt((k_inf + kappa) lambda_n):
/// on short time scales the memory term stiffens the top mode by kappa.
/// Modal acceleration at the last recorded time of h (a is u there, b is u_t):
///   a''_k = -k_inf lambda_k a_k - lambda_k c_k - f_k(u) + g_k - m lambda_k b_k.
/// h may be null for a memoryless problem.
inline std::vector<double> modal_rhs(const Problem& p, const history::HistorySnapshot* h, double s_cut,
                                     const std::vector<double>& a, const std::vector<double>& b) {
    const Spectrum& sp = p.spectrum;
    const std::size_t n = sp.size();
    if (a.size() != n || b.size() != n) throw ConfigError("state has the wrong number of modes");
    std::vector<double> acc(n), fk;
    if (!p.nl.is_zero) {
        std::vector<double> u;
        sp.synthesize(a, u);
        for (double& x : u) x = p.nl.f(x);
        sp.analyze(u, fk);
    }
    history::MemoryEval e;
    const bool memory = h && !dynamic_cast<const kernels::ZeroKernel*>(p.kernel.get());
    if (memory) {
        const double t = h->t_now();
        history::MemoryIntegrator(p.kernel, s_cut).evaluate(*h, t, a.data(), t, false, e);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = sp.lambda(k);
        double F = -p.k_inf * lam * a[k] - p.kv_m * lam * b[k];
        if (!p.nl.is_zero) F -= fk[k];
        if (!p.g.empty()) F += p.g[k];
        if (memory) F -= lam * e.c[k];
        acc[k] = F;
    }
    return acc;
}

inline double stability_limit(const Spectrum& sp, double k_inf, double kappa_max) {
    return 2.0 / std::sqrt((k_inf + kappa_max) * sp.lambda(sp.size() - 1));
}

/// One-step integrator (drift-kick-drift):
///   a_h = a + dt/2 b
///   F   = -k_inf lambda a_h - f(a_h) + g - lambda c(t + dt/2)
///   b  <- [b (1 - q) + dt F] / (1 + q),  q = dt m lambda / 2
///   a  <- a_h + dt/2 b
/// The memory force c is evaluated at the half step with the predicted head
/// a_h; the Kelvin-Voigt term m A u_t (if any) is Crank-Nicolson, which leaves
/// the scheme explicit because A is diagonal.
class Stepper {
public:
    Stepper(const Problem& p, double s_cut)
        : p_(p), mem_(p.kernel, s_cut), zero_memory_(dynamic_cast<const kernels::ZeroKernel*>(p.kernel.get())) {
        const std::size_t n = p.spectrum.size();
        if (!p.g.empty() && p.g.size() != n) throw ConfigError("forcing has the wrong number of modes");
        ah_.resize(n);
        F_.resize(n);
    }

    const history::MemoryIntegrator& integrator() const { return mem_; }

    void step(history::HistorySnapshot& h, std::vector<double>& a, std::vector<double>& b, std::size_t i) {
        const Spectrum& sp = p_.spectrum;
        const std::size_t n = sp.size();
        const double dt = h.traj.dt();
        const double t = h.traj.time(i);
        const double th = t + 0.5 * dt;
        for (std::size_t k = 0; k < n; ++k) ah_[k] = a[k] + 0.5 * dt * b[k];

        if (!zero_memory_) mem_.evaluate(h, th, ah_.data(), th, false, eval_);
        if (!p_.nl.is_zero) {
            sp.synthesize(ah_, u_);
            for (double& x : u_) x = p_.nl.f(x);
            sp.analyze(u_, fk_);
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double lam = sp.lambda(k);
            double F = -p_.k_inf * lam * ah_[k];
            if (!p_.nl.is_zero) F -= fk_[k];
            if (!p_.g.empty()) F += p_.g[k];
            if (!zero_memory_) F -= lam * eval_.c[k];
            const double q = 0.5 * dt * p_.kv_m * lam;
            b[k] = (b[k] * (1.0 - q) + dt * F) / (1.0 + q);
            a[k] = ah_[k] + 0.5 * dt * b[k];
        }
        for (std::size_t k = 0; k < n; ++k)
            if (!std::isfinite(a[k]) || !std::isfinite(b[k]) || std::abs(a[k]) > 1e150 || std::abs(b[k]) > 1e150)
                throw DivergenceError(t + dt);
        h.traj.push(a);
    }

private:
    const Problem& p_;
    history::MemoryIntegrator mem_;
    bool zero_memory_;
    history::MemoryEval eval_;
    std::vector<double> ah_, F_, u_, fk_;
};

inline std::size_t step_count(double tau, double T, double dt) {
    if (!(T > tau)) throw ConfigError("final time must exceed the initial time");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    const double x = (T - tau) / dt;
    const auto n = static_cast<std::size_t>(std::llround(x));
    if (n == 0 || std::abs(x - static_cast<double>(n)) > 1e-6 * std::max(1.0, x))
        throw ConfigError("(T - tau) must be a whole number of steps");
    return n;
}

/// Memory integrals at recorded step i.
inline history::MemoryEval memory_at(const RunRecord& r, const history::MemoryIntegrator& mi, std::size_t i,
                                     bool want_sq = true) {
    history::MemoryEval e;
    const double t = r.time(i);
    mi.evaluate(r.hist, t, nullptr, t, want_sq, e);
    return e;
}

inline Energies energies_at(const RunRecord& r, const history::MemoryIntegrator& mi, std::size_t i) {
    const Problem& p = r.problem;
    const history::MemoryEval e = memory_at(r, mi, i);
    return energy_functionals(p.spectrum, p.nl, p.g, p.k_inf, r.a_at(i), r.b_at(i), e.sq);
}

/// Integrates from tau to T and records every step; the ledger is filled at
/// steps that are multiples of output_every and at the last step.
inline RunRecord solve(const Problem& p, const InitialState& z0, const SolverOptions& o = {}) {
    const std::size_t n = p.spectrum.size();
    if (z0.a.size() != n || z0.b.size() != n) throw ConfigError("initial data has the wrong number of modes");
    if (z0.eta0.size() != z0.grid.size() * n) throw ConfigError("initial history does not match the lag grid");
    if (o.output_every == 0) throw ConfigError("output cadence must be positive");
    const std::size_t steps = step_count(p.tau, p.T, o.dt);

    RunRecord r;
    r.problem = p;
    r.hist.grid = z0.grid;
    r.hist.eta0 = z0.eta0;
    r.hist.traj = history::Trajectory(n, p.tau, o.dt);
    r.s_cut = z0.grid.s_max();
    r.b.reserve((steps + 1) * n);

    std::vector<double> a = z0.a, b = z0.b;
    r.hist.traj.push(a);
    r.b.insert(r.b.end(), b.begin(), b.end());

    Stepper st(r.problem, r.s_cut);
    auto record = [&](std::size_t i) {
        r.outputs.push_back(i);
        if (o.ledger) r.ledger.rows.push_back({r.time(i), energies_at(r, st.integrator(), i)});
    };
    record(0);
    for (std::size_t i = 0; i < steps; ++i) {
        st.step(r.hist, a, b, i);
        r.b.insert(r.b.end(), b.begin(), b.end());
        if ((i + 1) % o.output_every == 0 || i + 1 == steps) record(i + 1);
    }
    return r;
}

inline io::Table trajectory_table(const RunRecord& r) {
    io::Table t;
    const std::size_t n = r.modes();
    t.header.push_back("t");
    for (std::size_t k = 1; k <= n; ++k) t.header.push_back("a" + std::to_string(k));
    for (std::size_t k = 1; k <= n; ++k) t.header.push_back("b" + std::to_string(k));
    for (std::size_t i : r.outputs) {
        std::vector<double> row{r.time(i)};
        const auto a = r.a_at(i), b = r.b_at(i);
        row.insert(row.end(), a.begin(), a.end());
        row.insert(row.end(), b.begin(), b.end());
        t.add_numbers(row);
    }
    return t;
}

}  // namespace viscomem::solver
