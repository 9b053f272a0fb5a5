#pragma once

// Reference computations the memory solver is checked against.
//
// Constant exponential kernel mu(s) = eps^{-2} e^{-s/eps}. Put
// zeta(t) = \int_0^inf mu(s) eta^t(s) ds. History transport gives
// d/dt eta^t = -d/ds eta^t + u_t(t), so integrating by parts
//   zeta' = -\int mu eta_s ds + kappa u_t = [-mu eta]_0^inf + \int mu' eta ds + kappa u_t
//         = -zeta / eps + kappa u_t,        kappa = 1/eps,
// because eta^t(0) = 0 and mu' = -mu/eps. Per mode this closes the system
//   a' = b,  b' = -k_inf lambda a - lambda zeta - f_k(a) + g,  zeta' = -zeta/eps + b / eps,
// integrated here with classical RK4. The reduction needs eta_tau(0) = 0.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "viscomem/history/memory.hpp"
#include "viscomem/kernels/operations.hpp"
#include "viscomem/kernels/rescaled.hpp"
#include "viscomem/parallel.hpp"
#include "viscomem/solver/diagnostics.hpp"
#include "viscomem/solver/solve.hpp"

namespace viscomem::oracles {

using solver::Problem;
using solver::RunRecord;
using solver::SolverOptions;

/// Kelvin-Voigt run u_tt + k_inf A u + m A u_t + f(u) = g with the same
/// stepper as the memory solver (memory switched off).
inline RunRecord kv_solve(Problem p, double m, const std::vector<double>& a0, const std::vector<double>& b0,
                          const SolverOptions& o = {}) {
    if (m < 0.0) throw ArgumentError("Kelvin-Voigt mass must be nonnegative");
    p.kernel = std::make_shared<kernels::ZeroKernel>();
    p.kv_m = m;
    const auto z = solver::modal_initial_data(p, o, a0, b0);
    return solver::solve(p, z, o);
}

struct OracleRecord {
    double tau = 0.0, dt = 0.0;
    std::size_t n = 0;
    std::vector<double> a, b, zeta;  // step-major
    std::size_t count() const { return n ? a.size() / n : 0; }
    double time(std::size_t i) const { return tau + static_cast<double>(i) * dt; }
};

/// eps of a constant rescaled-exponential kernel; anything else cannot use
/// the reduction.
inline double exponential_scale(const kernels::MemoryKernel& k) {
    const auto* rk = dynamic_cast<const kernels::RescaledKernel*>(&k);
    if (!rk || !dynamic_cast<const kernels::ExponentialProfile*>(&rk->base()))
        throw ArgumentError("the zeta reduction needs a rescaled exponential kernel");
    if (!k.time_independent()) throw ArgumentError("the zeta reduction is invalid for time-dependent kernels");
    return rk->scale().eps(0.0);
}

/// zeta_k(tau) = \int mu eta_tau,k by adaptive quadrature of the given profile.
inline std::vector<double> initial_zeta(double eps, std::size_t n,
                                        const std::function<std::vector<double>(double)>& eta) {
    std::vector<double> z(n, 0.0);
    if (!eta) return z;
    quad::Options opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-15;
    for (std::size_t k = 0; k < n; ++k)
        z[k] = quad::integral([&](double s) { return std::exp(-s / eps) / (eps * eps) * eta(s)[k]; }, 0.0,
                              std::numeric_limits<double>::infinity(), opt);
    return z;
}

inline OracleRecord exp_kernel_oracle(const Problem& p, const std::vector<double>& a0, const std::vector<double>& b0,
                                      const std::function<std::vector<double>(double)>& eta, double dt) {
    const double eps = exponential_scale(*p.kernel);
    const solver::Spectrum& sp = p.spectrum;
    const std::size_t n = sp.size();
    const std::size_t steps = solver::step_count(p.tau, p.T, dt);
    const double kappa = 1.0 / eps;

    OracleRecord r;
    r.tau = p.tau;
    r.dt = dt;
    r.n = n;
    std::vector<double> y(3 * n);
    std::copy(a0.begin(), a0.end(), y.begin());
    std::copy(b0.begin(), b0.end(), y.begin() + static_cast<std::ptrdiff_t>(n));
    const auto z0 = initial_zeta(eps, n, eta);
    std::copy(z0.begin(), z0.end(), y.begin() + static_cast<std::ptrdiff_t>(2 * n));

    std::vector<double> u, fk(n, 0.0), av(n);
    auto rhs = [&](const std::vector<double>& s, std::vector<double>& d) {
        std::copy(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n), av.begin());
        if (!p.nl.is_zero) {
            sp.synthesize(av, u);
            for (double& x : u) x = p.nl.f(x);
            sp.analyze(u, fk);
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double lam = sp.lambda(k);
            const double a = s[k], b = s[n + k], z = s[2 * n + k];
            d[k] = b;
            d[n + k] = -p.k_inf * lam * a - lam * z - fk[k] + (p.g.empty() ? 0.0 : p.g[k]) - p.kv_m * lam * b;
            d[2 * n + k] = -z / eps + kappa * b;
        }
    };
    auto store = [&] {
        r.a.insert(r.a.end(), y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
        r.b.insert(r.b.end(), y.begin() + static_cast<std::ptrdiff_t>(n), y.begin() + static_cast<std::ptrdiff_t>(2 * n));
        r.zeta.insert(r.zeta.end(), y.begin() + static_cast<std::ptrdiff_t>(2 * n), y.end());
    };
    store();
    std::vector<double> k1(3 * n), k2(3 * n), k3(3 * n), k4(3 * n), tmp(3 * n);
    for (std::size_t i = 0; i < steps; ++i) {
        rhs(y, k1);
        for (std::size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + 0.5 * dt * k1[j];
        rhs(tmp, k2);
        for (std::size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + 0.5 * dt * k2[j];
        rhs(tmp, k3);
        for (std::size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + dt * k3[j];
        rhs(tmp, k4);
        for (std::size_t j = 0; j < y.size(); ++j) y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        for (double v : y)
            if (!std::isfinite(v)) throw DivergenceError(r.time(i + 1));
        store();
    }
    return r;
}

/// max over common times and modes of |a_run - a_ref|; ref may be finer by an
/// integer factor.
inline double trajectory_gap(const RunRecord& run, const std::vector<double>& ref_a, double ref_dt,
                             std::size_t n) {
    const double ratio = run.dt() / ref_dt;
    const auto stride = static_cast<std::size_t>(std::llround(ratio));
    if (stride == 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio)
        throw ArgumentError("reference step must divide the run step");
    double gap = 0.0;
    for (std::size_t i = 0; i <= run.steps(); ++i) {
        const std::size_t j = i * stride;
        if ((j + 1) * n > ref_a.size()) break;
        const double* a = run.hist.traj.at(i);
        for (std::size_t k = 0; k < n; ++k) gap = std::max(gap, std::abs(a[k] - ref_a[j * n + k]));
    }
    return gap;
}

inline double trajectory_gap(const RunRecord& run, const OracleRecord& ref) {
    return trajectory_gap(run, ref.a, ref.dt, ref.n);
}

inline double trajectory_gap(const RunRecord& run, const RunRecord& ref) {
    std::vector<double> a;
    for (std::size_t i = 0; i <= ref.steps(); ++i) {
        const double* p = ref.hist.traj.at(i);
        a.insert(a.end(), p, p + ref.modes());
    }
    return trajectory_gap(run, a, ref.dt(), ref.modes());
}

struct KVRow {
    double eps = 0.0;
    double m = 0.0;
    double error = 0.0;
};

/// Memory runs for a family of kernels sharing one Kelvin-Voigt mass, each
/// compared with the Kelvin-Voigt run of that mass. The history starts at
/// zero. label(k) supplies the sweep value reported per kernel.
inline std::vector<KVRow> kv_limit_experiment(const Problem& base, const std::vector<kernels::KernelPtr>& family,
                                              const std::vector<double>& labels, const std::vector<double>& a0,
                                              const std::vector<double>& b0, const SolverOptions& o = {},
                                              unsigned jobs = 1) {
    if (family.empty() || family.size() != labels.size()) throw ArgumentError("kv sweep needs one label per kernel");
    std::vector<double> masses;
    for (const auto& k : family) masses.push_back(kernels::kv_mass(*k, base.tau));
    for (double m : masses)
        if (std::abs(m - masses.front()) > 1e-8 * std::max(1.0, std::abs(masses.front())))
            throw ArgumentError("kernels in a Kelvin-Voigt sweep must share one mass");
    const double m = masses.front();
    SolverOptions oo = o;
    oo.ledger = false;
    const RunRecord kv = kv_solve(base, m, a0, b0, oo);
    return parallel_map<KVRow>(family.size(), jobs, [&](std::size_t j) {
        Problem p = base;
        p.kernel = family[j];
        p.kv_m = 0.0;
        const auto z = solver::modal_initial_data(p, oo, a0, b0);
        const RunRecord run = solver::solve(p, z, oo);
        return KVRow{labels[j], m, trajectory_gap(run, kv)};
    });
}

/// Norms of the difference of two runs at recorded step i. The difference
/// history is rebuilt from the difference trajectory (eta is linear in u).
struct DiffNorms {
    double H = 0.0;       // ||z1 - z2||_{H_t}
    double Hm1 = 0.0;     // ||z1 - z2||_{H_t^{-1}}
    double Lambda = 0.0;  // |u1 - u2|^2 + |u1_t - u2_t|^2_{-1}
};

inline std::vector<DiffNorms> difference_norms(const RunRecord& r1, const RunRecord& r2) {
    const std::size_t n = r1.modes();
    if (r2.modes() != n || r2.steps() != r1.steps() || r1.dt() != r2.dt())
        throw ArgumentError("runs differ in shape");
    history::HistorySnapshot d;
    d.grid = r1.hist.grid;
    d.eta0.resize(r1.hist.eta0.size());
    for (std::size_t j = 0; j < d.eta0.size(); ++j) d.eta0[j] = r1.hist.eta0[j] - r2.hist.eta0[j];
    d.traj = history::Trajectory(n, r1.hist.tau(), r1.dt());
    std::vector<double> da(n), db(n);
    for (std::size_t i = 0; i <= r1.steps(); ++i) {
        const double *p1 = r1.hist.traj.at(i), *p2 = r2.hist.traj.at(i);
        for (std::size_t k = 0; k < n; ++k) da[k] = p1[k] - p2[k];
        d.traj.push(da);
    }
    const history::MemoryIntegrator mi(r1.problem.kernel, r1.s_cut);
    const auto& sp = r1.problem.spectrum;
    std::vector<DiffNorms> out;
    history::MemoryEval e;
    for (std::size_t i : r1.outputs) {
        const double t = r1.time(i);
        mi.evaluate(d, t, nullptr, t, true, e);
        const double* pa = d.traj.at(i);
        DiffNorms dn;
        double H2 = 0.0, Hm = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double lam = sp.lambda(k);
            const double dbk = r1.b[i * n + k] - r2.b[i * n + k];
            H2 += lam * pa[k] * pa[k] + dbk * dbk + lam * e.sq[k];
            Hm += pa[k] * pa[k] + dbk * dbk / lam + e.sq[k] / lam;
            dn.Lambda += pa[k] * pa[k] + dbk * dbk / lam;
        }
        dn.H = std::sqrt(H2);
        dn.Hm1 = std::sqrt(Hm);
        out.push_back(dn);
    }
    return out;
}

struct DependenceRow {
    double delta = 0.0;
    double sup_ratio_H = 0.0;
    double sup_ratio_Hm1 = 0.0;
    solver::ExponentialFit lambda_fit;
};

/// Perturbs the first mode of u_tau by each delta, runs both trajectories and
/// reports sup_t of ||dz(t)|| / ||dz(tau)||_{H_tau} in H_t and H_t^{-1}.
inline std::vector<DependenceRow> continuous_dependence_experiment(
    const Problem& p, const std::vector<double>& a0, const std::vector<double>& b0,
    const std::function<std::vector<double>(double)>& eta, const std::vector<double>& deltas,
    const SolverOptions& o = {}, unsigned jobs = 1) {
    for (double d : deltas)
        if (d == 0.0) throw ArgumentError("perturbation delta must be nonzero");
    SolverOptions oo = o;
    oo.ledger = false;
    const auto z1 = solver::modal_initial_data(p, oo, a0, b0, eta);
    const RunRecord r1 = solver::solve(p, z1, oo);
    return parallel_map<DependenceRow>(deltas.size(), jobs, [&](std::size_t j) {
        const double delta = deltas[j];
        auto a2 = a0;
        a2[0] += delta;
        const auto z2 = solver::modal_initial_data(p, oo, a2, b0, eta);
        const RunRecord r2 = solver::solve(p, z2, oo);
        const auto dn = difference_norms(r1, r2);
        DependenceRow row;
        row.delta = delta;
        const double base = dn.front().H;
        std::vector<double> t, lam;
        for (std::size_t i = 0; i < dn.size(); ++i) {
            row.sup_ratio_H = std::max(row.sup_ratio_H, dn[i].H / base);
            row.sup_ratio_Hm1 = std::max(row.sup_ratio_Hm1, dn[i].Hm1 / base);
            t.push_back(r1.time(r1.outputs[i]));
            lam.push_back(dn[i].Lambda);
        }
        row.lambda_fit = solver::exponential_envelope(t, lam);
        return row;
    });
}

}  // namespace viscomem::oracles
