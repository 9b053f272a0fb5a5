#pragma once

// Memory integrals \int_0^inf mu(s) eta^t(s) ds and \int mu |eta^t|^2 ds.
//
// eta^t is piecewise linear in s: on the lag cells [t - t_{i+1}, t - t_i] of
// the solver grid (the trajectory is linear in time) and on the shifted lag
// grid nodes for the eta_tau branch. Against a piecewise-linear profile the
// integrals reduce exactly to the kernel moments m0, m1, m2 of each cell:
//   \int mu eta   = m0 eL + m1 d
//   \int mu eta^2 = m0 eL^2 + 2 m1 eL d + m2 d^2,      d = eR - eL.
// Everything past the cut-off lag s_cut (tail mass below tail_tol) is lumped
// into one cell with eta frozen at the cut.

#include <cmath>
#include <map>
#include <vector>

#include "viscomem/history/snapshot.hpp"

namespace viscomem::history {

struct MemoryNormSpec {
    int sigma = 0;
    std::vector<double> lambda;

    double weight(std::size_t k) const { return std::pow(lambda.at(k), sigma + 1); }
};

struct MemoryEval {
    std::vector<double> c;   // \int mu eta_k
    std::vector<double> sq;  // \int mu eta_k^2
};

class MemoryIntegrator {
public:
    MemoryIntegrator(kernels::KernelPtr kernel, double s_cut)
        : kernel_(std::move(kernel)), s_cut_(s_cut) {
        if (!kernel_) throw ArgumentError("memory integrator needs a kernel");
        if (!(s_cut > 0.0)) throw ArgumentError("memory cut-off lag must be positive");
    }

    const kernels::MemoryKernel& kernel() const { return *kernel_; }
    double s_cut() const { return s_cut_; }

    /// Integrals of eta^t against mu_{tk}. head, when given, is u(t) at a time
    /// t past the last recorded step (the stepper's half-step predictor);
    /// otherwise t must lie within the trajectory.
    void evaluate(const HistorySnapshot& h, double t, const double* head, double tk, bool want_sq,
                  MemoryEval& out) const {
        const Trajectory& tr = h.traj;
        const std::size_t n = h.modes();
        out.c.assign(n, 0.0);
        if (want_sq)
            out.sq.assign(n, 0.0);
        else
            out.sq.clear();

        const double tau = h.tau();
        const double dt = tr.dt();
        if (t < tau - 1e-9 * dt) throw StateError("history queried before its origin time");
        if (!head && t > tr.t_now() + 1e-9 * dt)
            throw StateError("history queried past the recorded trajectory");

        // Last recorded step at or before t, and the phase p = t - t_m.
        std::size_t m = static_cast<std::size_t>(std::max(0.0, std::floor((t - tau) / dt + 1e-9)));
        m = std::min(m, tr.count() - 1);
        double p = t - tr.time(m);
        if (p < 1e-9 * dt) p = 0.0;

        ut_.resize(n);
        if (head)
            std::copy(head, head + n, ut_.begin());
        else if (p == 0.0)
            std::copy(tr.at(m), tr.at(m) + n, ut_.begin());
        else
            tr.value(t, ut_.data());

        const double D = p == 0.0 ? static_cast<double>(m) * dt : t - tau;
        const std::vector<kernels::CellMoments>& lag = lag_moments(p, dt, m, tk);

        // eta at the left end of the current cell.
        eL_.assign(n, 0.0);
        eR_.resize(n);
        double s_left = 0.0;
        std::size_t cell = 0;
        bool cut = false;
        if (m > 0 || p > 0.0) {
            const std::size_t first = p > 0.0 ? m : m - 1;  // trajectory index at the first lag node
            for (std::size_t i = first + 1; i-- > 0;) {
                const double* ui = tr.at(i);
                for (std::size_t k = 0; k < n; ++k) eR_[k] = ut_[k] - ui[k];
                accumulate(lag[cell], want_sq, out);
                ++cell;
                s_left = p + static_cast<double>(m - i) * dt;
                std::swap(eL_, eR_);
                if (s_left >= s_cut_ && i > 0) {
                    cut = true;
                    break;
                }
            }
        }
        if (cut) {
            lump(kernel_->tail(tk, s_left), want_sq, out);
            return;
        }

        // eta_tau branch: eta = eta_tau(s - D) + ubar, ubar = u(t) - u(tau).
        const double* u0 = tr.at(0);
        std::vector<double>& ubar = ubar_;
        ubar.resize(n);
        for (std::size_t k = 0; k < n; ++k) ubar[k] = ut_[k] - u0[k];

        const SGrid& g = h.grid;
        const std::size_t J = g.size();
        auto node_eta = [&](std::size_t j, std::vector<double>& e) {
            const double* row = h.eta0.data() + j * n;
            for (std::size_t k = 0; k < n; ++k) e[k] = row[k] + ubar[k];
        };
        if (D >= s_cut_) {
            node_eta(0, eL_);
            lump(kernel_->tail(tk, D), want_sq, out);
            return;
        }
        // [D, D + s_0]: eta_tau held at its first node.
        node_eta(0, eL_);
        std::copy(eL_.begin(), eL_.end(), eR_.begin());
        accumulate(kernel_->moments(tk, D, D + g.nodes[0]), want_sq, out);
        for (std::size_t j = 0; j + 1 < J; ++j) {
            const double lo = D + g.nodes[j];
            if (lo >= s_cut_) {
                lump(kernel_->tail(tk, lo), want_sq, out);
                return;
            }
            node_eta(j + 1, eR_);
            accumulate(kernel_->moments(tk, lo, D + g.nodes[j + 1]), want_sq, out);
            std::swap(eL_, eR_);
        }
        lump(kernel_->tail(tk, D + g.nodes[J - 1]), want_sq, out);
    }

private:
    void accumulate(const kernels::CellMoments& mo, bool want_sq, MemoryEval& out) const {
        const std::size_t n = out.c.size();
        for (std::size_t k = 0; k < n; ++k) {
            const double l = eL_[k], d = eR_[k] - l;
            out.c[k] += mo.m0 * l + mo.m1 * d;
            if (want_sq) out.sq[k] += mo.m0 * l * l + 2.0 * mo.m1 * l * d + mo.m2 * d * d;
        }
    }

    // Constant-eta cell of mass w, eta = eL_.
    void lump(double w, bool want_sq, MemoryEval& out) const {
        const std::size_t n = out.c.size();
        for (std::size_t k = 0; k < n; ++k) {
            out.c[k] += w * eL_[k];
            if (want_sq) out.sq[k] += w * eL_[k] * eL_[k];
        }
    }

    // Moments of the lag cells [0, p], [p, p + dt], ... (or [0, dt], ... when
    // p = 0), enough for m + 1 cells. Time-independent kernels are cached per
    // phase; otherwise recomputed at tk.
    const std::vector<kernels::CellMoments>& lag_moments(double p, double dt, std::size_t m,
                                                         double tk) const {
        const std::size_t need = m + 1;
        auto fill = [&](std::vector<kernels::CellMoments>& v, std::size_t from) {
            for (std::size_t i = from; i < need; ++i) {
                double lo, hi;
                if (p > 0.0) {
                    lo = i == 0 ? 0.0 : p + static_cast<double>(i - 1) * dt;
                    hi = p + static_cast<double>(i) * dt;
                } else {
                    lo = static_cast<double>(i) * dt;
                    hi = lo + dt;
                }
                if (lo >= s_cut_) {
                    v.resize(need);  // past the cut: never read
                    return;
                }
                v.push_back(kernel_->moments(tk, lo, hi));
            }
        };
        if (!kernel_->time_independent()) {
            scratch_.clear();
            scratch_.reserve(need);
            fill(scratch_, 0);
            return scratch_;
        }
        if (cache_dt_ != dt) {
            cache_.clear();
            cache_dt_ = dt;
        }
        const long long key = std::llround(p / dt * 1048576.0);
        auto& v = cache_[key];
        if (v.size() < need) fill(v, v.size());
        return v;
    }

    kernels::KernelPtr kernel_;
    double s_cut_;
    mutable std::map<long long, std::vector<kernels::CellMoments>> cache_;
    mutable double cache_dt_ = 0.0;
    mutable std::vector<kernels::CellMoments> scratch_;
    mutable std::vector<double> ut_, eL_, eR_, ubar_;
};

inline double weighted_sum(const std::vector<double>& v, const MemoryNormSpec& spec) {
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) s += spec.weight(k) * v[k];
    return s;
}

/// Memory force c_k(t) = \int mu_t eta_k^t (the solver applies lambda_k).
inline std::vector<double> memory_coupling(const MemoryIntegrator& mi, const HistorySnapshot& h,
                                           double t) {
    MemoryEval e;
    mi.evaluate(h, t, nullptr, t, false, e);
    return e.c;
}

/// ||eta^t||^2 in the memory space built on mu_{tk} (tk = t by default).
inline double memory_norm(const MemoryIntegrator& mi, const HistorySnapshot& h, double t,
                          const MemoryNormSpec& spec, double tk = std::numeric_limits<double>::quiet_NaN()) {
    MemoryEval e;
    mi.evaluate(h, t, nullptr, std::isnan(tk) ? t : tk, true, e);
    return weighted_sum(e.sq, spec);
}

struct PhiBound {
    double lhs = 0.0;  // ||eta^t||^2 measured with mu_tau
    double phi = 0.0;  // 6 kappa(tau) sup ||u||^2_{sigma+1} + 3 ||eta_tau||^2_{M_tau}
};

inline PhiBound phi_bound(const MemoryIntegrator& mi, const HistorySnapshot& h, double tau, double t,
                          double run_sup_u, const MemoryNormSpec& spec) {
    PhiBound b;
    b.lhs = memory_norm(mi, h, t, spec, tau);
    b.phi = 6.0 * mi.kernel().kappa(tau) * run_sup_u + 3.0 * memory_norm(mi, h, h.tau(), spec, tau);
    return b;
}

struct Dissipativity {
    double inner = 0.0;          // <T eta, eta>, T = -d/ds, node rule with differenced eta
    double half_integral = 0.0;  // (1/2) \int mu' |eta|^2, node rule with cell masses of mu'
};

/// Both sides of the translation dissipativity identity for a profile given
/// by node samples (node-major, n modes) on the lag grid.
inline Dissipativity translation_dissipativity(const SGrid& g, const std::vector<double>& eta,
                                               const kernels::MemoryKernel& k, double t,
                                               const MemoryNormSpec& spec) {
    const std::size_t J = g.size();
    const std::size_t n = spec.lambda.size();
    if (eta.size() != J * n) throw ArgumentError("profile samples do not match grid x modes");
    const std::vector<double> w = g.weights(k, t);
    // \int_cell mu' = mu(b_{j+1}) - mu(b_j); a singular mu at zero is read at s_0 / 2.
    std::vector<double> wd(J);
    auto mu_at = [&](double s) {
        if (s <= 0.0) {
            const double v0 = k.mu(t, 0.0);
            return std::isfinite(v0) ? v0 : k.mu(t, 0.5 * g.nodes[0]);
        }
        return k.mu(t, s);
    };
    for (std::size_t j = 0; j < J; ++j) wd[j] = mu_at(g.bounds[j + 1]) - mu_at(g.bounds[j]);

    Dissipativity d;
    for (std::size_t k2 = 0; k2 < n; ++k2) {
        const double lw = spec.weight(k2);
        for (std::size_t j = 0; j < J; ++j) {
            const double e = eta[j * n + k2];
            double de;
            if (j == 0) {
                de = (eta[n + k2] - e) / (g.nodes[1] - g.nodes[0]);
            } else if (j + 1 == J) {
                de = (e - eta[(j - 1) * n + k2]) / (g.nodes[j] - g.nodes[j - 1]);
            } else {
                // Second-order difference on the nonuniform grid.
                const double hl = g.nodes[j] - g.nodes[j - 1], hr = g.nodes[j + 1] - g.nodes[j];
                const double el = eta[(j - 1) * n + k2], er = eta[(j + 1) * n + k2];
                de = (hl * hl * (er - e) + hr * hr * (e - el)) / (hl * hr * (hl + hr));
            }
            d.inner -= lw * w[j] * de * e;
            d.half_integral += 0.5 * lw * wd[j] * e * e;
        }
    }
    return d;
}

}  // namespace viscomem::history
