#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "viscomem/io/csv.hpp"
#include "viscomem/kernels/kernel.hpp"

namespace viscomem::kernels {

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = a;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
    v.back() = b;
    return v;
}

inline std::vector<double> geomspace(double a, double b, std::size_t n) {
    if (!(a > 0.0) || !(b > a)) throw ArgumentError("geomspace needs 0 < a < b");
    std::vector<double> v(n);
    const double la = std::log(a), lb = std::log(b);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = n == 1 ? a : std::exp(la + (lb - la) * static_cast<double>(i) / (n - 1));
    v.front() = a;
    if (n > 1) v.back() = b;
    return v;
}

struct AssumptionCheck {
    std::string assumption;
    bool pass = true;
    double margin = std::numeric_limits<double>::infinity();
    double t = std::numeric_limits<double>::quiet_NaN();
    double s = std::numeric_limits<double>::quiet_NaN();
    std::string note;
};

struct KernelReport {
    std::string kernel;
    std::vector<AssumptionCheck> checks;
    std::string grids;
    double tol = 0.0;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
    }
    double worst_margin() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& c : checks) m = std::min(m, c.margin);
        return m;
    }
    const AssumptionCheck& operator[](const std::string& name) const {
        for (const auto& c : checks)
            if (c.assumption == name) return c;
        throw ArgumentError("report has no row '" + name + "'");
    }
};

struct ValidateOptions {
    double tol = 1e-9;
    double tail_tol = 1e-10;
};

namespace detail {

// Tracks the worst (smallest) slack seen and where.
struct Worst {
    double margin = std::numeric_limits<double>::infinity();
    double t = std::numeric_limits<double>::quiet_NaN();
    double s = std::numeric_limits<double>::quiet_NaN();
    std::string note;

    void see(double m, double tt, double ss) {
        if (std::isnan(m)) m = std::numeric_limits<double>::lowest();
        if (m < margin) {
            margin = m;
            t = tt;
            s = ss;
        }
    }

    AssumptionCheck finish(const std::string& name, double tol) const {
        AssumptionCheck c;
        c.assumption = name;
        c.margin = std::isfinite(margin) ? margin
                   : margin > 0          ? std::numeric_limits<double>::max()
                                         : std::numeric_limits<double>::lowest();
        c.pass = !(c.margin < -tol);
        c.t = t;
        c.s = s;
        c.note = note;
        return c;
    }
};

// Runs body(t, s); a DomainError there counts as the worst possible margin.
template <class Body>
void guarded(Worst& w, double t, double s, Body&& body) {
    try {
        body();
    } catch (const DomainError& e) {
        w.see(std::numeric_limits<double>::lowest(), t, s);
        if (w.note.empty()) w.note = e.what();
    }
}

}  // namespace detail

/// Checks (M1)-(M4) and the mass domination on the product grid t_grid x s_grid.
/// Every check yields the worst signed slack; a verdict fails iff its margin
/// is below -tol.
inline KernelReport validate_assumptions(const MemoryKernel& k, const std::vector<double>& t_grid,
                                         const std::vector<double>& s_grid,
                                         const ValidateOptions& opt = {}) {
    if (t_grid.empty() || s_grid.empty()) throw ArgumentError("validation grids must be nonempty");
    if (!(opt.tol > 0.0)) throw ArgumentError("validation tolerance must be positive");
    for (double s : s_grid)
        if (!(s > 0.0)) throw ArgumentError("s grid must lie in (0, inf)");

    std::vector<double> ts = t_grid, ss = s_grid;
    std::sort(ts.begin(), ts.end());
    std::sort(ss.begin(), ss.end());

    detail::Worst mono, summ, dom, kdom, fin, grow;
    double s_star_max = ss.back();

    // mu on the grid, reused by M1 and M2; NaN marks a DomainError.
    std::vector<std::vector<double>> mu(ts.size(), std::vector<double>(ss.size()));
    for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t j = 0; j < ss.size(); ++j) {
            try {
                mu[i][j] = k.mu(ts[i], ss[j]);
            } catch (const DomainError& e) {
                mu[i][j] = std::numeric_limits<double>::quiet_NaN();
                if (mono.note.empty()) mono.note = dom.note = e.what();
            }
        }

    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double t = ts[i];
        for (std::size_t j = 0; j < ss.size(); ++j) {
            mono.see(mu[i][j], t, ss[j]);  // nonnegativity
            if (j + 1 < ss.size()) mono.see(mu[i][j] - mu[i][j + 1], t, ss[j + 1]);
        }

        // Summability: the tail mass must drop below tail_tol at some finite
        // lag s*; the search starts at the grid end and doubles.
        detail::guarded(summ, t, ss.back(), [&] {
            const double kap = k.kappa(t);
            if (!std::isfinite(kap)) {
                summ.see(std::numeric_limits<double>::lowest(), t, 0.0);
                return;
            }
            double s_star = ss.back();
            double tail = k.tail(t, s_star);
            for (int it = 0; it < 64 && tail >= opt.tail_tol; ++it) {
                s_star *= 2.0;
                tail = k.tail(t, s_star);
            }
            summ.see(opt.tail_tol - tail, t, s_star);
            s_star_max = std::max(s_star_max, s_star);
        });

        for (std::size_t j = 0; j < ss.size(); ++j) {
            const double s = ss[j];
            detail::guarded(fin, t, s, [&] {
                const double d = k.mu_dot(t, s);
                fin.see(std::isfinite(d) ? 0.0 : -1.0, t, s);
                const double lhs = d + k.mu_s(t, s);
                grow.see(k.growth(t) * mu[i][j] - lhs, t, s);
            });
            if (std::isnan(mu[i][j])) grow.see(std::numeric_limits<double>::lowest(), t, s);
        }

        for (std::size_t p = 0; p <= i; ++p) {
            const double tau = ts[p];
            detail::guarded(kdom, t, 0.0, [&] {
                kdom.see(k.domination(tau, t) * k.kappa(tau) - k.kappa(t), t, tau);
            });
            double K = std::numeric_limits<double>::quiet_NaN();
            try {
                K = k.domination(tau, t);
            } catch (const DomainError&) {
            }
            for (std::size_t j = 0; j < ss.size(); ++j) dom.see(K * mu[p][j] - mu[i][j], t, ss[j]);
        }
    }

    KernelReport r;
    r.kernel = k.name();
    r.tol = opt.tol;
    std::ostringstream g;
    g.precision(17);
    g << "t in [" << ts.front() << ", " << ts.back() << "] x " << ts.size() << "; s in [" << ss.front()
      << ", " << ss.back() << "] x " << ss.size() << "; tail below " << opt.tail_tol << " by s = "
      << s_star_max;
    r.grids = g.str();
    r.checks.push_back(mono.finish("M1-monotone", opt.tol));
    r.checks.push_back(summ.finish("M1-summable", opt.tol));
    r.checks.push_back(dom.finish("M2", opt.tol));
    r.checks.push_back(kdom.finish("M2-kappa", opt.tol));
    r.checks.push_back(fin.finish("M3", opt.tol));
    r.checks.push_back(grow.finish("M4", opt.tol));
    return r;
}

inline io::Table report_table(const KernelReport& r) {
    io::Table t;
    t.header = {"assumption", "verdict", "margin", "t", "s"};
    for (const auto& c : r.checks) {
        const bool located = !c.pass;
        t.add({c.assumption, c.pass ? "pass" : "fail", io::format_double(c.margin),
               located ? io::format_double(c.t) : "", located ? io::format_double(c.s) : ""});
    }
    return t;
}

/// Largest relative gap between the closed-form derivatives of mu and central
/// differences on the grid, scaled by max(|mu|, |closed|).
inline double derivative_discrepancy(const MemoryKernel& k, const std::vector<double>& t_grid,
                                     const std::vector<double>& s_grid) {
    double worst = 0.0;
    for (double t : t_grid)
        for (double s : s_grid) {
            const double scale = std::abs(k.mu(t, s)) / k.length_scale(t) + 1e-300;
            const double e1 = std::abs(k.mu_s(t, s) - k.fd_mu_s(t, s));
            const double e2 = std::abs(k.mu_dot(t, s) - k.fd_mu_dot(t, s));
            worst = std::max({worst, e1 / scale, e2 / std::max(scale, std::abs(k.mu_dot(t, s)))});
        }
    return worst;
}

}  // namespace viscomem::kernels
