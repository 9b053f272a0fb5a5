#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "viscomem/solver/solve.hpp"

namespace viscomem::solver {

/// Constants of the two-side control
///   theta (|u|_1^2 + |u_t|^2) - C <= E <= Q(|u|_1 + |u_t|).
/// theta comes from l_F = inf 2F(u)/u^2 through the Poincare step
/// 2 <F(u), 1> >= l_F |u|^2 >= (l_F / lambda_1) |u|_1^2. If that leaves no
/// positive theta, theta = min(1, k_inf)/2 and C absorbs the rest pointwise.
/// Q(r) = max(k_inf, 1) r^2 + 2 max_{|v| <= r/2} F(v)^+, using |u|_inf <= |u|_1 / 2
/// on the unit interval.
struct TwoSideConstants {
    double theta = 1.0;
    double C = 0.0;
    double lF = 0.0;
    double k_inf = 1.0;
    Nonlinearity nl;

    double Q(double r) const {
        double Fmax = 0.0;
        if (!nl.is_zero) {
            const double vmax = 0.5 * r;
            for (int i = -1000; i <= 1000; ++i) Fmax = std::max(Fmax, nl.F(vmax * i / 1000.0));
        }
        return std::max(k_inf, 1.0) * r * r + 2.0 * Fmax;
    }
};

inline TwoSideConstants two_side_constants(const Nonlinearity& nl, double lambda1, double k_inf) {
    TwoSideConstants c;
    c.nl = nl;
    c.k_inf = k_inf;
    if (nl.is_zero) {
        c.theta = std::min(1.0, k_inf);
        return c;
    }
    double lF = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 4000; ++i) {
        const double u = 1e-3 * std::pow(1e6, i / 4000.0);
        lF = std::min({lF, 2.0 * nl.F(u) / (u * u), 2.0 * nl.F(-u) / (u * u)});
    }
    c.lF = lF;
    const double theta = std::min(1.0, k_inf + std::min(0.0, lF) / lambda1);
    if (theta > 0.0) {
        c.theta = theta;
        return c;
    }
    c.theta = 0.5 * std::min(1.0, k_inf);
    const double slope = lambda1 * (k_inf - c.theta);
    double C = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double u = 1e-2 * i;
        C = std::max({C, -2.0 * nl.F(u) - slope * u * u, -2.0 * nl.F(-u) - slope * u * u});
    }
    c.C = C;
    return c;
}

struct TwoSideMargins {
    double lower = std::numeric_limits<double>::infinity();  // min of E - (theta X - C)
    double upper = std::numeric_limits<double>::infinity();  // min of Q(r) - E
    double t_lower = 0.0, t_upper = 0.0;
    TwoSideConstants constants;
};

inline TwoSideMargins two_side_control_check(const RunRecord& r) {
    const Problem& p = r.problem;
    TwoSideMargins m;
    m.constants = two_side_constants(p.nl, p.spectrum.lambda(0), p.k_inf);
    for (std::size_t idx = 0; idx < r.ledger.rows.size(); ++idx) {
        const std::size_t i = r.outputs[idx];
        const auto a = r.a_at(i), b = r.b_at(i);
        double u1 = 0.0, v0 = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            u1 += p.spectrum.lambda(k) * a[k] * a[k];
            v0 += b[k] * b[k];
        }
        const double E = r.ledger.rows[idx].e.E;
        const double lo = E - (m.constants.theta * (u1 + v0) - m.constants.C);
        const double hi = m.constants.Q(std::sqrt(u1) + std::sqrt(v0)) - E;
        if (lo < m.lower) {
            m.lower = lo;
            m.t_lower = r.time(i);
        }
        if (hi < m.upper) {
            m.upper = hi;
            m.t_upper = r.time(i);
        }
    }
    return m;
}

/// Trapezoid cumulative integral of y over t.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    std::vector<double> I(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) I[i] = I[i - 1] + 0.5 * (t[i] - t[i - 1]) * (y[i - 1] + y[i]);
    return I;
}

struct GronwallCheck {
    double C = 0.0;            // fitted on the first half of the samples
    double worst_slack = 0.0;  // min over held-out samples of envelope - value
    bool ok = true;
};

/// Fits the smallest C with y(t) <= y(t0) + C + C \int y on the first half of
/// the samples, then checks the held-out second half against that envelope.
inline GronwallCheck gronwall_envelope(const std::vector<double>& t, const std::vector<double>& y) {
    GronwallCheck g;
    if (t.size() < 4) throw ArgumentError("Gronwall check needs at least four samples");
    const auto I = cumulative_trapezoid(t, y);
    const std::size_t half = t.size() / 2;
    for (std::size_t i = 0; i < half; ++i) g.C = std::max(g.C, (y[i] - y[0]) / (1.0 + I[i]));
    g.worst_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = half; i < t.size(); ++i)
        g.worst_slack = std::min(g.worst_slack, y[0] + g.C + g.C * I[i] - y[i]);
    g.ok = g.worst_slack >= 0.0;
    return g;
}

struct ExponentialFit {
    double C = 0.0;            // rate fitted on the first half
    double worst_slack = 0.0;  // min over held-out samples of y0 e^{C (t - t0)} - y
    bool ok = true;
};

/// y(t) <= y(t0) e^{C (t - t0)}: fit C on the first half, verify the rest.
inline ExponentialFit exponential_envelope(const std::vector<double>& t, const std::vector<double>& y) {
    ExponentialFit f;
    if (t.size() < 4) throw ArgumentError("exponential envelope needs at least four samples");
    if (!(y[0] > 0.0)) throw ArgumentError("exponential envelope needs y(t0) > 0");
    const std::size_t half = t.size() / 2;
    for (std::size_t i = 1; i < half; ++i)
        if (y[i] > 0.0) f.C = std::max(f.C, std::log(y[i] / y[0]) / (t[i] - t[0]));
    f.worst_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = half; i < t.size(); ++i)
        f.worst_slack = std::min(f.worst_slack, y[0] * std::exp(f.C * (t[i] - t[0])) - y[i]);
    f.ok = f.worst_slack >= 0.0;
    return f;
}

}  // namespace viscomem::solver
