#pragma once

// Residual of the history-norm growth bound along a recorded trajectory:
//   R(a, b) = ||eta^a||^2 + M \int_a^b ||eta^t||^2 dt + 2 \int_a^b <u_t, eta^t> dt - ||eta^b||^2,
// norms and pairing in M_t^sigma, M = sup over the window of the growth
// function. The bound says R >= 0; on the discrete record R >= -O(dt^2).

#include <algorithm>
#include <limits>
#include <vector>

#include "viscomem/history/memory.hpp"

namespace viscomem::history {

struct KeySeries {
    std::vector<double> t;
    std::vector<double> N;  // ||eta^t||^2_{M_t^sigma}
    std::vector<double> P;  // <u_t(t), eta^t>_{M_t^sigma}
    std::vector<double> intN, intP;  // trapezoid prefix integrals from tau
};

/// Series at every recorded step; b holds u_t step-major.
inline KeySeries key_series(const MemoryIntegrator& mi, const HistorySnapshot& h, const std::vector<double>& b,
                            const MemoryNormSpec& spec) {
    const std::size_t n = h.modes();
    const std::size_t count = h.traj.count();
    if (b.size() != count * n) throw ArgumentError("velocity record does not match the trajectory");
    KeySeries ks;
    ks.t.resize(count);
    ks.N.resize(count);
    ks.P.resize(count);
    MemoryEval e;
    for (std::size_t i = 0; i < count; ++i) {
        const double t = h.traj.time(i);
        mi.evaluate(h, t, nullptr, t, true, e);
        double N = 0.0, P = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double w = spec.weight(k);
            N += w * e.sq[k];
            P += w * b[i * n + k] * e.c[k];
        }
        ks.t[i] = t;
        ks.N[i] = N;
        ks.P[i] = P;
    }
    ks.intN.assign(count, 0.0);
    ks.intP.assign(count, 0.0);
    const double dt = h.traj.dt();
    for (std::size_t i = 1; i < count; ++i) {
        ks.intN[i] = ks.intN[i - 1] + 0.5 * dt * (ks.N[i - 1] + ks.N[i]);
        ks.intP[i] = ks.intP[i - 1] + 0.5 * dt * (ks.P[i - 1] + ks.P[i]);
    }
    return ks;
}

/// sup of the growth function over the given times, floored at zero.
inline double growth_sup(const kernels::MemoryKernel& k, const std::vector<double>& times) {
    double M = 0.0;
    for (double t : times) M = std::max(M, k.growth(t));
    return M;
}

/// R(t_a, t_b) for recorded step indices a <= b.
inline double key_inequality_residual(const KeySeries& ks, double M, std::size_t a, std::size_t b) {
    if (a > b) throw ArgumentError("key inequality needs a <= b");
    if (b >= ks.N.size()) throw ArgumentError("key inequality index past the record");
    return ks.N[a] + M * (ks.intN[b] - ks.intN[a]) + 2.0 * (ks.intP[b] - ks.intP[a]) - ks.N[b];
}

struct KeyScan {
    double min_R = std::numeric_limits<double>::infinity();
    std::size_t a = 0, b = 0;  // step indices of the worst pair
    std::size_t pairs = 0;
};

/// Worst residual over all pairs a <= b of the given step indices.
inline KeyScan key_inequality_scan(const KeySeries& ks, double M, const std::vector<std::size_t>& steps) {
    KeyScan s;
    for (std::size_t i = 0; i < steps.size(); ++i)
        for (std::size_t j = i; j < steps.size(); ++j) {
            const double R = key_inequality_residual(ks, M, steps[i], steps[j]);
            ++s.pairs;
            if (R < s.min_R) {
                s.min_R = R;
                s.a = steps[i];
                s.b = steps[j];
            }
        }
    return s;
}

}  // namespace viscomem::history
