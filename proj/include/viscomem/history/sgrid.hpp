#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "viscomem/kernels/kernel.hpp"

namespace viscomem::history {

/// Geometric lag grid s_0 < ... < s_{J-1} on [s_min, s_max]. Cell j is
/// [b_j, b_{j+1}] with b_0 = 0, interior boundaries at node midpoints, and
/// b_J = s_max.
struct SGrid {
    std::vector<double> nodes;
    std::vector<double> bounds;

    static SGrid geometric(std::size_t J, double s_min, double s_max) {
        if (J < 2) throw ArgumentError("SGrid needs at least two nodes");
        if (!(s_min > 0.0) || !(s_max > s_min)) throw ArgumentError("SGrid needs 0 < s_min < s_max");
        SGrid g;
        g.nodes.resize(J);
        const double r = std::log(s_max / s_min) / static_cast<double>(J - 1);
        for (std::size_t j = 0; j < J; ++j) g.nodes[j] = s_min * std::exp(r * static_cast<double>(j));
        g.nodes.front() = s_min;
        g.nodes.back() = s_max;
        g.bounds.resize(J + 1);
        g.bounds[0] = 0.0;
        for (std::size_t j = 1; j < J; ++j) g.bounds[j] = 0.5 * (g.nodes[j - 1] + g.nodes[j]);
        g.bounds[J] = s_max;
        return g;
    }

    std::size_t size() const { return nodes.size(); }
    double s_min() const { return nodes.front(); }
    double s_max() const { return nodes.back(); }

    /// Cell masses w_j(t) = \int_{b_j}^{b_{j+1}} mu_t.
    std::vector<double> weights(const kernels::MemoryKernel& k, double t) const {
        std::vector<double> w(size());
        double prev = k.tail(t, bounds[0]);
        for (std::size_t j = 0; j < size(); ++j) {
            const double next = k.tail(t, bounds[j + 1]);
            w[j] = prev - next;
            prev = next;
        }
        return w;
    }

    /// Linear interpolation of node samples (stride between consecutive
    /// nodes), constant beyond both ends.
    double interpolate(const double* samples, std::size_t stride, double s) const {
        if (s <= nodes.front()) return samples[0];
        if (s >= nodes.back()) return samples[(size() - 1) * stride];
        const auto it = std::upper_bound(nodes.begin(), nodes.end(), s);
        const std::size_t j = static_cast<std::size_t>(it - nodes.begin()) - 1;
        const double x = (s - nodes[j]) / (nodes[j + 1] - nodes[j]);
        return samples[j * stride] + x * (samples[(j + 1) * stride] - samples[j * stride]);
    }
};

/// Smallest lag (to relative 1e-6) past which the kernel tail mass stays
/// below tail_tol for all sampled t in [t_lo, t_hi].
inline double choose_s_max(const kernels::MemoryKernel& k, double t_lo, double t_hi,
                           double tail_tol = 1e-10, int samples = 17) {
    if (!(tail_tol > 0.0)) throw ArgumentError("tail tolerance must be positive");
    std::vector<double> ts;
    for (int i = 0; i < samples; ++i)
        ts.push_back(samples == 1 ? t_lo : t_lo + (t_hi - t_lo) * i / (samples - 1));
    auto worst = [&](double s) {
        double w = 0.0;
        for (double t : ts) w = std::max(w, k.tail(t, s));
        return w;
    };
    double lo = 0.0, hi = 1.0;
    for (double t : ts) hi = std::max(hi, k.length_scale(t));
    int guard = 0;
    while (worst(hi) >= tail_tol) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 80) throw NumericError("kernel tail never drops below tail_tol", worst(hi));
    }
    for (int it = 0; it < 80 && hi - lo > 1e-6 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (worst(mid) < tail_tol ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace viscomem::history
