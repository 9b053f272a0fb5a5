#pragma once

#include <cmath>
#include <limits>

#include "viscomem/kernels/kernel.hpp"

namespace viscomem::kernels {

inline double eval_mu(const MemoryKernel& k, double t, double s) {
    if (!(s > 0.0)) throw ArgumentError("memory lag must be positive, got " + point_label(t, s));
    const double v = k.mu(t, s);
    if (!std::isfinite(v)) throw DomainError("kernel value not finite at " + point_label(t, s));
    return v;
}

/// Total mass kappa(t). Families with a closed form return it directly;
/// others integrate with the kernel's quadrature fallback.
inline double mass_kappa(const MemoryKernel& k, double t) { return k.kappa(t); }

/// \int_0^inf mu_t by adaptive quadrature, bypassing any closed form.
inline double mass_kappa_quadrature(const MemoryKernel& k, double t, double rel_tol = 1e-10) {
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.singular_endpoints = k.singular_at_zero();
    opt.split = k.length_scale(t);
    return quad::integral([&](double s) { return s > 0.0 ? k.mu(t, s) : 0.0; }, 0.0,
                          std::numeric_limits<double>::infinity(), opt);
}

struct Structural {
    double K;  // domination K_tau(t)
    double M;  // growth M(t)
};

inline Structural structural_functions(const MemoryKernel& k, double tau, double t) {
    if (t < tau) throw ArgumentError("structural functions need t >= tau");
    return {k.domination(tau, t), k.growth(t)};
}

/// Kelvin-Voigt mass \int_0^inf k_t = \int_0^inf s mu_t(s) ds.
inline double kv_mass(const MemoryKernel& k, double t, double rel_tol = 1e-10) {
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.singular_endpoints = k.singular_at_zero();
    opt.split = k.length_scale(t);
    const double m = quad::integral([&](double s) { return s > 0.0 ? s * k.mu(t, s) : 0.0; }, 0.0,
                                    std::numeric_limits<double>::infinity(), opt);
    if (!std::isfinite(m)) throw NumericError("first moment of the kernel diverges", m);
    return m;
}

}  // namespace viscomem::kernels
