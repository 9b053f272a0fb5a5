#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "viscomem/errors.hpp"

namespace viscomem::solver {

/// Scalar nonlinearity f with f(0) = 0, its derivative and the potential F
/// (F' = f, F(0) = 0).
struct Nonlinearity {
    std::string name = "zero";
    std::function<double(double)> f = [](double) { return 0.0; };
    std::function<double(double)> fp = [](double) { return 0.0; };
    std::function<double(double)> F = [](double) { return 0.0; };
    bool is_zero = true;

    double operator()(double u) const { return f(u); }
};

inline Nonlinearity zero_nonlinearity() { return {}; }

/// f(u) = c u
inline Nonlinearity linear_nonlinearity(double c) {
    Nonlinearity n;
    n.name = "linear";
    n.f = [c](double u) { return c * u; };
    n.fp = [c](double) { return c; };
    n.F = [c](double u) { return 0.5 * c * u * u; };
    n.is_zero = c == 0.0;
    return n;
}

/// f(u) = a u^3 + b u; the default is u^3 - u.
inline Nonlinearity cubic_nonlinearity(double a = 1.0, double b = -1.0) {
    Nonlinearity n;
    n.name = "cubic";
    n.f = [a, b](double u) { return (a * u * u + b) * u; };
    n.fp = [a, b](double u) { return 3.0 * a * u * u + b; };
    n.F = [a, b](double u) { return (0.25 * a * u * u + 0.5 * b) * u * u; };
    n.is_zero = a == 0.0 && b == 0.0;
    return n;
}

struct NonlinearityCheck {
    double growth_C = 0.0;     // smallest C with |f'(u)| <= C (1 + u^2) on the sample
    double liminf_ratio = 0.0;  // min of f(u)/u over the large-|u| sample
    double lambda1 = 0.0;
    bool ok = true;
};

/// Sampled versions of the growth restriction and the dissipation condition
/// liminf f(u)/u > -lambda_1. The large-|u| sample spans [10, 1e4].
inline NonlinearityCheck check_nonlinearity(const Nonlinearity& nl, double lambda1) {
    NonlinearityCheck c;
    c.lambda1 = lambda1;
    if (std::abs(nl.f(0.0)) > 1e-14) throw ConfigError("nonlinearity must satisfy f(0) = 0");
    for (int i = -2000; i <= 2000; ++i) {
        const double u = 0.01 * i;
        c.growth_C = std::max(c.growth_C, std::abs(nl.fp(u)) / (1.0 + u * u));
    }
    c.liminf_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 400; ++i) {
        const double u = 10.0 * std::pow(1000.0, i / 400.0);
        c.liminf_ratio = std::min({c.liminf_ratio, nl.f(u) / u, nl.f(-u) / -u});
    }
    c.ok = c.liminf_ratio > -lambda1 && std::isfinite(c.growth_C);
    return c;
}

/// Config-time gate: rejects f whose sampled liminf f(u)/u is at or below -lambda_1.
inline NonlinearityCheck require_dissipative(const Nonlinearity& nl, double lambda1) {
    NonlinearityCheck c = check_nonlinearity(nl, lambda1);
    if (!c.ok)
        throw ConfigError("nonlinearity '" + nl.name + "' violates the dissipation condition: liminf f(u)/u = " +
                          std::to_string(c.liminf_ratio) + " <= -lambda_1 = " + std::to_string(-lambda1));
    return c;
}

}  // namespace viscomem::solver
