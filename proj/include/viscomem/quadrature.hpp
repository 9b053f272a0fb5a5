#pragma once

// Thin layer over Boost.Math quadrature with the error policy used across
// the library: a result whose estimated error misses the requested tolerance
// raises NumericError instead of being returned silently.

#include <array>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "viscomem/errors.hpp"

namespace viscomem::quad {

struct Options {
    double rel_tol = 1e-11;
    double abs_tol = 1e-300;
    unsigned max_depth = 20;
    /// Integrable endpoint singularities (e.g. s^{-1/2} at zero).
    bool singular_endpoints = false;
    /// Split point offset used when a singular integrand runs to infinity.
    double split = 1.0;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
};

namespace detail {

inline void accept(const Result& r, const Options& opt, double a, double b) {
    const double budget = std::max(100.0 * opt.rel_tol * r.l1, opt.abs_tol);
    if (!std::isfinite(r.value) || !(r.error <= budget)) {
        throw NumericError("quadrature on [" + std::to_string(a) + ", " + std::to_string(b) +
                               "] did not converge",
                           r.error);
    }
}

template <class F>
Result gauss_kronrod(F&& f, double a, double b, const Options& opt) {
    Result r;
    r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, opt.max_depth, opt.rel_tol, &r.error, &r.l1);
    return r;
}

template <class F>
Result tanh_sinh(F&& f, double a, double b, const Options& opt) {
    static thread_local boost::math::quadrature::tanh_sinh<double> integrator(15);
    Result r;
    std::size_t levels = 0;
    r.value = integrator.integrate(f, a, b, opt.rel_tol, &r.error, &r.l1, &levels);
    return r;
}

}  // namespace detail

/// Integral of f over [a, b]; b may be +infinity.
template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
    if (a == b) return {};
    if (a > b) {
        Result r = integrate(f, b, a, opt);
        r.value = -r.value;
        return r;
    }
    Result r;
    if (!opt.singular_endpoints) {
        r = detail::gauss_kronrod(f, a, b, opt);
    } else if (std::isfinite(b)) {
        r = detail::tanh_sinh(f, a, b, opt);
    } else {
        const double mid = a + opt.split;
        const Result head = detail::tanh_sinh(f, a, mid, opt);
        const Result tail = detail::gauss_kronrod(f, mid, b, opt);
        r = {head.value + tail.value, head.error + tail.error, head.l1 + tail.l1};
    }
    detail::accept(r, opt, a, b);
    return r;
}

template <class F>
double integral(F&& f, double a, double b, const Options& opt = {}) {
    return integrate(std::forward<F>(f), a, b, opt).value;
}

/// phi_p(beta) = \int_0^1 e^{-beta x} x^p dx for p = 0, 1, 2, beta >= 0.
/// Stable for all beta: power series below 1, closed forms above.
inline std::array<double, 3> exponential_moments(double beta) {
    std::array<double, 3> phi{};
    if (beta < 1.0) {
        // sum_j (-beta)^j / (j! (p + j + 1))
        double term = 1.0;
        for (int j = 0; j < 30; ++j) {
            for (int p = 0; p < 3; ++p) phi[p] += term / (p + j + 1);
            term *= -beta / (j + 1);
            if (std::abs(term) < 1e-18) break;
        }
        return phi;
    }
    const double e = std::exp(-beta);
    phi[0] = -std::expm1(-beta) / beta;
    phi[1] = (1.0 - e * (1.0 + beta)) / (beta * beta);
    phi[2] = (2.0 - e * (2.0 + beta * (2.0 + beta))) / (beta * beta * beta);
    return phi;
}

}  // namespace viscomem::quad
