#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>

#include "viscomem/errors.hpp"
#include "viscomem/quadrature.hpp"

namespace viscomem::kernels {

/// Moments of a kernel over a lag cell [lo, hi] in the normalized coordinate
/// x = (s - lo) / (hi - lo):  m_p = \int_lo^hi mu_t(s) x^p ds.
struct CellMoments {
    double m0 = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
};

inline std::string point_label(double t, double s) {
    std::ostringstream os;
    os.precision(17);
    os << "(t = " << t << ", s = " << s << ")";
    return os.str();
}

/// A time-dependent memory kernel (t, s) -> mu_t(s) on R x (0, inf).
///
/// Families override the closed forms they know. Everything else falls back
/// to central finite differences (derivatives) or adaptive quadrature
/// (masses, tails, cell moments). Instances are immutable after construction.
class MemoryKernel {
public:
    virtual ~MemoryKernel() = default;

    virtual std::string name() const = 0;

    virtual double mu(double t, double s) const = 0;

    /// d/ds mu_t(s).
    virtual double mu_s(double t, double s) const { return fd_mu_s(t, s); }

    /// d/dt mu_t(s).
    virtual double mu_dot(double t, double s) const { return fd_mu_dot(t, s); }

    /// Total mass kappa(t) = \int_0^inf mu_t(s) ds.
    virtual double kappa(double t) const { return quadrature_tail(t, 0.0); }

    /// Tail mass \int_s^inf mu_t(y) dy; equals the relaxation function k_t(s).
    virtual double tail(double t, double s) const { return quadrature_tail(t, s); }

    virtual CellMoments moments(double t, double lo, double hi) const {
        return quadrature_moments(t, lo, hi);
    }

    /// Domination factor K_tau(t) of mu_t <= K_tau(t) mu_tau, t >= tau.
    virtual double domination(double tau, double t) const = 0;

    /// Growth rate M(t) of mu_dot + mu_s <= M(t) mu.
    virtual double growth(double t) const = 0;

    virtual bool singular_at_zero() const { return false; }
    virtual bool time_independent() const { return false; }

    /// Characteristic lag scale at time t (decay length of mu_t).
    virtual double length_scale(double /*t*/) const { return 1.0; }

    // Finite-difference derivatives, step h = 1e-5 * scale.
    double fd_mu_s(double t, double s) const {
        const double h = std::min(1e-5 * length_scale(t), 0.5 * s);
        return (mu(t, s + h) - mu(t, s - h)) / (2.0 * h);
    }

    double fd_mu_dot(double t, double s) const {
        const double h = 1e-5 * std::max(1.0, std::abs(t));
        return (mu(t + h, s) - mu(t - h, s)) / (2.0 * h);
    }

protected:
    quad::Options quad_options(double t) const {
        quad::Options opt;
        opt.singular_endpoints = singular_at_zero();
        opt.split = length_scale(t);
        return opt;
    }

    double quadrature_tail(double t, double s) const {
        auto f = [&](double y) { return mu(t, y); };
        quad::Options opt = quad_options(t);
        if (s > 0.0) opt.singular_endpoints = false;
        return quad::integral(f, s, std::numeric_limits<double>::infinity(), opt);
    }

    CellMoments quadrature_moments(double t, double lo, double hi) const {
        CellMoments m;
        if (!std::isfinite(hi)) {
            m.m0 = tail(t, lo);
            return m;
        }
        const double width = hi - lo;
        if (width <= 0.0) return m;
        quad::Options opt = quad_options(t);
        opt.singular_endpoints = singular_at_zero() && lo == 0.0;
        m.m0 = quad::integral([&](double s) { return mu(t, s); }, lo, hi, opt);
        m.m1 = quad::integral(
            [&](double s) { return mu(t, s) * ((s - lo) / width); }, lo, hi, opt);
        m.m2 = quad::integral(
            [&](double s) {
                const double x = (s - lo) / width;
                return mu(t, s) * x * x;
            },
            lo, hi, opt);
        return m;
    }
};

using KernelPtr = std::shared_ptr<const MemoryKernel>;

/// mu identically zero: the purely elastic (memoryless) case.
class ZeroKernel final : public MemoryKernel {
public:
    std::string name() const override { return "zero"; }
    double mu(double, double) const override { return 0.0; }
    double mu_s(double, double) const override { return 0.0; }
    double mu_dot(double, double) const override { return 0.0; }
    double kappa(double) const override { return 0.0; }
    double tail(double, double) const override { return 0.0; }
    CellMoments moments(double, double, double) const override { return {}; }
    double domination(double, double) const override { return 1.0; }
    double growth(double) const override { return 0.0; }
    bool time_independent() const override { return true; }
};

}  // namespace viscomem::kernels
