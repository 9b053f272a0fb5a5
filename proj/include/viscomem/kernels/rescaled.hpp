#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "viscomem/kernels/kernel.hpp"

namespace viscomem::kernels {

/// A nonincreasing summable density x -> mu(x) on (0, inf), the profile that
/// gets rescaled. Moments are over [lo, hi] in the normalized cell coordinate.
class BaseProfile {
public:
    virtual ~BaseProfile() = default;
    virtual std::string name() const = 0;
    virtual double value(double x) const = 0;
    virtual double derivative(double x) const = 0;
    /// \int_x^inf mu.
    virtual double tail(double x) const = 0;
    virtual double mass() const = 0;
    /// \int_0^inf x mu(x) dx.
    virtual double first_moment() const = 0;
    virtual bool singular() const { return false; }
    /// Right end of the support (inf unless the profile is compactly supported).
    virtual double support() const { return std::numeric_limits<double>::infinity(); }

    virtual CellMoments moments(double lo, double hi) const {
        CellMoments m;
        const double width = hi - lo;
        const double top = std::min(hi, support());
        if (width <= 0.0 || top <= lo) return m;
        if (!std::isfinite(hi)) {
            m.m0 = tail(lo);
            return m;
        }
        quad::Options opt;
        opt.singular_endpoints = singular() && lo == 0.0;
        m.m0 = quad::integral([&](double x) { return value(x); }, lo, top, opt);
        m.m1 = quad::integral([&](double x) { return value(x) * ((x - lo) / width); }, lo, top, opt);
        m.m2 = quad::integral(
            [&](double x) {
                const double y = (x - lo) / width;
                return value(x) * y * y;
            },
            lo, top, opt);
        return m;
    }
};

/// e^{-x}
class ExponentialProfile final : public BaseProfile {
public:
    std::string name() const override { return "exponential"; }
    double value(double x) const override { return std::exp(-x); }
    double derivative(double x) const override { return -std::exp(-x); }
    double tail(double x) const override { return std::exp(-x); }
    double mass() const override { return 1.0; }
    double first_moment() const override { return 1.0; }

    CellMoments moments(double lo, double hi) const override {
        if (!std::isfinite(hi)) return {std::exp(-lo), 0.0, 0.0};
        const double w = hi - lo;
        if (w <= 0.0) return {};
        const auto phi = quad::exponential_moments(w);
        const double scale = std::exp(-lo) * w;
        return {scale * phi[0], scale * phi[1], scale * phi[2]};
    }
};

/// x^{-1/2} e^{-x}: integrable singularity at the origin.
class GammaHalfProfile final : public BaseProfile {
public:
    std::string name() const override { return "gamma-half"; }
    double value(double x) const override { return std::exp(-x) / std::sqrt(x); }
    double derivative(double x) const override {
        return -std::exp(-x) / std::sqrt(x) * (1.0 + 0.5 / x);
    }
    double tail(double x) const override {
        return std::sqrt(std::numbers::pi) * std::erfc(std::sqrt(x));
    }
    double mass() const override { return std::sqrt(std::numbers::pi); }
    double first_moment() const override { return 0.5 * std::sqrt(std::numbers::pi); }
    bool singular() const override { return true; }
};

/// (1 - x)^2 on [0, 1], zero beyond: finite delay.
class CompactQuadraticProfile final : public BaseProfile {
public:
    std::string name() const override { return "compact-quadratic"; }
    double value(double x) const override { return x < 1.0 ? (1.0 - x) * (1.0 - x) : 0.0; }
    double derivative(double x) const override { return x < 1.0 ? -2.0 * (1.0 - x) : 0.0; }
    double tail(double x) const override {
        return x < 1.0 ? (1.0 - x) * (1.0 - x) * (1.0 - x) / 3.0 : 0.0;
    }
    double mass() const override { return 1.0 / 3.0; }
    double first_moment() const override { return 1.0 / 12.0; }
    double support() const override { return 1.0; }
};

/// Positive time scale t -> eps(t).
class TimeScale {
public:
    virtual ~TimeScale() = default;
    virtual std::string name() const = 0;
    virtual double eps(double t) const = 0;
    virtual double eps_dot(double t) const = 0;
    virtual bool constant() const { return false; }
};

class ConstantScale final : public TimeScale {
public:
    explicit ConstantScale(double eps0) : eps0_(eps0) {
        if (!(eps0 > 0.0)) throw ArgumentError("time scale must be positive");
    }
    std::string name() const override { return "constant"; }
    double eps(double) const override { return eps0_; }
    double eps_dot(double) const override { return 0.0; }
    bool constant() const override { return true; }

private:
    double eps0_;
};

/// eps0 * exp(-rate t)
class ExponentialScale final : public TimeScale {
public:
    ExponentialScale(double eps0, double rate) : eps0_(eps0), rate_(rate) {
        if (!(eps0 > 0.0)) throw ArgumentError("time scale must be positive");
    }
    std::string name() const override { return "exponential"; }
    double eps(double t) const override { return eps0_ * std::exp(-rate_ * t); }
    double eps_dot(double t) const override { return -rate_ * eps(t); }

private:
    double eps0_, rate_;
};

/// eps0 / (1 + rate * softplus(t)), softplus(t) = log(1 + e^{k t}) / k.
/// Smooth version of eps0 / (1 + rate * max(t, 0)).
class InverseLinearScale final : public TimeScale {
public:
    InverseLinearScale(double eps0, double rate, double sharpness = 4.0)
        : eps0_(eps0), rate_(rate), k_(sharpness) {
        if (!(eps0 > 0.0) || rate < 0.0 || !(sharpness > 0.0))
            throw ArgumentError("inverse-linear scale needs eps0 > 0, rate >= 0, sharpness > 0");
    }
    std::string name() const override { return "inverse-linear"; }
    double eps(double t) const override { return eps0_ / (1.0 + rate_ * softplus(t)); }
    double eps_dot(double t) const override {
        const double d = 1.0 + rate_ * softplus(t);
        const double sig = 1.0 / (1.0 + std::exp(-k_ * t));
        return -eps0_ * rate_ * sig / (d * d);
    }

private:
    double softplus(double t) const {
        const double z = k_ * t;
        return (std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)))) / k_;
    }
    double eps0_, rate_, k_;
};

/// eps0 + rate t. With rate > 0 the scale grows and the family violates the
/// domination assumption; kept as a counterexample for the validator.
class LinearScale final : public TimeScale {
public:
    LinearScale(double eps0, double rate) : eps0_(eps0), rate_(rate) {}
    std::string name() const override { return "linear"; }
    double eps(double t) const override { return eps0_ + rate_ * t; }
    double eps_dot(double) const override { return rate_; }
    bool constant() const override { return rate_ == 0.0; }

private:
    double eps0_, rate_;
};

/// mu_t(s) = eps(t)^{-2} mu(s / eps(t)).
class RescaledKernel final : public MemoryKernel {
public:
    RescaledKernel(std::shared_ptr<const BaseProfile> base, std::shared_ptr<const TimeScale> scale)
        : base_(std::move(base)), scale_(std::move(scale)) {
        if (!base_ || !scale_) throw ArgumentError("rescaled kernel needs a profile and a scale");
    }

    std::string name() const override { return "rescaled-" + base_->name() + "/" + scale_->name(); }

    const BaseProfile& base() const { return *base_; }
    const TimeScale& scale() const { return *scale_; }

    double eps(double t, double s = 0.0) const {
        const double e = scale_->eps(t);
        if (!(e > 0.0) || !std::isfinite(e))
            throw DomainError("time scale not positive and finite at " + point_label(t, s));
        return e;
    }

    double mu(double t, double s) const override {
        const double e = eps(t, s);
        return finite(base_->value(s / e) / (e * e), t, s);
    }

    double mu_s(double t, double s) const override {
        const double e = eps(t, s);
        return finite(base_->derivative(s / e) / (e * e * e), t, s);
    }

    double mu_dot(double t, double s) const override {
        const double e = eps(t, s);
        const double rate = scale_->eps_dot(t) / e;
        if (rate == 0.0) return 0.0;
        return finite(-rate * (2.0 * mu(t, s) + s * mu_s(t, s)), t, s);
    }

    double kappa(double t) const override { return base_->mass() / eps(t); }

    double tail(double t, double s) const override {
        const double e = eps(t, s);
        return base_->tail(s / e) / e;
    }

    CellMoments moments(double t, double lo, double hi) const override {
        const double e = eps(t, lo);
        CellMoments m = base_->moments(lo / e, hi / e);
        m.m0 /= e;
        m.m1 /= e;
        m.m2 /= e;
        return m;
    }

    double domination(double tau, double t) const override {
        const double r = eps(tau) / eps(t);
        return r * r;
    }

    double growth(double t) const override { return -2.0 * scale_->eps_dot(t) / eps(t); }

    bool singular_at_zero() const override { return base_->singular(); }
    bool time_independent() const override { return scale_->constant(); }
    double length_scale(double t) const override { return eps(t); }

    /// \int_0^inf s mu_t(s) ds, the same for every t.
    double first_moment() const { return base_->first_moment(); }

private:
    static double finite(double v, double t, double s) {
        if (!std::isfinite(v)) throw DomainError("kernel value not finite at " + point_label(t, s));
        return v;
    }

    std::shared_ptr<const BaseProfile> base_;
    std::shared_ptr<const TimeScale> scale_;
};

inline KernelPtr rescaled_exponential(std::shared_ptr<const TimeScale> scale) {
    return std::make_shared<RescaledKernel>(std::make_shared<ExponentialProfile>(), std::move(scale));
}

}  // namespace viscomem::kernels
