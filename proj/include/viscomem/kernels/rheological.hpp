#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "viscomem/kernels/kernel.hpp"

namespace viscomem::kernels {

/// Nondecreasing spring stiffness K0(t) with K0 -> beta as t -> -inf, and its
/// antiderivative H(t) = \int_0^t K0.
class Stiffness {
public:
    virtual ~Stiffness() = default;
    virtual std::string name() const = 0;
    virtual double K0(double t) const = 0;
    virtual double K0_dot(double t) const = 0;
    virtual double H(double t) const = 0;
    virtual double beta() const = 0;
    virtual bool constant() const { return false; }
};

class ConstantStiffness final : public Stiffness {
public:
    explicit ConstantStiffness(double beta) : beta_(beta) {
        if (!(beta > 0.0)) throw ArgumentError("stiffness beta must be positive");
    }
    std::string name() const override { return "constant"; }
    double K0(double) const override { return beta_; }
    double K0_dot(double) const override { return 0.0; }
    double H(double t) const override { return beta_ * t; }
    double beta() const override { return beta_; }
    bool constant() const override { return true; }

private:
    double beta_;
};

/// beta + alpha (1 + tanh t); H(t) = (beta + alpha) t + alpha log cosh t.
class TanhStiffness final : public Stiffness {
public:
    TanhStiffness(double beta, double alpha) : beta_(beta), alpha_(alpha) {
        if (!(beta > 0.0) || alpha < 0.0) throw ArgumentError("tanh stiffness needs beta > 0, alpha >= 0");
    }
    std::string name() const override { return "tanh"; }
    double K0(double t) const override { return beta_ + alpha_ * (1.0 + std::tanh(t)); }
    double K0_dot(double t) const override {
        const double c = std::cosh(t);
        return std::isfinite(c) ? alpha_ / (c * c) : 0.0;
    }
    double H(double t) const override {
        const double a = std::abs(t);
        const double logcosh = a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
        return (beta_ + alpha_) * t + alpha_ * logcosh;
    }
    double beta() const override { return beta_; }

private:
    double beta_, alpha_;
};

/// beta (1 + log(1 + e^t)). H has no elementary form; it is tabulated on
/// [lo, hi] and evaluated by cubic Hermite interpolation (H' = K0 exactly at
/// the nodes). Below lo, K0 = beta to roundoff and H is extended linearly.
class SoftplusStiffness final : public Stiffness {
public:
    explicit SoftplusStiffness(double beta, double lo = -60.0, double hi = 100.0, double step = 0.01)
        : beta_(beta), lo_(lo), h_(step) {
        if (!(beta > 0.0)) throw ArgumentError("stiffness beta must be positive");
        if (!(hi > lo) || !(step > 0.0)) throw ArgumentError("bad H table range");
        const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step));
        hi_ = lo_ + static_cast<double>(n) * h_;
        table_.resize(n + 1);
        // Panelwise accumulation from lo, then shift so that H(0) = 0.
        using GL = boost::math::quadrature::gauss<double, 10>;
        auto k0 = [this](double y) { return K0(y); };
        double acc = 0.0;
        table_[0] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = lo_ + static_cast<double>(i) * h_;
            acc += GL::integrate(k0, a, a + h_);
            table_[i + 1] = acc;
        }
        if (lo_ < 0.0 && hi_ > 0.0) {
            const double shift = H(0.0);
            for (double& v : table_) v -= shift;
        }
    }

    std::string name() const override { return "softplus"; }

    double K0(double t) const override { return beta_ * (1.0 + softplus(t)); }
    double K0_dot(double t) const override { return beta_ / (1.0 + std::exp(-t)); }
    double beta() const override { return beta_; }

    double H(double t) const override {
        if (t <= lo_) return table_[0] + beta_ * (t - lo_);
        if (t > hi_) {
            std::ostringstream os;
            os.precision(17);
            os << "H table covers t <= " << hi_ << ", asked for t = " << t;
            throw DomainError(os.str());
        }
        const double x = (t - lo_) / h_;
        auto i = static_cast<std::size_t>(x);
        if (i >= table_.size() - 1) i = table_.size() - 2;
        const double a = lo_ + static_cast<double>(i) * h_;
        const double u = (t - a) / h_;
        const double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * table_[i] + (u3 - 2 * u2 + u) * h_ * K0(a) +
               (-2 * u3 + 3 * u2) * table_[i + 1] + (u3 - u2) * h_ * K0(a + h_);
    }

    double table_hi() const { return hi_; }

private:
    static double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

    double beta_, lo_, hi_ = 0.0, h_;
    std::vector<double> table_;
};

/// Maxwell element with aging spring K0(t) and dashpot gamma, in parallel
/// with a lone spring K; density rho.
///   mu_t(s) = (rho gamma)^{-1} K0(t) K0(t-s) exp(-(H(t) - H(t-s)) / gamma)
///   k_t(s)  = rho^{-1} K0(t) exp(-(H(t) - H(t-s)) / gamma)
class RheologicalKernel final : public MemoryKernel {
public:
    RheologicalKernel(std::shared_ptr<const Stiffness> k0, double gamma, double rho, double k_lone = 0.0)
        : k0_(std::move(k0)), gamma_(gamma), rho_(rho), k_lone_(k_lone) {
        if (!k0_) throw ArgumentError("rheological kernel needs a stiffness profile");
        if (!(gamma > 0.0) || !(rho > 0.0) || k_lone < 0.0)
            throw ArgumentError("rheological kernel needs gamma > 0, rho > 0, K >= 0");
    }

    std::string name() const override { return "rheological/" + k0_->name(); }

    const Stiffness& stiffness() const { return *k0_; }
    double gamma() const { return gamma_; }
    double rho() const { return rho_; }
    double k_lone() const { return k_lone_; }
    double k_inf() const { return k_lone_ / rho_; }

    /// exp(-(H(t) - H(t-s)) / gamma)
    double decay(double t, double s) const {
        if (s <= 0.0) return 1.0;
        return std::exp(-(k0_->H(t) - k0_->H(t - s)) / gamma_);
    }

    double mu(double t, double s) const override {
        return check(k0_->K0(t) * k0_->K0(t - s) * decay(t, s) / (rho_ * gamma_), t, s);
    }

    double mu_s(double t, double s) const override {
        const double kp = k0_->K0(t - s);
        return check(k0_->K0(t) / (rho_ * gamma_) * (-k0_->K0_dot(t - s) - kp * kp / gamma_) *
                         decay(t, s),
                     t, s);
    }

    double mu_dot(double t, double s) const override {
        const double kt = k0_->K0(t), kp = k0_->K0(t - s);
        const double bracket = k0_->K0_dot(t) * kp + kt * k0_->K0_dot(t - s) -
                               kt * kt * kp / gamma_ + kt * kp * kp / gamma_;
        return check(bracket * decay(t, s) / (rho_ * gamma_), t, s);
    }

    double kappa(double t) const override { return k0_->K0(t) / rho_; }

    double tail(double t, double s) const override {
        if (!std::isfinite(s)) return 0.0;
        return k0_->K0(t) / rho_ * decay(t, s);
    }

    CellMoments moments(double t, double lo, double hi) const override {
        if (!std::isfinite(hi)) return {tail(t, lo), 0.0, 0.0};
        if (hi <= lo) return {};
        if (k0_->constant()) {
            // Plain exponential (beta^2 / rho gamma) e^{-beta s / gamma}.
            const double rate = k0_->beta() / gamma_;
            const auto phi = quad::exponential_moments(rate * (hi - lo));
            const double scale = tail(t, lo) * rate * (hi - lo);
            return {scale * phi[0], scale * phi[1], scale * phi[2]};
        }
        CellMoments m = quadrature_moments(t, lo, hi);
        m.m0 = tail(t, lo) - tail(t, hi);
        return m;
    }

    double domination(double tau, double t) const override {
        const double kt = k0_->K0(t);
        return kt * kt / (k0_->beta() * k0_->K0(tau));
    }

    double growth(double t) const override { return k0_->K0_dot(t) / k0_->K0(t); }

    bool time_independent() const override { return k0_->constant(); }
    double length_scale(double t) const override { return gamma_ / k0_->K0(t); }

private:
    static double check(double v, double t, double s) {
        if (!std::isfinite(v)) throw DomainError("kernel value not finite at " + point_label(t, s));
        return v;
    }

    std::shared_ptr<const Stiffness> k0_;
    double gamma_, rho_, k_lone_;
};

}  // namespace viscomem::kernels
