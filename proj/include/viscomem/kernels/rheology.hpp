#pragma once

// Constitutive layer of the aging standard linear solid: the two equivalent
// stress laws and the diagnostics that track k_t collapsing onto a point
// mass as the Maxwell spring stiffens.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "viscomem/kernels/rheological.hpp"

namespace viscomem::kernels {

struct DeltaLimit {
    double t = 0.0;
    double nu = 0.0;
    double I1 = 0.0;      // \int_t^inf k_t
    double log_I1 = 0.0;  // I1 underflows for moderate t; compare on the log scale
    double I2 = 0.0;      // \int_nu^t k_t
    double Q = 0.0;       // K0(t) exp(-H(t) / gamma)
    double log_Q = 0.0;
};

/// I1 via k_t(s) = K0(t)/rho e^{-H(t)/gamma} e^{H(t-s)/gamma}:
///   I1 = K0(t)/rho e^{-H(t)/gamma} \int_{-inf}^0 e^{H(y)/gamma} dy.
inline DeltaLimit delta_limit_diagnostics(const RheologicalKernel& k, double nu, double t,
                                          double rel_tol = 1e-10) {
    if (nu < 0.0) throw ArgumentError("delta-limit lag nu must be nonnegative");
    if (t < nu) throw ArgumentError("delta-limit diagnostics need t >= nu");
    const Stiffness& K0 = k.stiffness();
    const double g = k.gamma();
    quad::Options opt;
    opt.rel_tol = rel_tol;

    DeltaLimit d;
    d.t = t;
    d.nu = nu;
    const double past =
        quad::integral([&](double y) { return std::exp(K0.H(y) / g); },
                       -std::numeric_limits<double>::infinity(), 0.0, opt);
    d.log_Q = std::log(K0.K0(t)) - K0.H(t) / g;
    d.Q = std::exp(d.log_Q);
    d.log_I1 = d.log_Q - std::log(k.rho()) + std::log(past);
    d.I1 = std::exp(d.log_I1);

    if (t > nu) {
        // Split at a few decay lengths: the integrand drops like e^{-K0(t) s / gamma}.
        const double knee = std::min(t, nu + 50.0 * k.length_scale(t));
        auto f = [&](double s) { return k.tail(t, s); };
        d.I2 = quad::integral(f, nu, knee, opt);
        if (knee < t) d.I2 += quad::integral(f, knee, t, opt);
    }
    return d;
}

/// Uniaxial strain history. Zero before its start t0 (which may be -inf),
/// possibly jumping at t0. Either a closed-form pair (value, derivative) or
/// samples with derivatives, interpolated by cubic Hermite.
class StrainHistory {
public:
    using Fn = std::function<double(double)>;

    StrainHistory(Fn value, Fn derivative, double t0 = -std::numeric_limits<double>::infinity())
        : value_(std::move(value)), deriv_(std::move(derivative)), t0_(t0) {}

    StrainHistory(std::vector<double> times, std::vector<double> values, std::vector<double> derivs)
        : times_(std::move(times)), values_(std::move(values)), derivs_(std::move(derivs)) {
        if (times_.size() != values_.size() || times_.size() != derivs_.size())
            throw ArgumentError("strain samples and derivative samples differ in length");
        if (times_.size() < 2) throw ArgumentError("sampled strain needs at least two samples");
        for (std::size_t i = 1; i < times_.size(); ++i)
            if (!(times_[i] > times_[i - 1])) throw ArgumentError("strain sample times must increase");
        t0_ = times_.front();
    }

    double start() const { return t0_; }
    bool sampled() const { return !times_.empty(); }
    const std::vector<double>& times() const { return times_; }

    double value(double t) const {
        if (t < t0_) return 0.0;
        if (!sampled()) return value_(t);
        return hermite(t, false);
    }

    double derivative(double t) const {
        if (t < t0_) return 0.0;
        if (!sampled()) return deriv_(t);
        return hermite(t, true);
    }

private:
    double hermite(double t, bool deriv) const {
        if (t >= times_.back()) {
            // Held at the last sample beyond the recorded window.
            return deriv ? 0.0 : values_.back();
        }
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
        const double h = times_[i + 1] - times_[i];
        const double u = (t - times_[i]) / h;
        const double y0 = values_[i], y1 = values_[i + 1];
        const double m0 = derivs_[i] * h, m1 = derivs_[i + 1] * h;
        if (!deriv) {
            const double u2 = u * u, u3 = u2 * u;
            return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * y1 +
                   (u3 - u2) * m1;
        }
        const double u2 = u * u;
        return ((6 * u2 - 6 * u) * y0 + (3 * u2 - 4 * u + 1) * m0 + (-6 * u2 + 6 * u) * y1 +
                (3 * u2 - 2 * u) * m1) /
               h;
    }

    Fn value_, deriv_;
    std::vector<double> times_, values_, derivs_;
    double t0_ = -std::numeric_limits<double>::infinity();
};

struct StressResponse {
    std::vector<double> t;
    std::vector<double> sigma1;  // spring-plus-Maxwell form, integrates the strain
    std::vector<double> sigma2;  // relaxation form, integrates the strain rate
};

namespace detail {

// \int_0^L f(s) ds with breakpoints at lags where the sampled strain has nodes.
template <class F>
double lag_integral(F&& f, double t, double L, const StrainHistory& strain, double scale,
                    double rel_tol) {
    if (L <= 0.0) return 0.0;
    quad::Options opt;
    opt.rel_tol = rel_tol;
    if (!strain.sampled()) {
        const double knee = std::min(L, 40.0 * scale);
        double v = quad::integral(f, 0.0, knee, opt);
        if (knee < L) v += quad::integral(f, knee, L, opt);
        return v;
    }
    // Sampled strain: integrate node to node (Hermite pieces are smooth inside).
    using GL = boost::math::quadrature::gauss<double, 20>;
    const auto& ts = strain.times();
    std::vector<double> cuts{0.0};
    for (auto it = ts.rbegin(); it != ts.rend(); ++it) {
        const double lag = t - *it;
        if (lag > 0.0 && lag < L) cuts.push_back(lag);
    }
    cuts.push_back(L);
    std::sort(cuts.begin(), cuts.end());
    double v = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] > cuts[i]) v += GL::integrate(f, cuts[i], cuts[i + 1]);
    return v;
}

}  // namespace detail

/// Stress along t_grid from both constitutive forms:
///   sigma1 = (K0 + K) e(t) - K0(t)/gamma \int_0^inf D(t,s) K0(t-s) e(t-s) ds
///   sigma2 = K e(t) + K0(t) [\int_0^inf D(t,s) e'(t-s) ds + D(t, t-t0) e(t0+)]
/// with D(t,s) = exp(-(H(t) - H(t-s))/gamma). The last term in sigma2 is the
/// strain jump at its start t0, absent when t0 = -inf.
inline StressResponse stress_response(const RheologicalKernel& k, const StrainHistory& strain,
                                      const std::vector<double>& t_grid, double rel_tol = 1e-11) {
    const Stiffness& K0 = k.stiffness();
    const double g = k.gamma();
    const double Kl = k.k_lone();
    StressResponse out;
    for (double t : t_grid) {
        const double L = t - strain.start();  // may be inf
        const double e = strain.value(t);
        const double kt = K0.K0(t);
        const double scale = k.length_scale(t);
        double s1 = (kt + Kl) * e;
        double s2 = Kl * e;
        if (L > 0.0) {
            const double i1 = detail::lag_integral(
                [&](double s) { return k.decay(t, s) * K0.K0(t - s) * strain.value(t - s); }, t, L,
                strain, scale, rel_tol);
            const double i2 = detail::lag_integral(
                [&](double s) { return k.decay(t, s) * strain.derivative(t - s); }, t, L, strain,
                scale, rel_tol);
            s1 -= kt / g * i1;
            s2 += kt * i2;
        }
        if (L >= 0.0 && std::isfinite(L)) s2 += kt * k.decay(t, L) * strain.value(strain.start());
        out.t.push_back(t);
        out.sigma1.push_back(s1);
        out.sigma2.push_back(s2);
    }
    return out;
}

}  // namespace viscomem::kernels
