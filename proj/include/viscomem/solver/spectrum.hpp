#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "viscomem/errors.hpp"
#include "viscomem/quadrature.hpp"

namespace viscomem::solver {

/// Dirichlet sine basis w_k(x) = sqrt(2) sin(k pi x) on (0, 1).
inline double basis(std::size_t k, double x) {
    return std::numbers::sqrt2 * std::sin(static_cast<double>(k) * std::numbers::pi * x);
}

/// Eigenvalues lambda_1 < ... < lambda_n of A plus the collocation grid
/// x_i = i / (N + 1), i = 1..N, used for nonlinear terms. With N + 1 > 2n the
/// collocation projection of a cubic of u is exact (no aliasing into the
/// first n modes).
class Spectrum {
public:
    Spectrum() = default;

    static Spectrum dirichlet(std::size_t n, std::size_t collocation = 0) {
        std::vector<double> lam(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double kk = static_cast<double>(k + 1) * std::numbers::pi;
            lam[k] = kk * kk;
        }
        return Spectrum(std::move(lam), collocation ? collocation : 4 * n);
    }

    /// Arbitrary positive increasing eigenvalues; nonlinear terms still use
    /// the sine collocation grid.
    Spectrum(std::vector<double> lambda, std::size_t collocation) : lambda_(std::move(lambda)) {
        const std::size_t n = lambda_.size();
        if (n == 0) throw ConfigError("spectrum needs at least one mode");
        for (std::size_t k = 0; k < n; ++k) {
            if (!(lambda_[k] > 0.0)) throw ConfigError("eigenvalues must be positive");
            if (k && !(lambda_[k] > lambda_[k - 1])) throw ConfigError("eigenvalues must increase");
        }
        if (collocation < 2 * n)
            throw ConfigError("collocation size " + std::to_string(collocation) +
                              " is below 2n = " + std::to_string(2 * n));
        N_ = collocation;
        S_.resize(N_ * n);
        for (std::size_t i = 0; i < N_; ++i) {
            const double x = static_cast<double>(i + 1) / static_cast<double>(N_ + 1);
            for (std::size_t k = 0; k < n; ++k) S_[i * n + k] = basis(k + 1, x);
        }
    }

    std::size_t size() const { return lambda_.size(); }
    std::size_t collocation() const { return N_; }
    const std::vector<double>& lambda() const { return lambda_; }
    double lambda(std::size_t k) const { return lambda_[k]; }

    /// u at the collocation points.
    void synthesize(const std::vector<double>& a, std::vector<double>& u) const {
        const std::size_t n = size();
        u.assign(N_, 0.0);
        for (std::size_t i = 0; i < N_; ++i) {
            const double* row = S_.data() + i * n;
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += row[k] * a[k];
            u[i] = s;
        }
    }

    /// Modal coefficients of a field sampled at the collocation points.
    void analyze(const std::vector<double>& v, std::vector<double>& out) const {
        const std::size_t n = size();
        out.assign(n, 0.0);
        const double h = 1.0 / static_cast<double>(N_ + 1);
        for (std::size_t i = 0; i < N_; ++i) {
            const double* row = S_.data() + i * n;
            for (std::size_t k = 0; k < n; ++k) out[k] += h * v[i] * row[k];
        }
    }

    /// \int_0^1 v for v vanishing at both ends (trapezoid rule on the grid).
    double integrate(const std::vector<double>& v) const {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(N_ + 1);
    }

    /// <u, w_k> by adaptive quadrature (no aliasing, unlike collocation).
    std::vector<double> project(const std::function<double(double)>& u, double rel_tol = 1e-13) const {
        std::vector<double> a(size());
        quad::Options opt;
        opt.rel_tol = rel_tol;
        opt.abs_tol = 1e-15;
        for (std::size_t k = 0; k < size(); ++k) {
            // Split at the sign changes of w_k so each piece is smooth and one-signed.
            const std::size_t pieces = k + 1;
            double acc = 0.0;
            for (std::size_t p = 0; p < pieces; ++p) {
                const double lo = static_cast<double>(p) / pieces, hi = static_cast<double>(p + 1) / pieces;
                acc += quad::integral([&](double x) { return u(x) * basis(k + 1, x); }, lo, hi, opt);
            }
            a[k] = acc;
        }
        return a;
    }

private:
    std::vector<double> lambda_;
    std::size_t N_ = 0;
    std::vector<double> S_;  // S_[i * n + k] = w_{k+1}(x_i)
};

}  // namespace viscomem::solver
