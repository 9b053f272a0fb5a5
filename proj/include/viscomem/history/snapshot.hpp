#pragma once

#include <cmath>
#include <vector>

#include "viscomem/history/sgrid.hpp"

namespace viscomem::history {

/// Modal displacements a(t_i) at t_i = tau + i dt, i = 0..steps.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::size_t modes, double tau, double dt) : n_(modes), tau_(tau), dt_(dt) {
        if (modes == 0) throw ArgumentError("trajectory needs at least one mode");
        if (!(dt > 0.0)) throw ArgumentError("trajectory step must be positive");
    }

    std::size_t modes() const { return n_; }
    double tau() const { return tau_; }
    double dt() const { return dt_; }
    std::size_t count() const { return n_ ? data_.size() / n_ : 0; }
    bool empty() const { return data_.empty(); }
    double time(std::size_t i) const { return tau_ + static_cast<double>(i) * dt_; }
    double t_now() const {
        if (empty()) throw StateError("trajectory is empty");
        return time(count() - 1);
    }
    const double* at(std::size_t i) const { return data_.data() + i * n_; }

    void push(const std::vector<double>& a) {
        if (a.size() != n_) throw ArgumentError("trajectory push: wrong number of modes");
        data_.insert(data_.end(), a.begin(), a.end());
    }

    /// u(t) by linear interpolation between recorded steps.
    void value(double t, double* out) const {
        const double slack = 1e-9 * dt_;
        if (empty() || t < tau_ - slack || t > t_now() + slack)
            throw StateError("time " + std::to_string(t) + " outside the recorded trajectory");
        double x = (t - tau_) / dt_;
        auto i = static_cast<std::size_t>(std::max(0.0, std::floor(x)));
        if (i + 1 >= count()) {
            i = count() - 1;
            x = static_cast<double>(i);
        }
        const double w = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
        const double* lo = at(i);
        if (w == 0.0) {
            std::copy(lo, lo + n_, out);
            return;
        }
        const double* hi = at(i + 1);
        for (std::size_t k = 0; k < n_; ++k) out[k] = lo[k] + w * (hi[k] - lo[k]);
    }

private:
    std::size_t n_ = 0;
    double tau_ = 0.0, dt_ = 1.0;
    std::vector<double> data_;
};

/// The history component eta^t, never stored: it is rebuilt from the initial
/// history eta_tau (node samples on the lag grid) and the trajectory by
///   eta^t(s) = u(t) - u(t-s)                       for s <= t - tau
///   eta^t(s) = eta_tau(s - t + tau) + u(t) - u(tau)  for s >  t - tau.
struct HistorySnapshot {
    SGrid grid;
    std::vector<double> eta0;  // node-major: eta0[j * n + k]
    Trajectory traj;

    std::size_t modes() const { return traj.modes(); }
    double tau() const { return traj.tau(); }
    double t_now() const { return traj.t_now(); }

    double eta_tau(double r, std::size_t k) const {
        return grid.interpolate(eta0.data() + k, modes(), r);
    }
};

/// eta^t(s), all modes.
inline std::vector<double> eta_eval(const HistorySnapshot& h, double t, double s) {
    if (!(s > 0.0)) throw ArgumentError("memory lag must be positive");
    if (t < h.tau()) throw StateError("history queried before its origin time");
    const std::size_t n = h.modes();
    std::vector<double> ut(n), out(n);
    h.traj.value(t, ut.data());
    const double D = t - h.tau();
    if (s <= D) {
        std::vector<double> past(n);
        h.traj.value(t - s, past.data());
        for (std::size_t k = 0; k < n; ++k) out[k] = ut[k] - past[k];
    } else {
        const double* u0 = h.traj.at(0);
        for (std::size_t k = 0; k < n; ++k) out[k] = h.eta_tau(s - D, k) + (ut[k] - u0[k]);
    }
    return out;
}

}  // namespace viscomem::history
