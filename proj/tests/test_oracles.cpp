#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "viscomem/kernels/rheological.hpp"
#include "viscomem/oracles/oracles.hpp"

using namespace viscomem;
using namespace viscomem::oracles;
using solver::Energies;
using Catch::Approx;

namespace {

kernels::KernelPtr exp_const(double eps = 1.0) {
    return kernels::rescaled_exponential(std::make_shared<kernels::ConstantScale>(eps));
}

Problem base(std::size_t n, double T) {
    Problem p;
    p.spectrum = solver::Spectrum::dirichlet(n);
    p.T = T;
    return p;
}

std::vector<double> smooth_a(std::size_t n) {
    std::vector<double> a(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) a[k] = 0.5 / std::pow(k + 1.0, 3);
    return a;
}

std::function<std::vector<double>(double)> ramp_history(std::size_t n, double amp) {
    return [n, amp](double s) {
        std::vector<double> e(n, 0.0);
        e[0] = amp * -std::expm1(-s);
        return e;
    };
}

}  // namespace

TEST_CASE("kv_solve: zero data stays zero") {
    Problem p = base(4, 1.0);
    p.nl = solver::cubic_nonlinearity();
    SolverOptions o;
    o.dt = 1e-2;
    const auto r = kv_solve(p, 0.7, std::vector<double>(4), std::vector<double>(4), o);
    for (std::size_t i = 0; i <= r.steps(); ++i)
        for (double v : r.a_at(i)) CHECK(v == 0.0);
    CHECK_THROWS_AS(kv_solve(p, -1.0, std::vector<double>(4), std::vector<double>(4), o), ArgumentError);
}

TEST_CASE("kv_solve: damped oscillator loses energy every step") {
    Problem p = base(1, 2.0);
    SolverOptions o;
    const auto r = kv_solve(p, 0.3, {1.0}, {0.5}, o);
    const auto E = r.ledger.column(&Energies::E);
    REQUIRE(E.size() == r.steps() + 1);
    for (std::size_t i = 1; i < E.size(); ++i) CHECK(E[i] < E[i - 1]);
}

TEST_CASE("kv_solve: self-refinement of the terminal state") {
    Problem p = base(2, 1.0);
    SolverOptions o;
    o.ledger = false;
    o.dt = 2e-5;
    const auto r = kv_solve(p, 0.2, {1.0, 0.1}, {0.0, 0.3}, o);
    SolverOptions fine = o;
    fine.dt = o.dt / 100;
    const auto ref = kv_solve(p, 0.2, {1.0, 0.1}, {0.0, 0.3}, fine);
    const auto a = r.a_at(r.steps()), b = ref.a_at(ref.steps());
    for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-8);
}

TEST_CASE("exp kernel oracle: trivial and initial zeta") {
    Problem p = base(3, 1.0);
    p.kernel = exp_const();
    const auto r = exp_kernel_oracle(p, std::vector<double>(3), std::vector<double>(3), nullptr, 1e-2);
    for (double z : r.zeta) CHECK(z == 0.0);
    const auto z = initial_zeta(1.0, 3, ramp_history(3, 1.0));
    CHECK(z[0] == Approx(0.5).epsilon(1e-12));
    CHECK(z[1] == 0.0);
}

TEST_CASE("exp kernel oracle rejects kernels the reduction does not cover") {
    Problem p = base(2, 1.0);
    p.kernel = kernels::rescaled_exponential(std::make_shared<kernels::ExponentialScale>(1.0, 1.0));
    CHECK_THROWS_AS(exp_kernel_oracle(p, {0, 0}, {0, 0}, nullptr, 1e-2), ArgumentError);
    p.kernel = std::make_shared<kernels::RheologicalKernel>(std::make_shared<kernels::ConstantStiffness>(1.0), 1.0,
                                                            1.0);
    CHECK_THROWS_AS(exp_kernel_oracle(p, {0, 0}, {0, 0}, nullptr, 1e-2), ArgumentError);
}

TEST_CASE("memory solver agrees with the exp kernel oracle") {
    Problem p = base(4, 1.0);
    p.kernel = exp_const();
    p.nl = solver::cubic_nonlinearity();
    const auto a0 = smooth_a(4);
    const std::vector<double> b0(4, 0.0);
    const auto eta = ramp_history(4, 0.2);
    const auto ref = exp_kernel_oracle(p, a0, b0, eta, 2.5e-4);
    SolverOptions o;
    o.ledger = false;
    const auto run = solver::solve(p, solver::modal_initial_data(p, o, a0, b0, eta), o);
    CHECK(trajectory_gap(run, ref) <= 1e-4);
}

TEST_CASE("solver-oracle gap shrinks at second order under joint refinement") {
    Problem p = base(4, 1.0);
    p.kernel = exp_const();
    p.nl = solver::cubic_nonlinearity();
    const auto a0 = smooth_a(4);
    const std::vector<double> b0(4, 0.0);
    const auto eta = ramp_history(4, 0.2);
    const auto ref = exp_kernel_oracle(p, a0, b0, eta, 1.25e-4);
    auto gap = [&](double dt, std::size_t J) {
        SolverOptions o;
        o.ledger = false;
        o.dt = dt;
        o.J = J;
        return trajectory_gap(solver::solve(p, solver::modal_initial_data(p, o, a0, b0, eta), o), ref);
    };
    const double g1 = gap(4e-3, 64), g2 = gap(2e-3, 128), g3 = gap(1e-3, 256);
    CHECK(std::log2(g1 / g2) >= 1.8);
    CHECK(std::log2(g2 / g3) >= 1.8);
}

TEST_CASE("kv limit: errors shrink along the scale sweep") {
    const std::vector<double> eps{0.5, 0.25, 0.125, 0.0625};
    std::vector<kernels::KernelPtr> fam;
    for (double e : eps) fam.push_back(exp_const(e));
    SolverOptions o;
    const std::size_t n = 6;
    const auto a0 = smooth_a(n);
    const std::vector<double> b0(n, 0.0);

    for (bool nonlinear : {false, true}) {
        Problem p = base(n, 2.0);
        if (nonlinear) p.nl = solver::cubic_nonlinearity();
        const auto rows = kv_limit_experiment(p, fam, eps, a0, b0, o);
        REQUIRE(rows.size() == eps.size());
        for (const auto& r : rows) CHECK(r.m == Approx(1.0).epsilon(1e-8));
        for (std::size_t j = 1; j < rows.size(); ++j) CHECK(rows[j].error < rows[j - 1].error);
    }
}

TEST_CASE("kv limit: degenerate and mismatched families") {
    Problem p = base(3, 0.5);
    const std::vector<double> a0{0.3, 0.1, 0.0}, b0(3, 0.0);
    SolverOptions o;
    std::vector<kernels::KernelPtr> zero{std::make_shared<kernels::ZeroKernel>(),
                                         std::make_shared<kernels::ZeroKernel>()};
    for (const auto& r : kv_limit_experiment(p, zero, {1.0, 2.0}, a0, b0, o)) CHECK(r.error == 0.0);

    auto other = std::make_shared<kernels::RheologicalKernel>(std::make_shared<kernels::ConstantStiffness>(1.0),
                                                              2.0, 1.0);
    CHECK_THROWS_AS(kv_limit_experiment(p, {exp_const(0.5), other}, {1.0, 2.0}, a0, b0, o), ArgumentError);
    CHECK_THROWS_AS(kv_limit_experiment(p, {exp_const(0.5)}, {1.0, 2.0}, a0, b0, o), ArgumentError);
}

TEST_CASE("continuous dependence") {
    Problem p = base(6, 2.0);
    p.kernel = kernels::rescaled_exponential(std::make_shared<kernels::ExponentialScale>(1.0, 0.25));
    p.nl = solver::cubic_nonlinearity();
    const auto a0 = smooth_a(6);
    const std::vector<double> b0(6, 0.0);
    const auto eta = ramp_history(6, 0.2);
    SolverOptions o;
    o.output_every = 20;

    {
        const auto z = solver::modal_initial_data(p, o, a0, b0, eta);
        const auto r = solver::solve(p, z, o);
        for (const auto& d : difference_norms(r, r)) {
            CHECK(d.H == 0.0);
            CHECK(d.Hm1 == 0.0);
            CHECK(d.Lambda == 0.0);
        }
    }
    CHECK_THROWS_AS(continuous_dependence_experiment(p, a0, b0, eta, {1e-3, 0.0}, o), ArgumentError);

    const auto rows = continuous_dependence_experiment(p, a0, b0, eta, {1e-2, 1e-3, 1e-4}, o);
    REQUIRE(rows.size() == 3);
    double lo = rows[0].sup_ratio_H, hi = lo;
    for (const auto& r : rows) {
        CHECK(std::isfinite(r.sup_ratio_H));
        CHECK(r.sup_ratio_Hm1 <= r.sup_ratio_H * 1.0 + 1e-12);
        CHECK(r.lambda_fit.ok);
        lo = std::min(lo, r.sup_ratio_H);
        hi = std::max(hi, r.sup_ratio_H);
    }
    CHECK(hi <= 1.2 * lo);
}
