#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "viscomem/kernels/rescaled.hpp"
#include "viscomem/solver/diagnostics.hpp"
#include "viscomem/solver/solve.hpp"

using namespace viscomem;
using namespace viscomem::solver;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

template <class F>
double dense(F f) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-13);
}

kernels::KernelPtr exp_const(double eps = 1.0) {
    return kernels::rescaled_exponential(std::make_shared<kernels::ConstantScale>(eps));
}

Problem wave(std::size_t n, double T) {
    Problem p;
    p.spectrum = Spectrum::dirichlet(n);
    p.T = T;
    return p;
}

std::vector<double> unit(std::size_t n, std::size_t k, double v = 1.0) {
    std::vector<double> a(n, 0.0);
    a[k] = v;
    return a;
}

// Energy-norm error against the single-mode oscillator cos(omega t).
double oscillator_error(double dt) {
    Problem p = wave(1, 1.0);
    SolverOptions o;
    o.dt = dt;
    o.ledger = false;
    const auto r = solve(p, modal_initial_data(p, o, {1.0}, {0.0}), o);
    const double w = pi, t = r.time(r.steps());
    const double da = r.a_at(r.steps())[0] - std::cos(w * t);
    const double db = r.b_at(r.steps())[0] + w * std::sin(w * t);
    return std::sqrt(w * w * da * da + db * db);
}

}  // namespace

TEST_CASE("projection of basis vectors") {
    const auto sp = Spectrum::dirichlet(6);
    const auto a = sp.project([](double x) { return basis(1, x); });
    CHECK(a[0] == Approx(1.0).epsilon(1e-13));
    for (std::size_t k = 1; k < 6; ++k) CHECK(std::abs(a[k]) < 1e-13);
    for (double c : sp.project([](double x) { return basis(7, x); })) CHECK(std::abs(c) < 1e-13);
}

TEST_CASE("projection of x(1 - x) matches the sine series") {
    const auto sp = Spectrum::dirichlet(12);
    const auto a = sp.project([](double x) { return x * (1.0 - x); });
    for (std::size_t k = 1; k <= 12; ++k) {
        // Classical coefficient 8 / (k pi)^3 of sin(k pi x); the orthonormal basis carries sqrt 2.
        const double b = k % 2 ? 8.0 / std::pow(k * pi, 3) : 0.0;
        CHECK(std::abs(a[k - 1] - b / std::numbers::sqrt2) <= 1e-10);
    }
}

TEST_CASE("collocation size guard") {
    CHECK_THROWS_AS(Spectrum::dirichlet(4, 7), ConfigError);
    CHECK_NOTHROW(Spectrum::dirichlet(4, 8));
    CHECK_THROWS_AS(Spectrum({1.0, 0.5}, 8), ConfigError);
    CHECK_THROWS_AS(Spectrum({-1.0}, 8), ConfigError);
}

TEST_CASE("modal rhs: pure wave operator") {
    Problem p = wave(5, 1.0);
    const auto acc = modal_rhs(p, nullptr, 1.0, unit(5, 0), std::vector<double>(5, 0.0));
    CHECK(acc[0] == Approx(-pi * pi).epsilon(1e-15));
    for (std::size_t k = 1; k < 5; ++k) CHECK(acc[k] == 0.0);
}

TEST_CASE("modal rhs: cubic by collocation against dense quadrature") {
    Problem p = wave(6, 1.0);
    p.nl = cubic_nonlinearity(1.0, 0.0);
    const auto acc = modal_rhs(p, nullptr, 1.0, unit(6, 0), std::vector<double>(6, 0.0));
    for (std::size_t k = 0; k < 6; ++k) {
        const double fk = dense([&](double x) { return std::pow(basis(1, x), 3) * basis(k + 1, x); });
        const double expect = -p.spectrum.lambda(k) * (k == 0 ? 1.0 : 0.0) - fk;
        CHECK(std::abs(acc[k] - expect) <= 1e-8);
    }
    CHECK(acc[0] == Approx(-pi * pi - 1.5).epsilon(1e-12));
    CHECK(acc[2] == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("modal rhs: constant history feels the kernel mass") {
    Problem p = wave(3, 1.0);
    p.kernel = exp_const(0.5);
    SolverOptions o;
    auto z = modal_initial_data(p, o, std::vector<double>(3, 0.0), std::vector<double>(3, 0.0),
                                [](double) { return std::vector<double>{1.0, 0.0, 0.0}; });
    history::HistorySnapshot h{z.grid, z.eta0, history::Trajectory(3, 0.0, 1e-3)};
    h.traj.push(z.a);
    const auto acc = modal_rhs(p, &h, z.grid.s_max(), z.a, z.b);
    CHECK(acc[0] == Approx(-pi * pi * 2.0).epsilon(1e-9));
    CHECK(acc[1] == 0.0);
}

TEST_CASE("harmonic oscillator: second order in the energy norm") {
    const double e1 = oscillator_error(1e-2), e2 = oscillator_error(5e-3), e3 = oscillator_error(2.5e-3);
    CHECK(e1 / e2 >= 3.5);
    CHECK(e1 / e2 <= 4.5);
    CHECK(e2 / e3 >= 3.5);
    CHECK(e2 / e3 <= 4.5);
    Problem p = wave(1, 1.0);
    SolverOptions o;
    const auto r = solve(p, modal_initial_data(p, o, {1.0}, {0.0}), o);
    CHECK(std::abs(r.a_at(r.steps())[0] + 1.0) <= 10.0 * o.dt * o.dt);
}

TEST_CASE("zero state stays zero") {
    Problem p = wave(6, 2.0);
    p.kernel = exp_const();
    p.nl = cubic_nonlinearity();
    SolverOptions o;
    o.dt = 1e-2;
    const auto r = solve(p, modal_initial_data(p, o, std::vector<double>(6), std::vector<double>(6)), o);
    for (std::size_t i = 0; i <= r.steps(); ++i) {
        for (double v : r.a_at(i)) CHECK(v == 0.0);
        for (double v : r.b_at(i)) CHECK(v == 0.0);
    }
    for (const auto& row : r.ledger.rows) {
        CHECK(row.e.E == 0.0);
        CHECK(row.e.calE == 0.0);
    }
}

TEST_CASE("modal truncation consistency") {
    auto run = [](std::size_t n) {
        Problem p = wave(n, 1.0);
        SolverOptions o;
        o.ledger = false;
        std::vector<double> a(n, 0.0), b(n, 0.0);
        for (std::size_t k = 0; k < 4; ++k) {
            a[k] = 1.0 / (k + 1);
            b[k] = 0.3 * k;
        }
        return solve(p, modal_initial_data(p, o, a, b), o);
    };
    const auto r4 = run(4), r8 = run(8);
    for (std::size_t i = 0; i <= r4.steps(); i += 37) {
        const auto a4 = r4.a_at(i), a8 = r8.a_at(i);
        for (std::size_t k = 0; k < 4; ++k) CHECK(a4[k] == a8[k]);
        for (std::size_t k = 4; k < 8; ++k) CHECK(a8[k] == 0.0);
    }
}

TEST_CASE("energy functionals") {
    const auto sp = Spectrum::dirichlet(4);
    const auto z = std::vector<double>(4, 0.0);
    auto e = energy_functionals(sp, cubic_nonlinearity(), {}, 1.0, z, z, {});
    CHECK(e.E == 0.0);
    CHECK(e.calE == 0.0);
    e = energy_functionals(sp, zero_nonlinearity(), {}, 1.0, unit(4, 0), z, {});
    CHECK(e.E == Approx(pi * pi).epsilon(1e-15));

    const auto nl = cubic_nonlinearity();
    e = energy_functionals(sp, nl, {}, 1.0, unit(4, 0, 0.5), z, {});
    const double ref = 2.0 * dense([&](double x) { return nl.F(0.5 * basis(1, x)); }) + pi * pi * 0.25;
    CHECK(std::abs(e.E - ref) <= 1e-8);
}

TEST_CASE("nonlinearity gate") {
    const double l1 = pi * pi;
    CHECK_THROWS_AS(require_dissipative(linear_nonlinearity(-20.0), l1), ConfigError);
    CHECK_THROWS_AS(require_dissipative(linear_nonlinearity(-l1), l1), ConfigError);
    CHECK_NOTHROW(require_dissipative(linear_nonlinearity(-5.0), l1));
    const auto c = require_dissipative(cubic_nonlinearity(), l1);
    CHECK(c.growth_C <= 3.0);
    CHECK(c.growth_C > 2.98);
    CHECK(c.liminf_ratio > 90.0);
}

TEST_CASE("step count and divergence") {
    CHECK_THROWS_AS(step_count(0.0, 0.0, 1e-3), ConfigError);
    CHECK_THROWS_AS(step_count(0.0, 1.0, 0.3), ConfigError);
    CHECK(step_count(-1.0, 2.0, 1e-3) == 3000);

    Problem p = wave(16, 20.0);
    SolverOptions o;
    o.dt = 0.05;
    REQUIRE(o.dt > stability_limit(p.spectrum, 1.0, 0.0));
    std::vector<double> a(16, 1e-3);
    try {
        solve(p, modal_initial_data(p, o, a, std::vector<double>(16)), o);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.time() > 0.0);
        CHECK(e.time() <= 20.0);
    }
}

TEST_CASE("total energy is nonincreasing without forcing") {
    auto max_rise = [](double dt) {
        Problem p = wave(6, 3.0);
        p.kernel = exp_const();
        SolverOptions o;
        o.dt = dt;
        o.output_every = static_cast<std::size_t>(std::lround(0.05 / dt));
        const auto z = modal_initial_data(p, o, {0.5, 0.2, 0.0, 0.1, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0, 0.3, 0.0});
        const auto r = solve(p, z, o);
        const auto E = r.ledger.column(&Energies::calE);
        double rise = 0.0;
        for (std::size_t i = 1; i < E.size(); ++i) rise = std::max(rise, E[i] - E[i - 1]);
        return std::pair{rise, E.front() - E.back()};
    };
    const auto [r1, drop1] = max_rise(2e-3);
    const auto [r2, drop2] = max_rise(1e-3);
    CHECK(drop1 > 0.0);
    CHECK(drop2 > 0.0);
    // Richardson: the rise must shrink like dt^2 (or vanish).
    const double C = std::max(r1, 0.0) / (2e-3 * 2e-3);
    CHECK(r2 <= C * 1e-3 * 1e-3 * 0.5 + 1e-14);
    CHECK(r2 <= 1e-3);
}

TEST_CASE("forced run from rest stays under the Gronwall envelope") {
    Problem p = wave(6, 4.0);
    p.kernel = kernels::rescaled_exponential(std::make_shared<kernels::ExponentialScale>(1.0, 0.25));
    p.nl = cubic_nonlinearity();
    p.g = {1.0, 0.0, 0.5, 0.0, 0.0, 0.0};
    SolverOptions o;
    o.output_every = 20;
    const auto r = solve(p, modal_initial_data(p, o, std::vector<double>(6), std::vector<double>(6)), o);
    const auto g = gronwall_envelope(r.ledger.times(), r.ledger.column(&Energies::H2));
    CHECK(g.ok);
    for (double v : r.ledger.column(&Energies::H2)) CHECK(std::isfinite(v));
}

TEST_CASE("refinement in modes on smooth data") {
    auto terminal = [](std::size_t n) {
        Problem p = wave(n, 1.0);
        p.kernel = exp_const();
        p.nl = cubic_nonlinearity();
        SolverOptions o;
        o.dt = 5e-4;
        o.ledger = false;
        const auto z = project_initial_data(p, o, [](double x) { return 2.0 * x * (1.0 - x); }, nullptr);
        const auto r = solve(p, z, o);
        auto a = r.a_at(r.steps());
        a.resize(16, 0.0);
        return a;
    };
    const auto a4 = terminal(4), a8 = terminal(8), a16 = terminal(16);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t k = 0; k < 16; ++k) {
        d1 += std::pow(a4[k] - a8[k], 2);
        d2 += std::pow(a8[k] - a16[k], 2);
    }
    CHECK(d2 < d1);
}

TEST_CASE("two-side control") {
    const double l1 = pi * pi;
    auto run = [](Nonlinearity nl) {
        Problem p = wave(6, 2.0);
        p.kernel = exp_const();
        p.nl = std::move(nl);
        SolverOptions o;
        o.output_every = 10;
        const auto z = project_initial_data(p, o, [](double x) { return 3.0 * std::sin(pi * x) * x; },
                                            [](double x) { return x * (1.0 - x); });
        return two_side_control_check(solve(p, z, o));
    };
    {
        const auto m = run(zero_nonlinearity());
        CHECK(m.constants.theta == 1.0);
        CHECK(m.constants.C == 0.0);
        CHECK(std::abs(m.lower) <= 1e-12);
        CHECK(m.upper >= 0.0);
    }
    {
        const auto m = run(cubic_nonlinearity(1.0, 0.0));
        CHECK(m.constants.theta == 1.0);
        CHECK(m.constants.C == 0.0);
        CHECK(m.lower >= 0.0);
        CHECK(m.upper >= 0.0);
    }
    {
        const auto m = run(cubic_nonlinearity());
        CHECK(m.constants.theta == Approx(1.0 - 1.0 / l1).epsilon(1e-6));
        CHECK(m.constants.C == 0.0);
        CHECK(m.lower >= 0.0);
        CHECK(m.upper >= 0.0);
    }
    {
        // theta from the Poincare step is not positive here: pointwise fallback.
        const auto c = two_side_constants(linear_nonlinearity(-1.5 * l1), l1, 1.0);
        CHECK(c.theta > 0.0);
        CHECK(c.C >= 0.0);
    }
}

TEST_CASE("trajectory table layout") {
    Problem p = wave(2, 0.01);
    SolverOptions o;
    const auto r = solve(p, modal_initial_data(p, o, {1.0, 0.0}, {0.0, 0.0}), o);
    const auto t = trajectory_table(r);
    CHECK(t.header == std::vector<std::string>{"t", "a1", "a2", "b1", "b2"});
    CHECK(t.rows.size() == r.outputs.size());
}
