#include <doctest.h>

#include <cmath>
#include <random>

#include "bandode/flow.hpp"
#include "fixtures.hpp"

using namespace bandode;
using fixtures::kPi;

TEST_CASE("free motion integrates exactly") {
    Field zero = fixtures::constant_field(0.0, 1.0);
    Trajectory traj = integrate(zero, 0.0, 1.0, 2.0, 1.0, 1.0 / 1024);
    CHECK(traj.samples.back().u == 3.0);
    CHECK(traj.samples.back().v == 2.0);
    CHECK(traj.samples.back().t == 1.0);
}

TEST_CASE("u'' = u against sinh/cosh") {
    // -u'' = -u, start (0, 1): u = sinh t.
    Field f;
    f.period = 1.0;
    f.rhs = [](double, double u, double) { return -u; };
    f.conservative = true;
    f.autonomous = true;
    Trajectory traj = integrate(f, 0.0, 0.0, 1.0, 1.0, 1e-3);
    CHECK(std::fabs(traj.samples.back().u - std::sinh(1.0)) < 1e-9);
    CHECK(std::fabs(traj.samples.back().v - std::cosh(1.0)) < 1e-9);
}

TEST_CASE("u'' = -u over a half period") {
    Field f;
    f.period = 2 * kPi;
    f.rhs = [](double, double u, double) { return u; };
    f.conservative = true;
    f.autonomous = true;
    Trajectory traj = integrate(f, 0.0, 1.0, 0.0, kPi, 1e-3);
    CHECK(std::fabs(traj.samples.back().u + 1.0) < 1e-8);
    CHECK(std::fabs(traj.samples.back().v) < 1e-8);

    // interpolation contract on the samples
    for (double t : {0.123, 1.01, 2.5}) {
        CHECK(traj.u_at(t) == doctest::Approx(std::cos(t)).epsilon(1e-9));
        CHECK(traj.v_at(t) == doctest::Approx(-std::sin(t)).epsilon(1e-6));
    }
}

TEST_CASE("order-4 convergence under step halving") {
    Field f;
    f.period = 2 * kPi;
    f.rhs = [](double, double u, double) { return u; };  // u = cos t
    auto endpoint_error = [&f](double h) {
        Endpoint e = integrate_endpoint(f, 0.0, 1.0, 0.0, kPi, h);
        return std::fabs(e.u + 1.0) + std::fabs(e.v);
    };
    double e1 = endpoint_error(kPi / 128);
    double e2 = endpoint_error(kPi / 256);
    double factor = e1 / e2;
    CHECK(factor >= 12.0);
    CHECK(factor <= 20.0);
}

TEST_CASE("reverse_field flips damping and time") {
    Field pend = fixtures::pendulum(0.2, 1.0, 2 * kPi);
    Field rev = reverse_field(pend);
    CHECK(rev.rhs(0.3, 1.0, 2.0) ==
          doctest::Approx(-0.2 * 2.0 + std::sin(1.0)).epsilon(1e-14));

    Field cons = fixtures::pendulum_conservative(0.1, 1.0);
    Field cons_rev = reverse_field(cons);
    std::mt19937 rng(11u);
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    for (int i = 0; i < 100; ++i) {
        double t = d(rng), u = d(rng), v = d(rng);
        CHECK(cons_rev.rhs(t, u, v) == cons.rhs(t, u, v));  // conservative: unchanged
    }

    Field twice = reverse_field(reverse_field(pend));
    for (int i = 0; i < 100; ++i) {
        double t = d(rng), u = d(rng), v = d(rng);
        CHECK(twice.rhs(t, u, v) == pend.rhs(t, u, v));  // exact double reversal
    }
}

TEST_CASE("reversal identity for trajectories") {
    Field pend = fixtures::pendulum(0.2, 1.0, 2 * kPi);
    double u0 = 2.0, v0 = 0.4, T = 2 * kPi;
    Trajectory fwd = integrate(pend, 0.0, u0, v0, T, T / 2048);
    // w(t) = u(-t) solves the reversed equation with w(-T) = u(T).
    Field rev = reverse_field(pend);
    Trajectory back = integrate(rev, -T, fwd.samples.back().u, -fwd.samples.back().v, 0.0,
                                T / 2048);
    CHECK(std::fabs(back.samples.back().u - u0) < 1e-8);
    CHECK(std::fabs(back.samples.back().v + v0) < 1e-8);
}

TEST_CASE("poincare of free motion") {
    Field zero = fixtures::constant_field(0.0, 3.0);
    PoincareResult pr = poincare(zero, 0.7, -0.2, 3.0 / 2048);
    CHECK(pr.end_state[0] == doctest::Approx(0.7 - 0.2 * 3.0).epsilon(1e-12));
    CHECK(pr.end_state[1] == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(std::fabs(pr.jacobian[0][0] - 1.0) < 1e-9);
    CHECK(std::fabs(pr.jacobian[0][1] - 3.0) < 1e-9);
    CHECK(std::fabs(pr.jacobian[1][0]) < 1e-9);
    CHECK(std::fabs(pr.jacobian[1][1] - 1.0) < 1e-9);
}

TEST_CASE("poincare at the pendulum saddle") {
    Field pend = fixtures::pendulum(0.2, 1.0, 2 * kPi);
    PoincareResult pr = poincare(pend, kPi, 0.0, 2 * kPi / 2048);
    CHECK(std::fabs(pr.end_state[0] - kPi) < 1e-8);
    CHECK(std::fabs(pr.end_state[1]) < 1e-8);

    auto mu = eigenvalues_2x2(pr.jacobian);
    double big = std::max(std::abs(mu[0]), std::abs(mu[1]));
    double small = std::min(std::abs(mu[0]), std::abs(mu[1]));
    double expect_big = std::exp(2 * kPi * fixtures::lambda_plus(0.2, 1.0));
    double expect_small = std::exp(2 * kPi * fixtures::lambda_minus(0.2, 1.0));
    CHECK(std::fabs(big - expect_big) / expect_big < 1e-3);
    CHECK(std::fabs(small - expect_small) / expect_small < 1e-3);
}

TEST_CASE("poincare jacobian via finite differences matches the variational route") {
    Field with = fixtures::pendulum(0.2, 1.0, 2 * kPi);
    Field without = with;
    without.f_u.reset();
    without.f_v.reset();
    PoincareResult a = poincare(with, 2.1, 0.3, 2 * kPi / 2048);
    PoincareResult b = poincare(without, 2.1, 0.3, 2 * kPi / 2048);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(a.jacobian[i][j] == doctest::Approx(b.jacobian[i][j]).epsilon(1e-5));
}

TEST_CASE("blow-up guard fires") {
    Field cubic;
    cubic.period = 1.0;
    cubic.rhs = [](double, double u, double) { return -u * u * u; };  // u'' = u^3
    CHECK_THROWS_AS(integrate(cubic, 0.0, 2.0, 0.0, 20.0, 1e-3), BlowupError);
}
