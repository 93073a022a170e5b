#include <doctest.h>

#include <cmath>

#include "bandode/dirichlet.hpp"
#include "fixtures.hpp"

using namespace bandode;
using fixtures::kPi;

namespace {

Band wide_band(double lo, double hi, double T) {
    return Band::make(Curve::constant(lo, T), Curve::constant(hi, T));
}

}  // namespace

TEST_CASE("free field: constant boundary data has the constant solution") {
    Field zero = fixtures::constant_field(0.0, 1.0);
    DirichletSpec spec{0.0, 1.0, 0.7, 0.7, wide_band(-5.0, 5.0, 1.0)};
    SolutionSet set = shoot_all(zero, spec, -2.0, 2.0, {});
    REQUIRE(set.solutions.size() == 1);
    CHECK(std::fabs(set.v0[0]) < 1e-10);
    for (const auto& s : set.solutions[0].samples) CHECK(std::fabs(s.u - 0.7) < 1e-10);
}

TEST_CASE("u'' = u shooting recovers 1/sinh(1)") {
    Field f;
    f.period = 1.0;
    f.rhs = [](double, double u, double) { return -u; };
    f.f_u = [](double, double, double) { return -1.0; };
    f.f_v = [](double, double, double) { return 0.0; };
    DirichletSpec spec{0.0, 1.0, 0.0, 1.0, wide_band(-10.0, 10.0, 1.0)};
    SolutionSet set = shoot_all(f, spec, -5.0, 5.0, {});
    REQUIRE(set.solutions.size() == 1);
    CHECK(std::fabs(set.v0[0] - 1.0 / std::sinh(1.0)) < 1e-8);
}

TEST_CASE("restriction of the extremal solution stays extremal") {
    SUBCASE("constant solution") {
        Field zero = fixtures::constant_field(0.0, 1.0);
        DirichletSpec spec{0.0, 1.0, 0.3, 0.3, wide_band(-5.0, 5.0, 1.0)};
        SolutionSet set = shoot_all(zero, spec, -2.0, 2.0, {});
        RestrictionVerdict rv = restriction_check(zero, set, spec, 0.25, 0.75, -2.0, 2.0, {});
        CHECK(rv.pass);
    }
    SUBCASE("u'' = u fixture on [0.25, 0.75]") {
        Field f;
        f.period = 1.0;
        f.rhs = [](double, double u, double) { return -u; };
        DirichletSpec spec{0.0, 1.0, 0.0, 1.0, wide_band(-10.0, 10.0, 1.0)};
        SolutionSet set = shoot_all(f, spec, -5.0, 5.0, {});
        RestrictionVerdict rv = restriction_check(f, set, spec, 0.25, 0.75, -5.0, 5.0, {});
        CHECK(rv.pass);
        CHECK(rv.sup_diff_max < 1e-7);
    }
}

TEST_CASE("conservative pendulum return arcs rise and fall (sweep oracle)") {
    double a = 0.1, T = 1.0, u0 = 2.0;
    Field pend = fixtures::pendulum_conservative(a, T);
    DirichletSpec spec{0.0, T, u0, u0, wide_band(0.0, kPi, T)};
    SolutionSet set = shoot_all(pend, spec, -3.0, 3.0, {});
    REQUIRE(!set.empty());
    for (std::size_t i = 0; i < set.solutions.size(); ++i) {
        CHECK(set.v0[i] > 0.0);  // rising
        CHECK(set.solutions[i].samples.back().v < set.v0[i]);  // returning slower
        CHECK(set.v0[i] - set.solutions[i].samples.back().v > 0.0);
    }

    // Independent brute-force sweep (10^4 velocities, local stepper) must
    // agree on the in-band root set.
    auto arcs = fixtures::return_sweep_oracle(
        [a](double t, double u, double v) { return pend.rhs(t, u, v); }, T, u0, 0.0, kPi,
        -3.0, 3.0, 10000);
    std::vector<double> oracle_roots;
    for (const auto& arc : arcs)
        if (arc.in_band) oracle_roots.push_back(arc.v0);
    REQUIRE(oracle_roots.size() == set.v0.size());
    for (std::size_t i = 0; i < oracle_roots.size(); ++i)
        CHECK(std::fabs(oracle_roots[i] - set.v0[i]) < 1e-6);
}

TEST_CASE("maximal solution is monotone in the boundary data") {
    double a = 0.1, T = 1.0;
    Field pend = fixtures::pendulum_conservative(a, T);
    Band band = wide_band(0.0, kPi, T);
    DirichletSpec spec{0.0, T, 2.0, 2.0, band};
    SolutionSet base = shoot_all(pend, spec, -3.0, 3.0, {});
    REQUIRE(!base.empty());
    DirichletSpec raised = spec;
    raised.yb = 2.01;
    SolutionSet up = shoot_all(pend, raised, -3.0, 3.0, {});
    REQUIRE(!up.empty());
    const Trajectory& y0 = base.solutions[static_cast<std::size_t>(base.extremal_max)];
    const Trajectory& y1 = up.solutions[static_cast<std::size_t>(up.extremal_max)];
    for (std::size_t i = 0; i < y0.samples.size(); ++i)
        CHECK(y1.samples[i].u >= y0.samples[i].u - 1e-7);
}

TEST_CASE("extremal domination holds at every mesh node") {
    double a = 0.1, T = 1.0;
    Field pend = fixtures::pendulum_conservative(a, T);
    DirichletSpec spec{0.0, T, 2.0, 2.0, wide_band(0.0, kPi, T)};
    SolutionSet set = shoot_all(pend, spec, -3.0, 3.0, {});
    REQUIRE(!set.empty());
    CHECK(set.dominance_ok);
    const auto& smax = set.solutions[static_cast<std::size_t>(set.extremal_max)].samples;
    const auto& smin = set.solutions[static_cast<std::size_t>(set.extremal_min)].samples;
    for (const auto& sol : set.solutions)
        for (std::size_t i = 0; i < sol.samples.size(); ++i) {
            CHECK(smax[i].u >= sol.samples[i].u - 1e-7);
            CHECK(smin[i].u <= sol.samples[i].u + 1e-7);
        }
}

TEST_CASE("bracket and precondition errors") {
    Field zero = fixtures::constant_field(0.0, 1.0);
    DirichletSpec spec{0.0, 1.0, 0.0, 0.0, wide_band(-1.0, 1.0, 1.0)};
    CHECK_THROWS_AS(shoot_all(zero, spec, 2.0, -2.0, {}), std::invalid_argument);
    DirichletSpec bad = spec;
    bad.b = -1.0;
    CHECK_THROWS_AS(shoot_all(zero, bad, -2.0, 2.0, {}), std::invalid_argument);
}

TEST_CASE("out-of-band solutions are discarded") {
    // u'' = -u from y(0)=0 to y(pi/2)=2: the only solution is 2 sin t with
    // peak 2; a band capped at 1 must reject it.
    Field f;
    f.period = kPi;
    f.rhs = [](double, double u, double) { return u; };
    DirichletSpec spec{0.0, kPi / 2, 0.0, 2.0, wide_band(-1.0, 1.0, kPi)};
    SolutionSet set = shoot_all(f, spec, -5.0, 5.0, {});
    CHECK(set.empty());
}
