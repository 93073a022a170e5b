#include <doctest.h>

#include <cmath>

#include "bandode/banddyn.hpp"
#include "fixtures.hpp"

using namespace bandode;
using fixtures::kPi;

namespace {

PeriodicOrbit equilibrium_orbit(const Field& field, double u_eq, double h) {
    PeriodicOrbit orb;
    orb.u0 = u_eq;
    orb.v0 = 0.0;
    orb.orbit = integrate(field, 0.0, u_eq, 0.0, field.period, h);
    orb.closure_residual = std::fabs(orb.orbit.samples.back().u - u_eq) +
                           std::fabs(orb.orbit.samples.back().v);
    orb.floquet = eigenvalues_2x2(poincare(field, u_eq, 0.0, h).jacobian);
    return orb;
}

}  // namespace

TEST_CASE("conservative pendulum [0, pi]: beta receives") {
    Field pend = fixtures::pendulum_conservative(0.1, 1.0);
    PeriodicOrbit zero = equilibrium_orbit(pend, 0.0, 1.0 / 2048);
    PeriodicOrbit top = equilibrium_orbit(pend, kPi, 1.0 / 2048);

    BandDynOptions opts;
    opts.v_bound = 3.9;
    ClassifyResult cr = classify_neighboring(pend, zero, top, {}, 9, opts);
    CHECK(cr.verdict == ClassifyVerdict::BetaReceives);
    REQUIRE(cr.families.size() == 4);
    for (const auto& fam : cr.families) {
        CHECK(fam.sign == FamilySign::AllPositive);
        for (const auto& entry : fam.entries) {
            REQUIRE(!entry.solutions.empty());
            for (const auto& rs : entry.solutions) CHECK(rs.gap > 0.0);
        }
    }

    // replay: every positive-gap return solution extends to a corner lower
    // barrier, i.e. verify_lower passes on its periodic extension
    Band band = Band::make(curve_from_orbit(zero, pend), curve_from_orbit(top, pend));
    for (const auto& entry : cr.families[0].entries) {
        DirichletSpec spec{0.0, 1.0, entry.u0, entry.u0, band};
        ShootOptions so;
        so.require_extremal_domination = false;
        SolutionSet set = shoot_all(pend, spec, -3.9, 3.9, so);
        for (const auto& sol : set.solutions) {
            Curve ext = Curve::from_trajectory(sol, pend);
            CHECK(verify_lower(ext, pend).pass);
        }
    }
}

TEST_CASE("damped pendulum [0, pi]: beta receives and the witness converges") {
    Field pend = fixtures::pendulum(0.2, 1.0, 2 * kPi);
    PeriodicOrbit zero = equilibrium_orbit(pend, 0.0, 2 * kPi / 2048);
    PeriodicOrbit top = equilibrium_orbit(pend, kPi, 2 * kPi / 2048);

    BandDynOptions opts;
    opts.v_bound = 3.3;
    ClassifyResult cr = classify_neighboring(pend, zero, top, {}, 9, opts);
    CHECK(cr.verdict == ClassifyVerdict::BetaReceives);

    AsymptoticOptions ao;
    ao.horizon = 8;
    ao.v_bound = 3.3;
    AsymptoticRun witness = corollary2_witness(pend, zero, top, cr.verdict, ao);
    CHECK(witness.converged);
    CHECK(std::fabs(witness.limit.samples.back().u - kPi) < 1e-3);

    // Corollary-2 restated: the receiving endpoint is unstable-certified.
    StabilityVerdict sv = stability_verdict(pend, top, {&witness}, {});
    CHECK(sv.tag == StabilityTag::UnstableCertified);
}

TEST_CASE("linear drift: constants in between make the band non-neighboring") {
    Field drift = fixtures::linear_drift(1.0);
    PeriodicOrbit lo = equilibrium_orbit(drift, 0.0, 1.0 / 2048);
    PeriodicOrbit hi = equilibrium_orbit(drift, 1.0, 1.0 / 2048);
    BandDynOptions opts;
    opts.v_bound = 2.4;
    CHECK_THROWS_AS(classify_neighboring(drift, lo, hi, {}, 9, opts), std::invalid_argument);
}

TEST_CASE("degeneracy of the linear drift field: Psi(t,s) = s") {
    Field drift = fixtures::linear_drift(1.0);
    PeriodicOrbit lo = equilibrium_orbit(drift, 0.0, 1.0 / 2048);
    PeriodicOrbit hi = equilibrium_orbit(drift, 1.0, 1.0 / 2048);
    BandDynOptions opts;
    opts.v_bound = 2.4;
    DegeneracyReport report = detect_degeneracy(drift, lo, hi, 129, opts);
    REQUIRE(report.verdict == DegeneracyVerdict::Degenerate);
    REQUIRE(report.psi.size() == 129);
    for (const auto& ps : report.psi) {
        for (const auto& smp : ps.orbit.orbit.samples)
            CHECK(std::fabs(smp.u - ps.s) < 1e-8);  // the constant s
    }
}

TEST_CASE("free field is degenerate between 0 and 1") {
    Field zero = fixtures::constant_field(0.0, 1.0);
    PeriodicOrbit lo = equilibrium_orbit(zero, 0.0, 1.0 / 2048);
    PeriodicOrbit hi = equilibrium_orbit(zero, 1.0, 1.0 / 2048);
    BandDynOptions opts;
    opts.v_bound = 2.4;
    DegeneracyReport report = detect_degeneracy(zero, lo, hi, 65, opts);
    CHECK(report.verdict == DegeneracyVerdict::Degenerate);
}

TEST_CASE("damped pendulum [-pi, pi]: a gap with a valid bracket") {
    Field pend = fixtures::pendulum(0.2, 1.0, 2 * kPi);
    PeriodicOrbit lo = equilibrium_orbit(pend, -kPi, 2 * kPi / 2048);
    PeriodicOrbit hi = equilibrium_orbit(pend, kPi, 2 * kPi / 2048);
    BandDynOptions opts;
    opts.v_bound = 4.9;
    opts.n_scan = 192;
    DegeneracyReport report = detect_degeneracy(pend, lo, hi, 65, opts);
    REQUIRE(report.verdict == DegeneracyVerdict::GapFound);
    // the only periodic solutions are -pi, 0, pi: the first bracket is
    // (-pi, 0)
    CHECK(report.bracket.first == doctest::Approx(-kPi).epsilon(1e-6));
    CHECK(report.bracket.second == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("conservative locator: free drift escapes at t = 1/epsilon") {
    Field zero = fixtures::constant_field(0.0, 1.0);
    PeriodicOrbit lo = equilibrium_orbit(zero, 0.0, 1.0 / 2048);
    PeriodicOrbit hi = equilibrium_orbit(zero, 1.0, 1.0 / 2048);
    BandDynOptions opts;
    opts.v_bound = 2.4;
    DegeneracyReport report = detect_degeneracy(zero, lo, hi, 33, opts);
    REQUIRE(report.verdict == DegeneracyVerdict::Degenerate);

    ConservativeOptions co;
    co.max_periods = 1200;
    ConservativeResult res = conservative_locator(zero, report, StartOrbit::Alpha, 1e-3, co);
    CHECK(res.verdict.tag == StabilityTag::UnstableCertified);
    REQUIRE(res.trace.exit_time.has_value());
    CHECK(*res.trace.exit_time == doctest::Approx(1000.0).epsilon(1e-3));
    // s(t) = epsilon * t along the trace
    for (const auto& [t, s] : res.trace.s_of_t)
        CHECK(s == doctest::Approx(1e-3 * t).epsilon(1e-6));

    CHECK_THROWS_AS(conservative_locator(zero, report, StartOrbit::Alpha, 0.0, co),
                    std::invalid_argument);
    DegeneracyReport bad;
    bad.verdict = DegeneracyVerdict::GapFound;
    CHECK_THROWS_AS(conservative_locator(zero, bad, StartOrbit::Alpha, 1e-3, co),
                    std::invalid_argument);
    Field drift = fixtures::linear_drift(1.0);
    CHECK_THROWS_AS(conservative_locator(drift, report, StartOrbit::Alpha, 1e-3, co),
                    std::invalid_argument);  // not conservative
}

TEST_CASE("stability verdicts for the pendulum equilibria") {
    Field pend = fixtures::pendulum(0.2, 1.0, 2 * kPi);

    SUBCASE("saddle: floquet-unstable without a witness, certified with one") {
        PeriodicOrbit saddle = equilibrium_orbit(pend, kPi, 2 * kPi / 2048);
        StabilityVerdict plain = stability_verdict(pend, saddle, {}, {});
        CHECK(plain.tag == StabilityTag::FloquetUnstable);
        double expect = std::exp(2 * kPi * fixtures::lambda_plus(0.2, 1.0));
        CHECK(std::fabs(plain.max_multiplier - expect) / expect < 1e-3);
    }

    SUBCASE("focus: numerically stable with |mu| = exp(-c T / 2)") {
        PeriodicOrbit focus = equilibrium_orbit(pend, 0.0, 2 * kPi / 2048);
        StabilityVerdict sv = stability_verdict(pend, focus, {}, {});
        CHECK(sv.tag == StabilityTag::NumericallyStable);
        double expect = std::exp(-0.2 * kPi);  // e^{-cT/2} with T = 2 pi
        CHECK(std::fabs(std::abs(focus.floquet[0]) - expect) < 1e-3);
        CHECK(std::fabs(std::abs(focus.floquet[1]) - expect) < 1e-3);
    }

    SUBCASE("free field: unit multipliers are inconclusive") {
        Field zero = fixtures::constant_field(0.0, 1.0);
        PeriodicOrbit still = equilibrium_orbit(zero, 0.0, 1.0 / 2048);
        StabilityVerdict sv = stability_verdict(zero, still, {}, {});
        CHECK(sv.tag == StabilityTag::Inconclusive);
        CHECK(sv.max_multiplier == doctest::Approx(1.0).epsilon(1e-9));
    }
}
