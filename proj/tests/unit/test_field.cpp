#include <doctest.h>

#include <cmath>

#include "bandode/field.hpp"

using namespace bandode;

TEST_CASE("field_from_expr derives flags and validates periodicity") {
    Field pend = field_from_expr("c*v + a*sin(u)", 2.0 * 3.14159265358979323846,
                                 {{"c", 0.2}, {"a", 1.0}}, "a*cos(u)", "c");
    CHECK(!pend.conservative);
    CHECK(pend.autonomous);
    CHECK(pend.rhs(0.0, 0.0, 1.0) == doctest::Approx(0.2));
    CHECK((*pend.f_u)(0.0, 0.0, 0.0) == doctest::Approx(1.0));

    Field cons = field_from_expr("sin(u)", 1.0, {});
    CHECK(cons.conservative);
    CHECK(cons.autonomous);

    // sin(t) is not 1-periodic: the sampled check must reject it.
    CHECK_THROWS_AS(field_from_expr("sin(t)", 1.0, {}), std::invalid_argument);
    // ... but it is 2*pi-periodic.
    CHECK_NOTHROW(field_from_expr("sin(t)", 2.0 * 3.14159265358979323846, {}));
}

TEST_CASE("nagumo_check closed forms") {
    // phi = 1 + v^2: int_0^K v/(1+v^2) = 0.5 ln(1+K^2) = 1  =>  K = sqrt(e^2-1)
    NagumoSpec quad = nagumo_from_expr("1 + v^2", {});
    NagumoResult r1 = nagumo_check(quad, 1.0);
    CHECK(r1.verdict == NagumoVerdict::Satisfied);
    CHECK(r1.K_candidate ==
          doctest::Approx(std::sqrt(std::exp(2.0) - 1.0)).epsilon(1e-4));

    // phi = (1+v)^3: the full integral is 1/2 < 1.
    NagumoSpec cubic = nagumo_from_expr("(1 + v)^3", {});
    NagumoResult r2 = nagumo_check(cubic, 1.0);
    CHECK(r2.verdict == NagumoVerdict::Violated);
    CHECK(r2.partial_integral + r2.tail_bound < 1.0);
    CHECK(r2.partial_integral < 0.5 + 1e-6);

    // phi == 5: K^2/10 = gap  =>  K = sqrt(10 * gap)
    NagumoSpec flat = nagumo_from_expr("5", {});
    NagumoResult r3 = nagumo_check(flat, 100.0);
    CHECK(r3.verdict == NagumoVerdict::Satisfied);
    CHECK(r3.K_candidate == doctest::Approx(std::sqrt(1000.0)).epsilon(1e-3));
}

TEST_CASE("nagumo_check is monotone in the gap") {
    NagumoSpec quad = nagumo_from_expr("1 + v^2", {});
    double prev_K = 0.0;
    for (double gap : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        NagumoResult r = nagumo_check(quad, gap);
        CHECK(r.verdict == NagumoVerdict::Satisfied);
        CHECK(r.K_candidate >= prev_K - 1e-9);
        prev_K = r.K_candidate;
    }
}

TEST_CASE("non-positive phi is rejected") {
    NagumoSpec bad;
    bad.phi = [](double v) { return 1.0 - v; };  //phi(2) < 0
    CHECK_THROWS_AS(nagumo_check(bad, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(nagumo_check(bad, -1.0), std::invalid_argument);  // bad gap
}
