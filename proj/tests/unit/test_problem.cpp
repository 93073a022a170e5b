#include <doctest.h>

#include <cmath>

#include "bandode/problem.hpp"

using namespace bandode;

namespace {

const char* kMinimal = R"({
  "name": "mini",
  "T": 1.0,
  "f": "0",
  "alpha": "0",
  "beta": "1"
})";

}  // namespace

TEST_CASE("minimal problem parses and builds its objects") {
    ProblemFile p = parse_problem(kMinimal, "fallback");
    CHECK(p.name == "mini");
    CHECK(p.T == 1.0);
    Field f = p.make_field();
    CHECK(f.rhs(0, 0, 0) == 0.0);
    Band band = p.make_band();
    CHECK(band.gap_at_zero() == doctest::Approx(1.0));
    CHECK(!p.make_phi().has_value());
}

TEST_CASE("the pendulum problem file loads with its fixtures") {
    ProblemFile p = load_problem(std::string(BANDODE_PROBLEMS_DIR) + "/pendulum.problem");
    CHECK(p.name == "pendulum");
    CHECK(p.T == doctest::Approx(2 * 3.14159265358979323846));
    CHECK(p.uniqueness);
    CHECK(p.solver.horizon == 8);
    CHECK(!p.fixtures.empty());
    Field f = p.make_field();
    CHECK(f.rhs(0.0, 0.0, 1.0) == doctest::Approx(0.2));
    CHECK(p.make_phi().has_value());
    CHECK(p.make_alpha().is_constant());
}

TEST_CASE("unknown keys are rejected everywhere") {
    CHECK_THROWS_AS(parse_problem(R"({"T":1,"f":"0","alpha":"0","beta":"1","bogus":2})", "x"),
                    ProblemError);
    CHECK_THROWS_AS(
        parse_problem(R"({"T":1,"f":"0","alpha":"0","beta":"1","solver":{"junk":1}})", "x"),
        ProblemError);
    CHECK_THROWS_AS(
        parse_problem(
            R"({"T":1,"f":"0","alpha":{"segments":[{"at":0,"expr":"0","oops":1}]},"beta":"1"})",
            "x"),
        ProblemError);
}

TEST_CASE("malformed JSON and bad declarations carry positions or reasons") {
    try {
        parse_problem("{\"T\": 1,,}", "x");
        FAIL("expected a parse error");
    } catch (const ProblemError& e) {
        CHECK(std::string(e.what()).find("JSON") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_problem(R"({"f":"0","alpha":"0","beta":"1"})", "x"), ProblemError);
    CHECK_THROWS_AS(parse_problem(R"({"T":-1,"f":"0","alpha":"0","beta":"1"})", "x"),
                    ProblemError);
    CHECK_THROWS_AS(parse_problem(R"({"T":1,"f":"w","alpha":"0","beta":"1"})", "x"),
                    ParseError);  // unknown identifier in f
    // beta below alpha fails band validation at load time
    CHECK_THROWS_AS(parse_problem(R"({"T":1,"f":"0","alpha":"1","beta":"0"})", "x"),
                    std::invalid_argument);
}

TEST_CASE("piecewise curves and parameter expressions") {
    const char* text = R"({
      "T": 1.0,
      "params": {"peak": 0.5},
      "f": "0",
      "alpha": {"segments": [{"at": 0.0, "expr": "2*peak*t"}, {"at": 0.5, "expr": "2*peak*(1-t)"}]},
      "beta": "2"
    })";
    ProblemFile p = parse_problem(text, "tent");
    Curve alpha = p.make_alpha();
    CHECK(alpha.segment_count() == 2);
    CHECK(alpha.value(0.25) == doctest::Approx(0.25));
    CHECK(alpha.value(0.75) == doctest::Approx(0.25));
}

TEST_CASE("overrides update solver settings") {
    ProblemFile p = parse_problem(kMinimal, "x");
    apply_override(p, "solver.horizon", "12");
    CHECK(p.solver.horizon == 12);
    apply_override(p, "n_scan", "64");
    CHECK(p.solver.n_scan == 64);
    apply_override(p, "uniqueness", "true");
    CHECK(p.uniqueness);
    CHECK_THROWS_AS(apply_override(p, "nonsense", "1"), ProblemError);
    CHECK_THROWS_AS(apply_override(p, "solver.horizon", "abc"), ProblemError);
}

TEST_CASE("T accepts an expression string") {
    ProblemFile p =
        parse_problem(R"({"T":"2*pi","f":"0","alpha":"0","beta":"1"})", "x");
    CHECK(p.T == doctest::Approx(2 * 3.14159265358979323846));
}
