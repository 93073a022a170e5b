#pragma once

// Problem files: a single JSON document declaring the equation, the period,
// the Nagumo function, the barrier pair and solver settings.  Everything is
// validated up front (unknown keys rejected, expressions parsed) before any
// computation starts.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bandode/curve.hpp"
#include "bandode/field.hpp"

#include <json.hpp>

namespace bandode {

struct SolverBlock {
    double h = 0.0;  // 0 -> T/2048
    int n_scan = 512;
    int grid_u = 33;
    int grid_v = 33;
    int horizon = 8;
    double tol_conv = 1e-4;
    int grid_s = 129;
    int classify_grid = 9;
    std::vector<double> eps_list;  // classify family margins; empty -> defaults
    double v_bound = 0.0;          // 0 -> take K from the modified field
    int max_periods = 2000;
    double epsilon = 1e-3;  // conservative-locator perturbation
    int threads = 0;
};

struct CurveDecl {
    std::string expr;  // single-expression form
    std::vector<std::pair<double, std::string>> segments;
    bool piecewise = false;
};

struct FixtureCheck {
    std::string command;
    std::string pointer;  // JSON pointer into the command's report
    nlohmann::json expected;
    double tol = 0.0;
};

struct ProblemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProblemFile {
    std::string name;
    double T = 1.0;
    std::map<std::string, double> params;  // includes "pi"
    std::string f_src, fu_src, fv_src, phi_src;
    CurveDecl alpha_decl, beta_decl;
    bool uniqueness = false;
    SolverBlock solver;
    std::vector<FixtureCheck> fixtures;
    std::string raw_bytes;  // original file contents (digest input)

    Field make_field() const;
    std::optional<NagumoSpec> make_phi() const;
    Curve make_alpha() const;
    Curve make_beta() const;
    Band make_band() const;
};

// Throws ProblemError with a position-annotated message on malformed input.
ProblemFile parse_problem(const std::string& text, const std::string& fallback_name);
ProblemFile load_problem(const std::string& path);

// Applies "key=value" overrides (solver fields, "uniqueness").
void apply_override(ProblemFile& problem, const std::string& key, const std::string& value);

}  // namespace bandode
