#pragma once

// The equation under study is the scalar second-order ODE
//
//     -u'' = f(t, u, u')
//
// with f continuous and T-periodic in t.  Field packages the right-hand
// side together with the period and optional partial derivatives; NagumoSpec
// carries the growth bound phi used by the Nagumo condition.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "bandode/expr.hpp"

namespace bandode {

using RhsFn = std::function<double(double t, double u, double v)>;

struct Field {
    RhsFn rhs;
    double period = 1.0;
    std::optional<RhsFn> f_u;  // d f / d u
    std::optional<RhsFn> f_v;  // d f / d v
    bool conservative = false;  // rhs independent of v
    bool autonomous = false;    // rhs independent of t
    std::string source;         // expression text when declared in a file

    double operator()(double t, double u, double v) const { return rhs(t, u, v); }
};

// Builds a Field from expression text in variables {t, u, v}.  The
// conservative/autonomous flags are derived from the variables the
// expression actually references, and the declared invariants
// (T-periodicity in t, v-independence when conservative) are spot-checked
// by deterministic sampling; violations throw.
Field field_from_expr(const std::string& rhs_src, double period,
                      const std::map<std::string, double>& params,
                      const std::string& fu_src = "", const std::string& fv_src = "");

// Sampled validation of the Field invariants; throws std::invalid_argument
// on failure.  `t_dependent` should be true when the rhs references t.
void validate_field(const Field& field, bool t_dependent);

struct NagumoSpec {
    std::function<double(double)> phi;  // positive on [0, inf)
    std::string description;
};

NagumoSpec nagumo_from_expr(const std::string& phi_src,
                            const std::map<std::string, double>& params);

enum class NagumoVerdict { Satisfied, Violated, Inconclusive };

struct NagumoResult {
    NagumoVerdict verdict = NagumoVerdict::Inconclusive;
    double K_candidate = 0.0;     // meaningful when Satisfied
    double partial_integral = 0.0;
    double tail_bound = 0.0;      // meaningful when Violated
    std::string note;
};

// Decides whether  int_0^inf v/phi(v) dv > gap  by doubling the upper limit
// (cap 1e6) with adaptive Simpson quadrature.  "Satisfied" reports the
// smallest upper limit K_candidate whose partial integral exceeds the gap,
// bisection-refined to relative tolerance 1e-6.  "Violated" is only reported
// when the sampled integrand tail decays with a fitted exponent > 1 for
// several consecutive doublings and the resulting tail bound still leaves
// the total below the gap; everything else is "Inconclusive".
NagumoResult nagumo_check(const NagumoSpec& spec, double gap);

}  // namespace bandode
