#include "bandode/field.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "bandode/quadrature.hpp"

namespace bandode {

namespace {

RhsFn wrap_program(ExprProgram prog) {
    return [p = std::move(prog)](double t, double u, double v) { return p.eval(t, u, v); };
}

}  // namespace

Field field_from_expr(const std::string& rhs_src, double period,
                      const std::map<std::string, double>& params,
                      const std::string& fu_src, const std::string& fv_src) {
    if (!(period > 0.0)) throw std::invalid_argument("field period must be positive");
    const std::vector<std::string> vars = {"t", "u", "v"};
    ExprAst ast = parse_expr(rhs_src, vars, params);

    Field f;
    f.rhs = wrap_program(ExprProgram(ast));
    f.period = period;
    f.conservative = !ast.uses_variable("v");
    f.autonomous = !ast.uses_variable("t");
    f.source = rhs_src;
    if (!fu_src.empty()) f.f_u = wrap_program(ExprProgram(parse_expr(fu_src, vars, params)));
    if (!fv_src.empty()) f.f_v = wrap_program(ExprProgram(parse_expr(fv_src, vars, params)));

    validate_field(f, !f.autonomous);
    return f;
}

void validate_field(const Field& field, bool t_dependent) {
    std::mt19937 rng(0x5eedu);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double T = field.period;

    for (int i = 0; i < 64; ++i) {
        double t = unit(rng) * 3.0 * T;
        double u = unit(rng) * 10.0;
        double v = unit(rng) * 10.0;
        double base = field.rhs(t, u, v);
        if (!std::isfinite(base)) continue;  // domain holes are the caller's business
        double tol = 1e-9 * (1.0 + std::fabs(base));
        if (t_dependent) {
            double shifted = field.rhs(t + T, u, v);
            if (std::fabs(shifted - base) > tol)
                throw std::invalid_argument("field is not T-periodic in t (sampled check)");
        }
        if (field.conservative) {
            double other = field.rhs(t, u, unit(rng) * 10.0);
            if (std::fabs(other - base) > tol)
                throw std::invalid_argument(
                    "field declared conservative but depends on v (sampled check)");
        }
    }
}

NagumoSpec nagumo_from_expr(const std::string& phi_src,
                            const std::map<std::string, double>& params) {
    ExprAst ast = parse_expr(phi_src, {"v"}, params);
    ExprProgram prog(ast);
    NagumoSpec spec;
    spec.phi = [p = std::move(prog)](double v) { return p.eval1(v); };
    spec.description = phi_src;
    return spec;
}

namespace {

constexpr double kCapV = 1e6;
constexpr double kPanelTol = 1e-10;

double integrand_checked(const NagumoSpec& spec, double v) {
    double p = spec.phi(v);
    if (!(p > 0.0))
        throw std::invalid_argument("invalid NagumoSpec: phi(" + std::to_string(v) +
                                    ") = " + std::to_string(p) + " is not positive");
    return v / p;
}

}  // namespace

NagumoResult nagumo_check(const NagumoSpec& spec, double gap) {
    if (gap < 0.0) throw std::invalid_argument("nagumo_check: gap must be >= 0");
    auto g = [&spec](double v) { return integrand_checked(spec, v); };

    NagumoResult res;

    // Prefix integrals at the doubling checkpoints 0,1,2,4,...
    double prefix = 0.0;
    double v_prev = 0.0;
    double v_cur = 1.0;
    std::vector<double> decay_exponents;

    while (v_cur <= kCapV) {
        double panel = adaptive_simpson(g, v_prev, v_cur, kPanelTol);
        double total = prefix + panel;

        if (total > gap) {
            // Smallest upper limit whose partial integral exceeds the gap,
            // refined to relative tolerance 1e-6.  The loop invariant
            // prefix <= gap < total places the crossing inside this panel.
            double lo = v_prev, hi = v_cur;
            while (hi - lo > 1e-6 * std::max(1.0, hi)) {
                double mid = 0.5 * (lo + hi);
                double part = prefix + adaptive_simpson(g, v_prev, mid, kPanelTol);
                if (part > gap)
                    hi = mid;
                else
                    lo = mid;
            }
            res.verdict = NagumoVerdict::Satisfied;
            res.K_candidate = hi;
            res.partial_integral = total;
            return res;
        }

        // Tail diagnostics: fitted decay exponent per doubling.
        if (v_prev > 0.0) {
            double g_prev = g(v_prev), g_cur = g(v_cur);
            if (g_cur > 0.0 && g_prev > g_cur) {
                decay_exponents.push_back(std::log2(g_prev / g_cur));
                if (decay_exponents.size() >= 3) {
                    double p = decay_exponents.back();
                    for (std::size_t i = decay_exponents.size() - 3; i < decay_exponents.size(); ++i)
                        p = std::min(p, decay_exponents[i]);
                    if (p > 1.05) {
                        double tail = g_cur * v_cur / (p - 1.0);
                        if (total + tail < gap) {
                            res.verdict = NagumoVerdict::Violated;
                            res.partial_integral = total;
                            res.tail_bound = tail;
                            res.note =
                                "tail bound assumes the integrand keeps decaying at least as "
                                "fast as v^-" + std::to_string(p);
                            return res;
                        }
                    }
                }
            } else {
                decay_exponents.clear();
            }
        }

        prefix = total;
        v_prev = v_cur;
        v_cur *= 2.0;
    }

    res.verdict = NagumoVerdict::Inconclusive;
    res.partial_integral = prefix;
    res.note = "partial integral still below gap at the doubling cap 1e6";
    return res;
}

}  // namespace bandode
