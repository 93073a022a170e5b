#include "bandode/modify.hpp"

#include <algorithm>
#include <cmath>

#include "bandode/quadrature.hpp"

namespace bandode {

double ModifiedField::gamma(double t, double u) const {
    double lo = band.lower.value(t);
    double hi = band.upper.value(t);
    return std::clamp(u, lo, hi);
}

double ModifiedField::delta(double v) const { return std::clamp(v, -K, K); }

double ModifiedField::eval(double t, double u, double v) const {
    double g = gamma(t, u);
    return -u + g + base.rhs(t, g, delta(v));
}

Field ModifiedField::as_field() const {
    Field f;
    f.period = base.period;
    f.conservative = base.conservative;
    f.autonomous = base.autonomous && band.lower.is_constant() && band.upper.is_constant();
    f.source = base.source.empty() ? "" : "modified(" + base.source + ")";
    ModifiedField self = *this;
    f.rhs = [self](double t, double u, double v) { return self.eval(t, u, v); };
    if (base.f_u && base.f_v) {
        ModifiedField s2 = *this;
        f.f_u = [s2](double t, double u, double v) {
            double lo = s2.band.lower.value(t), hi = s2.band.upper.value(t);
            if (u < lo || u > hi) return -1.0;  // gamma saturated
            return (*s2.base.f_u)(t, u, s2.delta(v));
        };
        f.f_v = [s2](double t, double u, double v) {
            if (std::fabs(v) > s2.K) return 0.0;  // delta saturated
            return (*s2.base.f_v)(t, s2.gamma(t, u), v);
        };
    }
    return f;
}

namespace {

constexpr double kQuadTol = 1e-10;

double phi_integral(const NagumoSpec& phi, double a, double b) {
    return adaptive_simpson(
        [&phi](double v) {
            double p = phi.phi(v);
            if (!(p > 0.0))
                throw std::invalid_argument("invalid NagumoSpec: phi non-positive at v = " +
                                            std::to_string(v));
            return v / p;
        },
        a, b, kQuadTol);
}

}  // namespace

ModifiedField build_modified(const Field& field, const Band& band, const NagumoSpec& phi,
                             const BuildModifiedOptions& opts) {
    // Band must verify before any truncation makes sense.
    VerifyResult vl = verify_lower(band.lower, field);
    if (!vl.pass)
        throw std::invalid_argument("build_modified: alpha is not a lower solution (" +
                                    vl.message + ")");
    VerifyResult vu = verify_upper(band.upper, field);
    if (!vu.pass)
        throw std::invalid_argument("build_modified: beta is not an upper solution (" +
                                    vu.message + ")");

    NagumoResult nag = nagumo_check(phi, band.full_gap());
    if (nag.verdict != NagumoVerdict::Satisfied)
        throw std::invalid_argument(
            "build_modified: the Nagumo condition is not satisfied for the band gap");

    ModifiedField mod;
    mod.base = field;
    mod.band = band;
    mod.phi = phi;

    const double gap0 = band.gap_at_zero();
    const double margin = opts.margin;
    const double deriv_bound =
        std::max(band.lower.max_abs_deriv(), band.upper.max_abs_deriv());
    const double target = gap0 * (1.0 + margin);

    if (gap0 <= 1e-12) mod.warning = "degenerate band: beta(0) == alpha(0); any K above the barrier slopes works";

    // Smallest K with  int_0^K v/phi > gap0*(1+margin)  and K above the
    // barrier slopes, then a 10% inflation so later quadrature cannot sit on
    // the boundary.
    double k_floor = std::max(deriv_bound * (1.0 + margin), 1e-6);
    double K_thr;
    if (phi_integral(phi, 0.0, k_floor) > target) {
        K_thr = k_floor;
    } else {
        double hi = std::max(1.0, k_floor);
        while (phi_integral(phi, 0.0, hi) <= target) {
            hi *= 2.0;
            if (hi > 1e9)
                throw std::runtime_error("build_modified: K search exceeded 1e9; phi grows too fast");
        }
        double lo = std::max(hi / 2.0, k_floor);
        while (hi - lo > 1e-6 * hi) {
            double mid = 0.5 * (lo + hi);
            if (phi_integral(phi, 0.0, mid) > target)
                hi = mid;
            else
                lo = mid;
        }
        K_thr = hi;
    }
    mod.K = 1.1 * K_thr;

    // Largest epsilon with  int_eps^K v/phi > gap0*(1+margin), bisected to
    // 1e-6; the lower bracket end keeps the inequality strict.
    {
        double lo = 0.0, hi = mod.K;
        // whole integral exceeds the target by construction
        while (hi - lo > 1e-6 * std::max(1.0, mod.K)) {
            double mid = 0.5 * (lo + hi);
            if (phi_integral(phi, mid, mod.K) > target)
                lo = mid;
            else
                hi = mid;
        }
        mod.epsilon = lo;
    }

    // Sampled suprema for M = sup |ftilde| in-band and b_bound = sup |u + f|
    // over the clamp range, both inflated 10%.
    const int n = std::max(8, opts.supremum_grid);
    double M = 0.0, b_bound = 0.0;
    const double T = field.period;
    for (int it = 0; it < n; ++it) {
        double t = T * (it + 0.5) / n;
        double lo = band.lower.value(t), hi = band.upper.value(t);
        for (int iu = 0; iu <= n; ++iu) {
            double u = lo + (hi - lo) * iu / n;
            for (int iv = 0; iv <= n; ++iv) {
                double v = -mod.K + 2.0 * mod.K * iv / n;
                double fv = field.rhs(t, u, v);  // in-band: gamma(u) = u, delta(v) = v
                M = std::max(M, std::fabs(fv));
                b_bound = std::max(b_bound, std::fabs(u + fv));
            }
        }
    }
    mod.M = 1.1 * M;
    mod.b_bound = 1.1 * b_bound;
    return mod;
}

FilterResult same_solution_filter(const ModifiedField& mod, const Trajectory& traj,
                                  double residual_tol) {
    if (traj.samples.size() < 3)
        throw std::invalid_argument("same_solution_filter: trajectory has too few samples");

    Field mod_field = mod.as_field();
    if (residual_tol <= 0.0) {
        double h = traj.step;
        residual_tol = std::max(1e-6, 20.0 * (1.0 + mod.M) * h * h);
    }
    double mod_residual = trajectory_residual(traj, mod_field);
    if (mod_residual > residual_tol)
        throw std::invalid_argument(
            "same_solution_filter: trajectory does not solve the modified field (residual " +
            std::to_string(mod_residual) + ")");

    FilterResult res{SolutionOrigin::ModifiedOnly, true, false, 0.0};
    for (const auto& s : traj.samples) {
        if (s.u < mod.band.lower.value(s.t) - 1e-9 || s.u > mod.band.upper.value(s.t) + 1e-9)
            res.in_band = false;
        if (std::fabs(s.v) < mod.epsilon) res.has_slow_sample = true;
    }

    if (res.in_band && res.has_slow_sample) {
        res.original_residual = trajectory_residual(traj, mod.base);
        if (res.original_residual > residual_tol)
            throw std::runtime_error(
                "same_solution_filter: internal consistency error: in-band slow trajectory of "
                "the modified field has residual " + std::to_string(res.original_residual) +
                " against the original field");
        res.origin = SolutionOrigin::OriginalEquation;
    }
    return res;
}

}  // namespace bandode
