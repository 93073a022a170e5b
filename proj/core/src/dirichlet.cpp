#include "bandode/dirichlet.hpp"

#include <algorithm>
#include <cmath>

#include "bandode/parallel.hpp"

namespace bandode {

namespace {

double effective_step(const Field& field, const DirichletSpec& spec, const ShootOptions& opts) {
    double target = opts.h_target > 0.0 ? opts.h_target : field.period / 2048.0;
    double span = spec.b - spec.a;
    long n = std::max<long>(32, std::lround(span / target));
    return span / static_cast<double>(n);
}

bool in_band(const Trajectory& traj, const Band& band, double tol) {
    for (const auto& s : traj.samples) {
        if (s.u < band.lower.value(s.t) - tol) return false;
        if (s.u > band.upper.value(s.t) + tol) return false;
    }
    return true;
}

double sup_distance(const Trajectory& a, const Trajectory& b) {
    std::size_t n = std::min(a.samples.size(), b.samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        d = std::max(d, std::fabs(a.samples[i].u - b.samples[i].u));
    return d;
}

}  // namespace

SolutionSet shoot_all(const Field& field, const DirichletSpec& spec, double v_lo,
                      double v_hi, const ShootOptions& opts) {
    if (!(v_hi > v_lo)) throw std::invalid_argument("shoot_all: need v_hi > v_lo");
    if (!(spec.b > spec.a)) throw std::invalid_argument("shoot_all: need b > a");

    const double h = effective_step(field, spec, opts);
    const double tol_bc = 1e-10 * (1.0 + std::fabs(spec.yb));
    const int n_scan = std::max(2, opts.n_scan);

    auto miss = [&](double v0) -> double {
        Endpoint e = integrate_endpoint(field, spec.a, spec.ya, v0, spec.b, h,
                                        opts.blowup_guard);
        return e.finite ? e.u - spec.yb : std::nan("");
    };

    // Scan the bracket.
    std::vector<double> grid(n_scan + 1), m(n_scan + 1);
    for (int i = 0; i <= n_scan; ++i)
        grid[i] = v_lo + (v_hi - v_lo) * static_cast<double>(i) / n_scan;
    parallel_for(grid.size(), opts.threads, [&](std::size_t i) { m[i] = miss(grid[i]); });

    if (std::isnan(m.front()) || std::isnan(m.back()))
        throw std::invalid_argument("shoot_all: miss function not finite at bracket endpoints");

    SolutionSet set;

    // Candidate roots: near-zero grid values and bisection-refined sign
    // changes.
    std::vector<double> roots;
    for (int i = 0; i <= n_scan; ++i) {
        if (!std::isnan(m[i]) && std::fabs(m[i]) < 1e-10) roots.push_back(grid[i]);
    }
    for (int i = 0; i < n_scan; ++i) {
        if (std::isnan(m[i]) || std::isnan(m[i + 1])) continue;
        if (m[i] == 0.0 || m[i] * m[i + 1] > 0.0) continue;
        double lo = grid[i], hi = grid[i + 1];
        double flo = m[i];
        double best_v = lo, best_m = std::fabs(flo);
        for (int iter = 0; iter < 200; ++iter) {
            double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;  // bracket at machine resolution
            double fm = miss(mid);
            if (std::isnan(fm)) break;
            if (std::fabs(fm) < best_m) {
                best_m = std::fabs(fm);
                best_v = mid;
            }
            if (best_m < tol_bc) break;
            if ((flo <= 0.0) == (fm <= 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        if (best_m < tol_bc) {
            roots.push_back(best_v);
        } else {
            set.warnings.push_back("sign change near v0 = " + std::to_string(0.5 * (lo + hi)) +
                                   " could not be refined below tol_bc; dropped");
        }
    }

    std::sort(roots.begin(), roots.end());

    // Record the surviving trajectories, dropping band violators.
    for (double v0 : roots) {
        Trajectory traj;
        try {
            traj = integrate(field, spec.a, spec.ya, v0, spec.b, h, {opts.blowup_guard, ""});
        } catch (const std::exception&) {
            continue;
        }
        if (!in_band(traj, spec.band, opts.band_tol)) continue;
        set.solutions.push_back(std::move(traj));
        set.v0.push_back(v0);
    }

    // Merge ties (pointwise-equal solutions within 1e-9).
    for (std::size_t i = 0; i < set.solutions.size(); ++i) {
        for (std::size_t j = i + 1; j < set.solutions.size();) {
            if (sup_distance(set.solutions[i], set.solutions[j]) < 1e-9) {
                set.solutions.erase(set.solutions.begin() + j);
                set.v0.erase(set.v0.begin() + j);
            } else {
                ++j;
            }
        }
    }

    if (set.solutions.empty()) return set;

    // Extremal selection by midpoint value, then the pointwise-domination
    // assertion that makes the choice self-checking.
    std::size_t mid_idx = set.solutions.front().samples.size() / 2;
    int imax = 0, imin = 0;
    for (std::size_t k = 1; k < set.solutions.size(); ++k) {
        if (set.solutions[k].samples[mid_idx].u > set.solutions[imax].samples[mid_idx].u)
            imax = static_cast<int>(k);
        if (set.solutions[k].samples[mid_idx].u < set.solutions[imin].samples[mid_idx].u)
            imin = static_cast<int>(k);
    }
    set.extremal_max = imax;
    set.extremal_min = imin;

    for (std::size_t k = 0; k < set.solutions.size() && set.dominance_ok; ++k) {
        const auto& smax = set.solutions[imax].samples;
        const auto& smin = set.solutions[imin].samples;
        const auto& cur = set.solutions[k].samples;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            if (smax[i].u - cur[i].u < -1e-7 || cur[i].u - smin[i].u < -1e-7) {
                set.dominance_ok = false;
                break;
            }
        }
    }
    if (!set.dominance_ok && opts.require_extremal_domination)
        throw std::runtime_error(
            "shoot_all: extremal candidate fails pointwise domination (crossing solutions); "
            "the enumerated set is inconsistent with an extremal structure");

    return set;
}

RestrictionVerdict restriction_check(const Field& field, const SolutionSet& set,
                                     const DirichletSpec& spec, double sub_a, double sub_b,
                                     double v_lo, double v_hi, const ShootOptions& opts) {
    if (set.empty()) throw std::invalid_argument("restriction_check: empty solution set");
    if (!(spec.a <= sub_a && sub_a < sub_b && sub_b <= spec.b))
        throw std::invalid_argument("restriction_check: [sub_a, sub_b] not inside [a, b]");

    RestrictionVerdict verdict;
    verdict.pass = true;

    auto check_one = [&](int index, bool maximal) -> double {
        const Trajectory& y = set.solutions[static_cast<std::size_t>(index)];
        DirichletSpec sub;
        sub.a = sub_a;
        sub.b = sub_b;
        sub.ya = y.u_at(sub_a);
        sub.yb = y.u_at(sub_b);
        sub.band = spec.band;
        SolutionSet rs = shoot_all(field, sub, v_lo, v_hi, opts);
        if (rs.empty()) {
            verdict.pass = false;
            return 1e300;
        }
        const Trajectory& r =
            rs.solutions[static_cast<std::size_t>(maximal ? rs.extremal_max : rs.extremal_min)];
        double sup = 0.0;
        for (const auto& s : r.samples) sup = std::max(sup, std::fabs(s.u - y.u_at(s.t)));
        if (sup > 1e-6) verdict.pass = false;
        return sup;
    };

    verdict.sup_diff_max = check_one(set.extremal_max, true);
    verdict.sup_diff_min = check_one(set.extremal_min, false);
    return verdict;
}

}  // namespace bandode
