#include "bandode/banddyn.hpp"

#include <algorithm>
#include <cmath>

#include "bandode/dirichlet.hpp"
#include "bandode/parallel.hpp"

namespace bandode {

namespace {

Band orbits_band(const Field& field, const PeriodicOrbit& alpha_orbit,
                 const PeriodicOrbit& beta_orbit) {
    return Band::make(curve_from_orbit(alpha_orbit, field),
                      curve_from_orbit(beta_orbit, field));
}

// One-dimensional periodic-orbit search at a fixed initial position: roots
// of r(v0) = u(T) - p, then the velocity-closure test |v(T) - v0| <= 1e-8.
std::optional<PeriodicOrbit> seek_orbit_at(const Field& field, const Band& band, double p,
                                           const BandDynOptions& opts) {
    const double h = opts.h > 0.0 ? opts.h : field.period / 2048.0;
    const double T = field.period;
    auto ret_miss = [&](double v0) -> Endpoint {
        return integrate_endpoint(field, 0.0, p, v0, T, h);
    };

    const int n = std::max(16, opts.n_scan);
    std::vector<double> grid(n + 1), r(n + 1);
    std::vector<char> finite(n + 1, 0);
    for (int i = 0; i <= n; ++i) grid[i] = -opts.v_bound + 2.0 * opts.v_bound * i / n;
    parallel_for(grid.size(), opts.threads, [&](std::size_t i) {
        Endpoint e = ret_miss(grid[i]);
        finite[i] = e.finite ? 1 : 0;
        r[i] = e.u - p;
    });

    std::vector<double> roots;
    for (int i = 0; i <= n; ++i)
        if (finite[i] && std::fabs(r[i]) < 1e-12 * (1.0 + std::fabs(p))) roots.push_back(grid[i]);
    for (int i = 0; i < n; ++i) {
        if (!finite[i] || !finite[i + 1]) continue;
        if (r[i] == 0.0 || r[i] * r[i + 1] > 0.0) continue;
        double lo = grid[i], hi = grid[i + 1], flo = r[i];
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            Endpoint e = ret_miss(mid);
            if (!e.finite) break;
            double fm = e.u - p;
            if ((flo <= 0.0) == (fm <= 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
            if (std::fabs(fm) < 1e-12 * (1.0 + std::fabs(p))) {
                lo = hi = mid;
                break;
            }
        }
        roots.push_back(0.5 * (lo + hi));
    }
    std::sort(roots.begin(), roots.end());

    std::optional<PeriodicOrbit> best;
    for (double v0 : roots) {
        Endpoint e = ret_miss(v0);
        if (!e.finite) continue;
        if (std::fabs(e.v - v0) > 1e-8) continue;  // returns but does not close
        Trajectory traj;
        try {
            traj = integrate(field, 0.0, p, v0, T, h);
        } catch (const std::exception&) {
            continue;
        }
        bool inside = true;
        for (const auto& s : traj.samples) {
            if (s.u < band.lower.value(s.t) - 1e-9 || s.u > band.upper.value(s.t) + 1e-9) {
                inside = false;
                break;
            }
        }
        if (!inside) continue;
        PeriodicOrbit orb;
        orb.u0 = p;
        orb.v0 = v0;
        orb.closure_residual = std::fabs(e.u - p) + std::fabs(e.v - v0);
        orb.orbit = std::move(traj);
        orb.floquet = eigenvalues_2x2(poincare(field, p, v0, h).jacobian);
        if (!best || std::fabs(v0) < std::fabs(best->v0)) best = std::move(orb);
    }
    return best;
}

void check_neighboring(const Field& field, const Band& band, const PeriodicOrbit& alpha_orbit,
                       const PeriodicOrbit& beta_orbit, const BandDynOptions& opts) {
    FindPeriodicOptions fp;
    fp.v_bound = opts.v_bound;
    fp.h = opts.h;
    fp.threads = opts.threads;
    ExtremalPair pair =
        find_periodic(field, band, opts.neighboring_grid, opts.neighboring_grid, fp);
    if (pair.continuum_suspect)
        throw std::invalid_argument(
            "classify_neighboring: the band carries a continuum of periodic solutions "
            "(degenerate-suspect); the orbits are not neighboring");
    if (pair.orbits.size() != 2)
        throw std::invalid_argument(
            "classify_neighboring: found " + std::to_string(pair.orbits.size()) +
            " periodic orbits in the band; the two inputs are not neighboring");
    auto matches = [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
        return std::fabs(a.u0 - b.u0) + std::fabs(a.v0 - b.v0) < 1e-6;
    };
    bool ok = (matches(pair.orbits[0], alpha_orbit) && matches(pair.orbits[1], beta_orbit)) ||
              (matches(pair.orbits[0], beta_orbit) && matches(pair.orbits[1], alpha_orbit));
    if (!ok)
        throw std::invalid_argument(
            "classify_neighboring: the periodic orbits in the band differ from the inputs");
}

}  // namespace

double DegeneracyReport::psi_value(double t, double s) const {
    if (psi.empty()) throw std::logic_error("psi_value: no family stored");
    if (s <= psi.front().s) return psi.front().orbit.orbit.u_at(t);
    if (s >= psi.back().s) return psi.back().orbit.orbit.u_at(t);
    std::size_t lo = 0, hi = psi.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (psi[mid].s <= s)
            lo = mid;
        else
            hi = mid;
    }
    double w = (s - psi[lo].s) / (psi[hi].s - psi[lo].s);
    return (1.0 - w) * psi[lo].orbit.orbit.u_at(t) + w * psi[hi].orbit.orbit.u_at(t);
}

ClassifyResult classify_neighboring(const Field& field, const PeriodicOrbit& alpha_orbit,
                                    const PeriodicOrbit& beta_orbit,
                                    std::vector<double> eps_list, int grid,
                                    const BandDynOptions& opts) {
    if (!(opts.v_bound > 0.0))
        throw std::invalid_argument("classify_neighboring: v_bound must be positive");
    if (grid < 2) throw std::invalid_argument("classify_neighboring: grid must be >= 2");

    Band band = orbits_band(field, alpha_orbit, beta_orbit);
    check_neighboring(field, band, alpha_orbit, beta_orbit, opts);

    const double a0 = alpha_orbit.u0, b0 = beta_orbit.u0;
    if (eps_list.empty())
        for (int k = 1; k <= 4; ++k) eps_list.push_back((b0 - a0) * std::pow(2.0, -k - 2));

    ClassifyResult result;
    const double T = field.period;
    bool any_positive = false, any_negative = false, any_empty = false;

    for (double eps : eps_list) {
        ReturnFamily family;
        family.epsilon = eps;
        double lo = a0 + eps, hi = b0 - eps;
        if (!(hi > lo)) {
            result.notes.push_back("epsilon too wide for the band; family skipped");
            continue;
        }
        family.entries.resize(grid);
        ShootOptions so;
        so.n_scan = opts.n_scan;
        so.h_target = opts.h;
        so.threads = 1;
        so.require_extremal_domination = false;  // the full sign table matters, not extremals
        std::vector<std::string> errors(grid);
        parallel_for(static_cast<std::size_t>(grid), opts.threads, [&](std::size_t i) {
            double u0 = lo + (hi - lo) * static_cast<double>(i) / (grid - 1);
            ReturnEntry entry;
            entry.u0 = u0;
            DirichletSpec spec;
            spec.a = 0.0;
            spec.b = T;
            spec.ya = u0;
            spec.yb = u0;
            spec.band = band;
            try {
                SolutionSet set = shoot_all(field, spec, -opts.v_bound, opts.v_bound, so);
                for (std::size_t k = 0; k < set.solutions.size(); ++k) {
                    ReturnSolution rs;
                    rs.v0 = set.v0[k];
                    rs.v_end = set.solutions[k].samples.back().v;
                    rs.gap = rs.v0 - rs.v_end;
                    entry.solutions.push_back(rs);
                }
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
            family.entries[i] = std::move(entry);
        });

        bool fam_empty = false, fam_pos = false, fam_neg = false, fam_degenerate = false;
        for (const auto& entry : family.entries) {
            if (entry.solutions.empty()) {
                fam_empty = true;
                continue;
            }
            for (const auto& rs : entry.solutions) {
                if (rs.gap > 1e-9)
                    fam_pos = true;
                else if (rs.gap < -1e-9)
                    fam_neg = true;
                else
                    fam_degenerate = true;  // a periodic return inside a neighboring band
            }
        }
        if (fam_degenerate)
            result.notes.push_back("near-zero derivative gap found; neighboring assumption suspect");
        if (fam_empty)
            family.sign = FamilySign::Incomplete;
        else if (fam_pos && !fam_neg && !fam_degenerate)
            family.sign = FamilySign::AllPositive;
        else if (fam_neg && !fam_pos && !fam_degenerate)
            family.sign = FamilySign::AllNegative;
        else
            family.sign = FamilySign::Mixed;

        any_positive |= fam_pos;
        any_negative |= fam_neg;
        any_empty |= fam_empty;
        result.families.push_back(std::move(family));
    }

    bool all_pos = !result.families.empty() && !any_empty && any_positive && !any_negative;
    bool all_neg = !result.families.empty() && !any_empty && any_negative && !any_positive;
    for (const auto& f : result.families) {
        if (f.sign == FamilySign::Mixed || f.sign == FamilySign::Incomplete)
            all_pos = all_neg = false;
    }
    if (all_pos)
        result.verdict = ClassifyVerdict::BetaReceives;
    else if (all_neg)
        result.verdict = ClassifyVerdict::AlphaReceives;
    else
        result.verdict = ClassifyVerdict::MixedInconclusive;
    return result;
}

DegeneracyReport detect_degeneracy(const Field& field, const PeriodicOrbit& alpha_orbit,
                                   const PeriodicOrbit& beta_orbit, int grid_s,
                                   const BandDynOptions& opts) {
    if (!(opts.v_bound > 0.0))
        throw std::invalid_argument("detect_degeneracy: v_bound must be positive");
    if (grid_s < 3) throw std::invalid_argument("detect_degeneracy: grid_s must be >= 3");
    if (!(beta_orbit.u0 > alpha_orbit.u0))
        throw std::invalid_argument("detect_degeneracy: need alpha(0) < beta(0)");

    Band band = orbits_band(field, alpha_orbit, beta_orbit);
    const double a0 = alpha_orbit.u0, b0 = beta_orbit.u0;

    DegeneracyReport report;

    BandDynOptions inner = opts;
    inner.threads = 1;
    std::vector<std::optional<PeriodicOrbit>> found(grid_s);
    parallel_for(static_cast<std::size_t>(grid_s), opts.threads, [&](std::size_t i) {
        double s = static_cast<double>(i) / (grid_s - 1);
        double p = (1.0 - s) * a0 + s * b0;
        found[i] = seek_orbit_at(field, band, p, inner);
    });

    bool all_found = true;
    for (const auto& f : found) all_found &= f.has_value();

    if (all_found) {
        for (int i = 0; i < grid_s; ++i) {
            PsiSample ps;
            ps.s = static_cast<double>(i) / (grid_s - 1);
            ps.orbit = *found[i];
            report.psi.push_back(std::move(ps));
        }
        // Condition (c): strict monotonicity in s at every mesh time.
        for (std::size_t i = 0; i + 1 < report.psi.size(); ++i) {
            const auto& lo = report.psi[i].orbit.orbit.samples;
            const auto& hi = report.psi[i + 1].orbit.orbit.samples;
            for (std::size_t j = 0; j < lo.size(); ++j) {
                if (!(hi[j].u > lo[j].u)) {
                    report.verdict = DegeneracyVerdict::Inconclusive;
                    report.notes.push_back(
                        "family found at every position but not strictly increasing in s");
                    return report;
                }
            }
        }
        report.verdict = DegeneracyVerdict::Degenerate;
        return report;
    }

    // A failing stretch between two successes: bracket candidate.
    int lo_idx = -1, hi_idx = -1;
    for (int i = 0; i + 1 < grid_s; ++i) {
        if (found[i] && !found[i + 1]) {
            lo_idx = i;
            for (int j = i + 1; j < grid_s; ++j) {
                if (found[j]) {
                    hi_idx = j;
                    break;
                }
            }
            break;
        }
    }
    if (lo_idx < 0 || hi_idx < 0) {
        report.verdict = DegeneracyVerdict::Inconclusive;
        report.notes.push_back("no bracketing pair of found orbits around the failures");
        return report;
    }

    // Refine with 64 interior positions; any hit means the coarse grid just
    // missed orbits and the report stays inconclusive.
    double p_lo = found[lo_idx]->u0, p_hi = found[hi_idx]->u0;
    const int refine = 64;
    std::vector<char> hit(refine, 0);
    parallel_for(static_cast<std::size_t>(refine), opts.threads, [&](std::size_t k) {
        double p = p_lo + (p_hi - p_lo) * static_cast<double>(k + 1) / (refine + 1);
        hit[k] = seek_orbit_at(field, band, p, inner).has_value() ? 1 : 0;
    });
    for (int k = 0; k < refine; ++k) {
        if (hit[k]) {
            report.verdict = DegeneracyVerdict::Inconclusive;
            report.notes.push_back(
                "refinement found a periodic orbit between coarse-grid successes; increase "
                "grid_s");
            return report;
        }
    }

    report.verdict = DegeneracyVerdict::GapFound;
    report.bracket = {p_lo, p_hi};
    report.bracket_lo = *found[lo_idx];
    report.bracket_hi = *found[hi_idx];
    return report;
}

ConservativeResult conservative_locator(const Field& field, const DegeneracyReport& report,
                                        StartOrbit start, double epsilon,
                                        const ConservativeOptions& opts) {
    if (!field.conservative)
        throw std::invalid_argument("conservative_locator: field is not conservative");
    if (report.verdict != DegeneracyVerdict::Degenerate)
        throw std::invalid_argument("conservative_locator: report is not degenerate");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("conservative_locator: epsilon must be positive");

    const double T = field.period;
    const double h = opts.h > 0.0 ? opts.h : T / 2048.0;
    const long spt = std::lround(T / h);
    const auto& psi = report.psi;
    const int ns = static_cast<int>(psi.size());

    const int dir = (start == StartOrbit::Alpha) ? +1 : -1;
    const PeriodicOrbit& origin = (start == StartOrbit::Alpha) ? psi.front().orbit
                                                               : psi.back().orbit;
    double u = origin.u0;
    double v = origin.v0 + dir * epsilon;

    ConservativeResult out;
    out.trace.epsilon = epsilon;
    const long decimate = std::max<long>(1, spt / 32);

    auto s_at = [&](long mesh_index, double uu) -> std::optional<double> {
        long j = mesh_index % spt;
        // Psi(t_j, s_i) read straight off the stored orbit meshes.
        double lo_v = psi.front().orbit.orbit.samples[static_cast<std::size_t>(j)].u;
        double hi_v = psi.back().orbit.orbit.samples[static_cast<std::size_t>(j)].u;
        double tol = 1e-9 * (1.0 + std::fabs(hi_v));
        if (uu < lo_v - tol || uu > hi_v + tol) return std::nullopt;
        if (uu <= lo_v) return psi.front().s;
        if (uu >= hi_v) return psi.back().s;
        int lo = 0, hi = ns - 1;
        while (hi - lo > 1) {
            int mid = (lo + hi) / 2;
            double val = psi[mid].orbit.orbit.samples[static_cast<std::size_t>(j)].u;
            if (val <= uu)
                lo = mid;
            else
                hi = mid;
        }
        double va = psi[lo].orbit.orbit.samples[static_cast<std::size_t>(j)].u;
        double vb = psi[hi].orbit.orbit.samples[static_cast<std::size_t>(j)].u;
        double w = (vb > va) ? (uu - va) / (vb - va) : 0.0;
        return psi[lo].s + w * (psi[hi].s - psi[lo].s);
    };

    double s_prev = *s_at(0, u);
    out.trace.s_of_t.push_back({0.0, s_prev});
    std::vector<double> period_levels;

    long global = 0;
    for (int period = 0; period < opts.max_periods; ++period) {
        Trajectory chunk = integrate(field, period * T, u, v, (period + 1) * T, h);
        for (std::size_t i = 1; i < chunk.samples.size(); ++i) {
            ++global;
            const auto& smp = chunk.samples[i];
            std::optional<double> s_now = s_at(global, smp.u);
            if (!s_now) {
                out.trace.exit_time = smp.t;
                out.verdict.tag = StabilityTag::UnstableCertified;
                out.verdict.orbit_u0 = origin.u0;
                out.verdict.orbit_v0 = origin.v0;
                out.verdict.witness = "conservative-trace escape at t = " + std::to_string(smp.t);
                out.verdict.detail = "start orbit unstable (escape)";
                return out;
            }
            if (dir * (*s_now - s_prev) < -1e-8)
                throw std::runtime_error(
                    "conservative_locator: s(t) is not monotone (family inversion error)");
            s_prev = *s_now;
            if (global % decimate == 0) out.trace.s_of_t.push_back({smp.t, s_prev});
        }
        u = chunk.samples.back().u;
        v = chunk.samples.back().v;

        period_levels.push_back(s_prev);
        if (dir > 0 ? s_prev >= 1.0 - 1e-4 : s_prev <= 1e-4) {
            out.trace.exit_time = (period + 1) * T;
            out.verdict.tag = StabilityTag::UnstableCertified;
            out.verdict.orbit_u0 = origin.u0;
            out.verdict.orbit_v0 = origin.v0;
            out.verdict.witness = "conservative-trace reached the far end of the family";
            out.verdict.detail = "start orbit unstable (escape)";
            return out;
        }
        if (period_levels.size() >= 5) {
            double span = 0.0;
            for (std::size_t k = period_levels.size() - 5; k + 1 < period_levels.size(); ++k)
                span = std::max(span, std::fabs(period_levels.back() - period_levels[k]));
            bool interior = s_prev > 1e-4 && s_prev < 1.0 - 1e-4;
            if (span < opts.plateau_tol && interior) {
                out.trace.plateau = s_prev;
                out.verdict.tag = StabilityTag::UnstableCertified;
                out.verdict.witness =
                    "conservative-trace plateau at s = " + std::to_string(s_prev);
                out.verdict.detail = "interior orbit of the family is unstable";
                double p = (1.0 - s_prev) * psi.front().orbit.u0 + s_prev * psi.back().orbit.u0;
                out.verdict.orbit_u0 = p;
                BandDynOptions bd;
                bd.v_bound = opts.v_bound > 0.0 ? opts.v_bound : 1.0 + std::fabs(v) * 4.0;
                bd.h = opts.h;
                bd.n_scan = opts.n_scan;
                bd.threads = opts.threads;
                Band band = Band::make(curve_from_orbit(psi.front().orbit, field),
                                       curve_from_orbit(psi.back().orbit, field));
                if (auto orb = seek_orbit_at(field, band, p, bd)) out.verdict.orbit_v0 = orb->v0;
                return out;
            }
        }
    }

    out.verdict.tag = StabilityTag::Inconclusive;
    out.verdict.detail = "no plateau or escape within the period budget";
    return out;
}

StabilityVerdict stability_verdict(const Field& field, const PeriodicOrbit& orbit,
                                   const std::vector<const AsymptoticRun*>& witnesses,
                                   const StabilityOptions& opts) {
    const double h = opts.h > 0.0 ? opts.h : field.period / 2048.0;
    StabilityVerdict out;
    out.orbit_u0 = orbit.u0;
    out.orbit_v0 = orbit.v0;

    PoincareResult pr = poincare(field, orbit.u0, orbit.v0, h);
    auto mu = eigenvalues_2x2(pr.jacobian);
    out.max_multiplier = std::max(std::abs(mu[0]), std::abs(mu[1]));

    for (const AsymptoticRun* run : witnesses) {
        if (!run || !run->converged) continue;
        double tgt = std::fabs(run->target.u0 - orbit.u0) + std::fabs(run->target.v0 - orbit.v0);
        if (tgt > 1e-6 * (1.0 + std::fabs(orbit.u0))) continue;
        const StateSample& at0 = run->direction == Direction::Future
                                     ? run->limit.samples.front()
                                     : run->limit.samples.back();
        if (std::fabs(at0.u - orbit.orbit.u_at(at0.t)) < 1e-3) continue;
        out.tag = StabilityTag::UnstableCertified;
        out.witness = "asymptotic run from u0 = " + std::to_string(run->u0) +
                      (run->direction == Direction::Future ? " (future)" : " (past)");
        out.detail = "nontrivial trajectory converges to the orbit";
        return out;
    }

    if (out.max_multiplier > 1.0 + 1e-6) {
        out.tag = StabilityTag::FloquetUnstable;
        out.detail = "max |mu| = " + std::to_string(out.max_multiplier);
        return out;
    }
    if (out.max_multiplier < 1.0 - 1e-6) {
        // Perturbation gate for the numerically-stable tag.
        const int n = opts.perturbed_runs;
        const double delta = opts.perturbation;
        const double horizon = opts.horizon_periods * field.period;
        const long spt = std::lround(field.period / h);
        std::vector<char> ok(n, 1);
        parallel_for(static_cast<std::size_t>(n), opts.threads, [&](std::size_t i) {
            double theta = 2.0 * 3.14159265358979323846 * static_cast<double>(i) / n;
            double u = orbit.u0 + delta * std::cos(theta);
            double v = orbit.v0 + delta * std::sin(theta);
            Trajectory traj;
            try {
                traj = integrate(field, 0.0, u, v, horizon, h);
            } catch (const std::exception&) {
                ok[i] = 0;
                return;
            }
            for (std::size_t j = 0; j < traj.samples.size(); ++j) {
                const auto& x = orbit.orbit.samples[j % static_cast<std::size_t>(spt)];
                double dist = std::hypot(traj.samples[j].u - x.u, traj.samples[j].v - x.v);
                if (dist > 10.0 * delta) {
                    ok[i] = 0;
                    return;
                }
            }
        });
        bool all_ok = true;
        for (char c : ok) all_ok &= (c != 0);
        if (all_ok) {
            out.tag = StabilityTag::NumericallyStable;
            out.detail = "max |mu| = " + std::to_string(out.max_multiplier) +
                         "; perturbed orbits stay within 10x perturbation for " +
                         std::to_string(opts.horizon_periods) + " periods";
            return out;
        }
        out.tag = StabilityTag::Inconclusive;
        out.detail = "contracting multipliers but a perturbed orbit escaped the 10x tube";
        return out;
    }
    out.tag = StabilityTag::Inconclusive;
    out.detail = "multipliers on the unit circle within tolerance";
    return out;
}

AsymptoticRun corollary2_witness(const Field& field, const PeriodicOrbit& alpha_orbit,
                                 const PeriodicOrbit& beta_orbit, ClassifyVerdict verdict,
                                 const AsymptoticOptions& opts) {
    if (verdict == ClassifyVerdict::MixedInconclusive)
        throw std::invalid_argument("corollary2_witness: verdict is inconclusive");
    Band band = orbits_band(field, alpha_orbit, beta_orbit);
    double u0 = 0.5 * (alpha_orbit.u0 + beta_orbit.u0);
    const PeriodicOrbit& target =
        (verdict == ClassifyVerdict::BetaReceives) ? beta_orbit : alpha_orbit;
    return asymptotic_future(field, band, target, u0, opts);
}

}  // namespace bandode
