#include "bandode/periodic.hpp"

#include <algorithm>
#include <cmath>

#include "bandode/parallel.hpp"

namespace bandode {

namespace {

struct Displacement {
    double d1, d2;
    std::array<std::array<double, 2>, 2> jac;  // of the displacement map
};

Displacement displacement(const Field& field, double u0, double v0, double h) {
    FlowWithJacobian f = flow_with_jacobian(field, 0.0, u0, v0, field.period, h);
    Displacement d;
    d.d1 = f.u - u0;
    d.d2 = f.v - v0;
    d.jac = f.jac;
    d.jac[0][0] -= 1.0;
    d.jac[1][1] -= 1.0;
    return d;
}

// Solve J s = -r; falls back to the minimal-norm least-squares step when J
// is (near) singular, which happens on continua of periodic solutions.
std::array<double, 2> newton_step(const std::array<std::array<double, 2>, 2>& J, double r1,
                                  double r2) {
    double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    double scale = std::fabs(J[0][0]) + std::fabs(J[0][1]) + std::fabs(J[1][0]) +
                   std::fabs(J[1][1]) + 1e-300;
    if (std::fabs(det) > 1e-12 * scale * scale) {
        return {(-r1 * J[1][1] + r2 * J[0][1]) / det, (-J[0][0] * r2 + J[1][0] * r1) / det};
    }
    // Pseudo-inverse via normal equations with Tikhonov damping.
    double a = J[0][0], b = J[0][1], c = J[1][0], d = J[1][1];
    double g11 = a * a + c * c, g12 = a * b + c * d, g22 = b * b + d * d;
    double lambda = 1e-12 * (g11 + g22 + 1.0);
    g11 += lambda;
    g22 += lambda;
    double rhs1 = -(a * r1 + c * r2);
    double rhs2 = -(b * r1 + d * r2);
    double gdet = g11 * g22 - g12 * g12;
    return {(rhs1 * g22 - rhs2 * g12) / gdet, (g11 * rhs2 - g12 * rhs1) / gdet};
}

struct NewtonResult {
    bool converged = false;
    double u0 = 0.0, v0 = 0.0;
};

NewtonResult newton_orbit(const Field& field, double u0, double v0, double h,
                          const FindPeriodicOptions& opts) {
    NewtonResult res;
    double u = u0, v = v0;
    Displacement d;
    try {
        d = displacement(field, u, v, h);
    } catch (const std::exception&) {
        return res;
    }
    double norm = std::fabs(d.d1) + std::fabs(d.d2);
    for (int it = 0; it < opts.max_newton; ++it) {
        double tol = opts.newton_tol * (1.0 + std::fabs(u) + std::fabs(v));
        if (norm <= tol) {
            // Polish a little further so downstream corner checks see a
            // closure mismatch well below their tolerance.
            for (int extra = 0; extra < 6 && norm > 1e-14 * (1.0 + std::fabs(u)); ++extra) {
                auto s = newton_step(d.jac, d.d1, d.d2);
                double un = u + s[0], vn = v + s[1];
                Displacement dn;
                try {
                    dn = displacement(field, un, vn, h);
                } catch (const std::exception&) {
                    break;
                }
                double nn = std::fabs(dn.d1) + std::fabs(dn.d2);
                if (nn >= norm) break;
                u = un;
                v = vn;
                d = dn;
                norm = nn;
            }
            res.converged = true;
            res.u0 = u;
            res.v0 = v;
            return res;
        }
        auto s = newton_step(d.jac, d.d1, d.d2);
        double step_scale = 1.0;
        bool advanced = false;
        for (int halve = 0; halve < 30; ++halve) {
            double un = u + step_scale * s[0];
            double vn = v + step_scale * s[1];
            Displacement dn;
            try {
                dn = displacement(field, un, vn, h);
            } catch (const std::exception&) {
                step_scale *= 0.5;
                continue;
            }
            double nn = std::fabs(dn.d1) + std::fabs(dn.d2);
            if (nn < norm) {
                u = un;
                v = vn;
                d = dn;
                norm = nn;
                advanced = true;
                break;
            }
            step_scale *= 0.5;
        }
        if (!advanced) return res;  // damping exhausted
    }
    return res;
}

bool orbit_in_band(const Trajectory& traj, const Band& band, double tol) {
    for (const auto& s : traj.samples) {
        if (s.u < band.lower.value(s.t) - tol) return false;
        if (s.u > band.upper.value(s.t) + tol) return false;
    }
    return true;
}

}  // namespace

ExtremalPair find_periodic(const Field& field, const Band& band, int grid_u, int grid_v,
                           const FindPeriodicOptions& opts) {
    if (!(opts.v_bound > 0.0))
        throw std::invalid_argument("find_periodic: v_bound must be positive");
    const double h = opts.h > 0.0 ? opts.h : field.period / 2048.0;
    const double a0 = band.lower.value(0.0);
    const double b0 = band.upper.value(0.0);

    ExtremalPair result;

    auto attempt = [&](int gu, int gv) -> ExtremalPair {
        ExtremalPair out;
        int nu = gu + 1, nv = gv + 1;
        std::vector<double> du(nu * nv), dv(nu * nv);
        std::vector<char> ok(nu * nv, 0);
        std::vector<double> us(nu), vs(nv);
        for (int i = 0; i < nu; ++i) us[i] = a0 + (b0 - a0) * i / gu;
        for (int j = 0; j < nv; ++j) vs[j] = -opts.v_bound + 2.0 * opts.v_bound * j / gv;

        parallel_for(static_cast<std::size_t>(nu) * nv, opts.threads, [&](std::size_t idx) {
            int i = static_cast<int>(idx) / nv;
            int j = static_cast<int>(idx) % nv;
            Endpoint e = integrate_endpoint(field, 0.0, us[i], vs[j], field.period, h);
            if (e.finite) {
                du[idx] = e.u - us[i];
                dv[idx] = e.v - vs[j];
                ok[idx] = 1;
            }
        });

        // Seeds: cells whose corner displacements bracket zero in both
        // components, plus the barrier initial states (the barriers may be
        // solutions themselves, and then they are the extremals).
        std::vector<std::array<double, 2>> seeds;
        out.cells_scanned = gu * gv;
        for (int i = 0; i < gu; ++i) {
            for (int j = 0; j < gv; ++j) {
                std::size_t c00 = static_cast<std::size_t>(i) * nv + j;
                std::size_t c10 = c00 + nv, c01 = c00 + 1, c11 = c00 + nv + 1;
                if (!(ok[c00] && ok[c10] && ok[c01] && ok[c11])) continue;
                double lo1 = std::min(std::min(du[c00], du[c10]), std::min(du[c01], du[c11]));
                double hi1 = std::max(std::max(du[c00], du[c10]), std::max(du[c01], du[c11]));
                double lo2 = std::min(std::min(dv[c00], dv[c10]), std::min(dv[c01], dv[c11]));
                double hi2 = std::max(std::max(dv[c00], dv[c10]), std::max(dv[c01], dv[c11]));
                double z = 1e-12;
                if (lo1 <= z && hi1 >= -z && lo2 <= z && hi2 >= -z) {
                    ++out.cells_with_roots;
                    seeds.push_back({0.5 * (us[i] + us[i + 1]), 0.5 * (vs[j] + vs[j + 1])});
                }
            }
        }
        seeds.push_back({a0, band.lower.right_deriv(0)});
        seeds.push_back({b0, band.upper.right_deriv(0)});

        std::vector<NewtonResult> found(seeds.size());
        parallel_for(seeds.size(), opts.threads, [&](std::size_t k) {
            found[k] = newton_orbit(field, seeds[k][0], seeds[k][1], h, opts);
        });

        std::vector<std::array<double, 2>> roots;
        for (const auto& nr : found) {
            if (!nr.converged) {
                ++out.newton_failures;
                continue;
            }
            bool dup = false;
            for (const auto& r : roots) {
                if (std::hypot(r[0] - nr.u0, r[1] - nr.v0) < opts.dedup_dist) {
                    dup = true;
                    break;
                }
            }
            if (!dup) roots.push_back({nr.u0, nr.v0});
        }
        std::sort(roots.begin(), roots.end());

        for (const auto& r : roots) {
            Trajectory traj;
            try {
                traj = integrate(field, 0.0, r[0], r[1], field.period, h);
            } catch (const std::exception&) {
                continue;
            }
            if (!orbit_in_band(traj, band, opts.band_tol)) continue;
            PeriodicOrbit orb;
            orb.u0 = r[0];
            orb.v0 = r[1];
            orb.closure_residual = std::fabs(traj.samples.back().u - r[0]) +
                                   std::fabs(traj.samples.back().v - r[1]);
            double scale = 1e-8 * (1.0 + std::fabs(r[0]) + std::fabs(r[1]));
            if (orb.closure_residual > scale) continue;  // not actually closed
            PoincareResult pr = poincare(field, r[0], r[1], h);
            orb.floquet = eigenvalues_2x2(pr.jacobian);
            orb.orbit = std::move(traj);
            out.orbits.push_back(std::move(orb));
        }

        if (!out.orbits.empty()) {
            int imin = 0, imax = 0;
            for (std::size_t k = 1; k < out.orbits.size(); ++k) {
                if (out.orbits[k].u0 < out.orbits[imin].u0) imin = static_cast<int>(k);
                if (out.orbits[k].u0 > out.orbits[imax].u0) imax = static_cast<int>(k);
            }
            out.x_min_index = imin;
            out.x_max_index = imax;
            // Pointwise domination of the extremal orbits over the found set.
            for (const auto& o : out.orbits) {
                const auto& lo = out.orbits[imin].orbit.samples;
                const auto& hi = out.orbits[imax].orbit.samples;
                for (std::size_t i = 0; i < o.orbit.samples.size(); ++i) {
                    if (o.orbit.samples[i].u - lo[i].u < -1e-7 ||
                        hi[i].u - o.orbit.samples[i].u < -1e-7)
                        throw std::runtime_error(
                            "find_periodic: extremal orbit fails pointwise domination over the "
                            "found set");
                }
            }
        }

        out.continuum_suspect =
            out.cells_with_roots * 4 > out.cells_scanned ||
            static_cast<int>(out.orbits.size()) >= gu;
        return out;
    };

    result = attempt(grid_u, grid_v);
    if (result.orbits.empty() && opts.refine_on_empty) {
        ExtremalPair retry = attempt(2 * grid_u, 2 * grid_v);
        retry.newton_failures += result.newton_failures;
        result = std::move(retry);
    }
    if (result.orbits.empty())
        throw std::runtime_error(
            "find_periodic: no orbit found in a verified band (internal inconsistency; grid "
            "refinement already attempted)");
    return result;
}

Curve curve_from_orbit(const PeriodicOrbit& orbit, const Field& field) {
    return Curve::from_trajectory(orbit.orbit, field);
}

}  // namespace bandode
