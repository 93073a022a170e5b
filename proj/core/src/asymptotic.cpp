#include "bandode/asymptotic.hpp"

#include <algorithm>
#include <cmath>

#include "bandode/parallel.hpp"

namespace bandode {

namespace {

struct WorkSet {
    Field field;       // the field the Dirichlet problems are solved under
    Field original;    // the field instability is claimed for
    Band band;
    PeriodicOrbit target;
    std::optional<ModifiedField> modified;
};

PeriodicOrbit reintegrate_target(const Field& field, const PeriodicOrbit& target, double h) {
    PeriodicOrbit out = target;
    out.orbit = integrate(field, 0.0, target.u0, target.v0, field.period, h);
    double closure = std::fabs(out.orbit.samples.back().u - target.u0) +
                     std::fabs(out.orbit.samples.back().v - target.v0);
    if (closure > 1e-8 * (1.0 + std::fabs(target.u0) + std::fabs(target.v0)))
        throw std::runtime_error(
            "asymptotic: target orbit does not close under the working field (closure " +
            std::to_string(closure) + ")");
    out.closure_residual = closure;
    return out;
}

PeriodicOrbit reflect_orbit(const PeriodicOrbit& orbit) {
    PeriodicOrbit r = orbit;
    r.u0 = -orbit.u0;
    r.v0 = -orbit.v0;
    for (auto& s : r.orbit.samples) {
        s.u = -s.u;
        s.v = -s.v;
    }
    return r;
}

ModifiedField reflect_modified(const ModifiedField& mod, const Field& rfield, Band rband) {
    ModifiedField m;
    m.base = rfield;
    m.band = std::move(rband);
    m.phi = mod.phi;
    m.K = mod.K;
    m.epsilon = mod.epsilon;
    m.M = mod.M;
    m.b_bound = mod.b_bound;
    m.warning = mod.warning;
    return m;
}

// ---- multiple shooting for (D_n), n >= 2 --------------------------------

// Unknowns X = [v_0, u_1, v_1, ..., u_{n-1}, v_{n-1}]; residuals are the
// window matching conditions plus the final position condition.
struct WindowSolve {
    bool converged = false;
    std::vector<double> X;
    int iterations = 0;
};

void solve_dense(std::vector<double>& A, std::vector<double>& b, int n) {
    // Gaussian elimination with partial pivoting; A is row-major n x n.
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::fabs(A[col * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double v = std::fabs(A[r * n + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) throw std::runtime_error("singular multiple-shooting jacobian");
        if (piv != col) {
            for (int c = col; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        double d = A[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            double factor = A[r * n + col] / d;
            if (factor == 0.0) continue;
            for (int c = col; c < n; ++c) A[r * n + c] -= factor * A[col * n + c];
            b[r] -= factor * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r * n + c] * b[c];
        b[r] = s / A[r * n + r];
    }
}

struct WindowEval {
    std::vector<double> residual;
    std::vector<std::array<std::array<double, 2>, 2>> mono;  // per window
    double norm = 0.0;
};

WindowEval eval_windows(const Field& field, double u0, double target_u, int n,
                        const std::vector<double>& X, double h, bool with_jacobian,
                        int threads) {
    const double T = field.period;
    const int dim = 2 * n - 1;
    WindowEval ev;
    ev.residual.assign(dim, 0.0);
    ev.mono.assign(n, {});

    std::vector<std::array<double, 2>> ends(n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t k) {
        double uk = (k == 0) ? u0 : X[2 * k - 1];
        double vk = (k == 0) ? X[0] : X[2 * k];
        double t0 = static_cast<double>(k) * T;
        if (with_jacobian) {
            FlowWithJacobian f = flow_with_jacobian(field, t0, uk, vk, T, h);
            ends[k] = {f.u, f.v};
            ev.mono[k] = f.jac;
        } else {
            Endpoint e = integrate_endpoint(field, t0, uk, vk, t0 + T, h);
            if (!e.finite) throw std::runtime_error("window integration blew up");
            ends[k] = {e.u, e.v};
        }
    });

    for (int k = 0; k + 1 < n; ++k) {
        ev.residual[2 * k] = ends[k][0] - X[2 * k + 1];
        ev.residual[2 * k + 1] = ends[k][1] - X[2 * k + 2];
    }
    ev.residual[dim - 1] = ends[n - 1][0] - target_u;
    for (double r : ev.residual) ev.norm = std::max(ev.norm, std::fabs(r));
    return ev;
}

WindowSolve multiple_shooting(const Field& field, double u0, double target_u, int n,
                              std::vector<double> X, double h, double tol, int threads) {
    const int dim = 2 * n - 1;
    WindowSolve ws;
    ws.X = std::move(X);

    WindowEval ev = eval_windows(field, u0, target_u, n, ws.X, h, true, threads);
    for (int iter = 0; iter < 50; ++iter) {
        ++ws.iterations;
        if (ev.norm <= tol) {
            ws.converged = true;
            return ws;
        }
        // Assemble the block-bidiagonal jacobian.
        std::vector<double> A(static_cast<std::size_t>(dim) * dim, 0.0);
        auto at = [&](int r, int c) -> double& { return A[static_cast<std::size_t>(r) * dim + c]; };
        for (int k = 0; k + 1 < n; ++k) {
            const auto& M = ev.mono[k];
            if (k == 0) {
                at(0, 0) = M[0][1];
                at(1, 0) = M[1][1];
            } else {
                at(2 * k, 2 * k - 1) = M[0][0];
                at(2 * k, 2 * k) = M[0][1];
                at(2 * k + 1, 2 * k - 1) = M[1][0];
                at(2 * k + 1, 2 * k) = M[1][1];
            }
            at(2 * k, 2 * k + 1) = -1.0;
            at(2 * k + 1, 2 * k + 2) = -1.0;
        }
        {
            const auto& M = ev.mono[n - 1];
            if (n == 1) {
                at(0, 0) = M[0][1];
            } else {
                at(dim - 1, 2 * (n - 1) - 1) = M[0][0];
                at(dim - 1, 2 * (n - 1)) = M[0][1];
            }
        }
        std::vector<double> step(ev.residual);
        for (double& s : step) s = -s;
        solve_dense(A, step, dim);

        double lambda = 1.0;
        bool advanced = false;
        for (int halve = 0; halve < 30; ++halve) {
            std::vector<double> Xn(ws.X);
            for (int i = 0; i < dim; ++i) Xn[i] += lambda * step[i];
            WindowEval evn;
            try {
                evn = eval_windows(field, u0, target_u, n, Xn, h, true, threads);
            } catch (const std::exception&) {
                lambda *= 0.5;
                continue;
            }
            if (evn.norm < ev.norm) {
                ws.X = std::move(Xn);
                ev = std::move(evn);
                advanced = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!advanced) return ws;  // stalled
    }
    ws.converged = ev.norm <= tol;
    return ws;
}

Trajectory assemble_windows(const Field& field, double u0, int n,
                            const std::vector<double>& X, double h) {
    const double T = field.period;
    Trajectory out;
    out.step = h;
    out.direction = 1;
    for (int k = 0; k < n; ++k) {
        double uk = (k == 0) ? u0 : X[2 * k - 1];
        double vk = (k == 0) ? X[0] : X[2 * k];
        double t0 = static_cast<double>(k) * T;
        Trajectory w = integrate(field, t0, uk, vk, t0 + T, h);
        std::size_t keep = (k + 1 == n) ? w.samples.size() : w.samples.size() - 1;
        out.samples.insert(out.samples.end(), w.samples.begin(), w.samples.begin() + keep);
        out.residual_max = std::max(out.residual_max, w.residual_max);
    }
    return out;
}

// ---- the minimal-side construction --------------------------------------

struct CoreOptions {
    int horizon;
    double tol_conv;
    double h;
    int n_scan;
    double v_bound;
    int threads;
    double ladder_slack;
};

CoreOptions resolve_options(const Field& field, const AsymptoticOptions& opts) {
    CoreOptions c;
    c.horizon = std::max(1, opts.horizon);
    c.tol_conv = opts.tol_conv;
    c.h = opts.h > 0.0 ? opts.h : field.period / 2048.0;
    c.n_scan = opts.n_scan;
    c.v_bound = opts.v_bound;
    if (c.v_bound <= 0.0 && opts.modified) c.v_bound = opts.modified->K;
    if (c.v_bound <= 0.0)
        throw std::invalid_argument(
            "asymptotic: need a velocity bracket (set v_bound or supply a modified field)");
    c.threads = opts.threads;
    c.ladder_slack = opts.ladder_slack;
    return c;
}

Curve lift_impl(const WorkSet& ws, double u0, const CoreOptions& c, const Field& report_field) {
    const double a0 = ws.band.lower.value(0.0);
    const double x0 = ws.target.u0;
    double scale = 1.0 + std::fabs(a0) + std::fabs(x0);
    if (!(u0 > a0 + 1e-12 * scale))
        throw std::invalid_argument("lower_lift: u0 must be strictly above alpha(0)");
    if (!(u0 < x0 - 1e-12 * scale))
        throw std::invalid_argument("lower_lift: u0 must be strictly below the target at 0");

    DirichletSpec d0;
    d0.a = 0.0;
    d0.b = ws.field.period;
    d0.ya = u0;
    d0.yb = u0;
    d0.band = Band::make(ws.band.lower, curve_from_orbit(ws.target, ws.field));

    ShootOptions so;
    so.n_scan = c.n_scan;
    so.h_target = c.h;
    so.threads = c.threads;
    SolutionSet set = shoot_all(ws.field, d0, -c.v_bound, c.v_bound, so);
    if (set.empty())
        throw std::runtime_error("lower_lift: empty Dirichlet set for the return problem");

    const Trajectory& y = set.solutions[static_cast<std::size_t>(set.extremal_max)];
    double dy0 = y.samples.front().v;
    double dyT = y.samples.back().v;
    if (std::fabs(dy0 - dyT) <= 1e-10)
        throw std::runtime_error(
            "lower_lift: u0 lies on a periodic solution - minimality of target violated");
    if (dy0 < dyT)
        throw std::runtime_error(
            "lower_lift: upper-type return solution - minimality of target violated");

    Curve lifted = Curve::from_trajectory(y, ws.field);
    VerifyResult vr = verify_lower(lifted, report_field);
    if (!vr.pass)
        throw std::runtime_error("lower_lift: lifted curve fails verify_lower (" + vr.message +
                                 ")");
    return lifted;
}

AsymptoticRun future_minimal_side(const WorkSet& ws, double u0, const CoreOptions& c) {
    const double T = ws.field.period;
    const double a0 = ws.band.lower.value(0.0);
    const double x0 = ws.target.u0;
    const double scale = 1.0 + std::fabs(a0) + std::fabs(x0);

    if (u0 < a0 - 1e-12 * scale)
        throw std::invalid_argument("asymptotic: u0 must be >= alpha(0)");
    // Half-open admissible interval [alpha(0), x(0)); the one exception is
    // the degenerate band alpha(0) == x(0), whose only run is x itself.
    bool degenerate_trivial =
        std::fabs(u0 - x0) <= 1e-12 * scale && std::fabs(a0 - x0) <= 1e-12 * scale;
    if (!degenerate_trivial && !(u0 < x0 - 1e-12 * scale))
        throw std::invalid_argument(
            "asymptotic: u0 must lie strictly below the target position at t = 0");

    AsymptoticRun run;
    run.u0 = u0;
    run.direction = Direction::Future;
    run.target = ws.target;
    run.tol_conv = c.tol_conv;
    run.used_modified = ws.modified.has_value();

    // Lift when the start is strictly inside the band.
    Curve barrier = ws.band.lower;
    if (u0 > a0 + 1e-12 * scale) {
        barrier = lift_impl(ws, u0, c, ws.original);
        run.lifted_barrier = barrier;
    }

    Band dirichlet_band = Band::make(barrier, curve_from_orbit(ws.target, ws.field));
    const long spt = std::lround(T / c.h);

    // (D_1) by bracketed single shooting; the maximal solution seeds the
    // rest of the sequence.
    DirichletSpec d1;
    d1.a = 0.0;
    d1.b = T;
    d1.ya = u0;
    d1.yb = ws.target.u0;
    d1.band = dirichlet_band;
    ShootOptions so;
    so.n_scan = c.n_scan;
    so.h_target = c.h;
    so.threads = c.threads;
    SolutionSet s1 = shoot_all(ws.field, d1, -c.v_bound, c.v_bound, so);
    if (s1.empty())
        throw std::runtime_error("asymptotic: Dirichlet enumeration empty for (D_1)");
    Trajectory y_prev = s1.solutions[static_cast<std::size_t>(s1.extremal_max)];
    run.sequence_log.push_back({1, s1.v0[static_cast<std::size_t>(s1.extremal_max)], 0.0});

    const double tol_ms = 1e-11 * (1.0 + std::fabs(ws.target.u0));
    for (int n = 2; n <= c.horizon; ++n) {
        // Warm start from y_{n-1} capped with the target orbit state.
        std::vector<double> X(2 * n - 1, 0.0);
        X[0] = y_prev.samples.front().v;
        for (int k = 1; k <= n - 2; ++k) {
            const auto& s = y_prev.samples[static_cast<std::size_t>(k) * spt];
            X[2 * k - 1] = s.u;
            X[2 * k] = s.v;
        }
        X[2 * (n - 1) - 1] = ws.target.u0;
        X[2 * (n - 1)] = ws.target.v0;

        WindowSolve sol =
            multiple_shooting(ws.field, u0, ws.target.u0, n, std::move(X), c.h, tol_ms, c.threads);
        if (!sol.converged)
            throw std::runtime_error("asymptotic: window shooting for (D_" + std::to_string(n) +
                                     ") did not converge");
        Trajectory y_n = assemble_windows(ws.field, u0, n, sol.X, c.h);

        // Phase 1b: the sequence is non-increasing on the common domain.
        double sup_delta = 0.0;
        for (std::size_t i = 0; i < y_prev.samples.size(); ++i) {
            double diff = y_n.samples[i].u - y_prev.samples[i].u;
            sup_delta = std::max(sup_delta, std::fabs(diff));
            if (diff > c.ladder_slack)
                throw std::runtime_error(
                    "asymptotic: phase-1b ordering violated at t = " +
                    std::to_string(y_n.samples[i].t) + " for n = " + std::to_string(n));
        }
        // Phase 1a: each y_n increases across one period.
        for (std::size_t i = static_cast<std::size_t>(spt); i < y_n.samples.size(); ++i) {
            if (y_n.samples[i - static_cast<std::size_t>(spt)].u >
                y_n.samples[i].u + c.ladder_slack)
                throw std::runtime_error("asymptotic: phase-1a monotonicity violated for n = " +
                                         std::to_string(n));
        }
        // Stay between the barrier and the target.
        for (const auto& s : y_n.samples) {
            if (s.u < dirichlet_band.lower.value(s.t) - 1e-7 ||
                s.u > dirichlet_band.upper.value(s.t) + 1e-7)
                throw std::runtime_error("asymptotic: y_n left the Dirichlet band for n = " +
                                         std::to_string(n));
        }

        run.sequence_log.push_back({n, sol.X[0], sup_delta});
        y_prev = std::move(y_n);
    }

    run.limit = std::move(y_prev);

    // Convergence profile d_n = sup_{[0,T]} |u(t+nT)-x(t)| + |u'(t+nT)-x'(t)|.
    const auto& xs = ws.target.orbit.samples;
    for (int n = 0; n < c.horizon; ++n) {
        double d = 0.0;
        for (long j = 0; j <= spt; ++j) {
            const auto& s = run.limit.samples[static_cast<std::size_t>(n) * spt + j];
            const auto& x = xs[static_cast<std::size_t>(j)];
            d = std::max(d, std::fabs(s.u - x.u) + std::fabs(s.v - x.v));
        }
        run.convergence_profile.push_back(d);
    }

    // Eq.(7) ladder on the limit (same as phase 1a, kept for the record).
    for (std::size_t i = static_cast<std::size_t>(spt); i < run.limit.samples.size(); ++i) {
        if (run.limit.samples[i - static_cast<std::size_t>(spt)].u >
            run.limit.samples[i].u + c.ladder_slack)
            throw std::runtime_error("asymptotic: Eq.(7) ladder violated on the limit");
    }

    // The profile must not increase past its maximum.
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < run.convergence_profile.size(); ++i)
        if (run.convergence_profile[i] > run.convergence_profile[argmax]) argmax = i;
    for (std::size_t i = argmax; i + 1 < run.convergence_profile.size(); ++i) {
        double a = run.convergence_profile[i], b = run.convergence_profile[i + 1];
        if (b > a + std::max(1e-10, 1e-6 * a))
            throw std::runtime_error("asymptotic: convergence profile increases past its maximum");
    }

    if (run.convergence_profile.size() >= 2) {
        double dN1 = run.convergence_profile.back();
        double dN2 = run.convergence_profile[run.convergence_profile.size() - 2];
        run.rho_estimate = dN2 > 0.0 ? dN1 / dN2 : 0.0;
    }

    run.converged = run.convergence_profile.back() < c.tol_conv;
    if (!run.converged)
        throw NotConvergedError(
            "asymptotic: not converged at horizon N = " + std::to_string(c.horizon) +
                " (d_{N-1} = " + std::to_string(run.convergence_profile.back()) + ")",
            run.convergence_profile);

    // Under a modified field the limit must be recognised as a solution of
    // the original equation.
    if (ws.modified) {
        FilterResult fr = same_solution_filter(*ws.modified, run.limit);
        if (fr.origin != SolutionOrigin::OriginalEquation)
            throw std::runtime_error(
                "asymptotic: limit trajectory not certified as an original-equation solution");
    }
    return run;
}

WorkSet make_workset(const Field& field, const Band& band, const PeriodicOrbit& target,
                     const AsymptoticOptions& opts, double h) {
    WorkSet ws;
    ws.original = field;
    ws.field = opts.modified ? opts.modified->as_field() : field;
    ws.band = band;
    ws.modified = opts.modified;
    ws.target = reintegrate_target(ws.field, target, h);
    return ws;
}

WorkSet mirror_workset(const WorkSet& ws) {
    WorkSet m;
    m.original = reflect_position_field(ws.original);
    m.band = Band::make(ws.band.upper.negated(), ws.band.lower.negated());
    m.target = reflect_orbit(ws.target);
    if (ws.modified) {
        m.modified = reflect_modified(*ws.modified, reflect_position_field(ws.modified->base),
                                      m.band);
        m.field = m.modified->as_field();
    } else {
        m.field = m.original;
    }
    return m;
}

AsymptoticRun reflect_run_back(AsymptoticRun run) {
    run.mirrored = true;
    run.u0 = -run.u0;
    run.target = reflect_orbit(run.target);
    for (auto& s : run.limit.samples) {
        s.u = -s.u;
        s.v = -s.v;
    }
    if (run.lifted_barrier) run.lifted_barrier = run.lifted_barrier->negated();
    return run;
}

}  // namespace

AsymptoticRun asymptotic_future(const Field& field, const Band& band,
                                const PeriodicOrbit& target, double u0,
                                const AsymptoticOptions& opts) {
    CoreOptions c = resolve_options(field, opts);
    WorkSet ws = make_workset(field, band, target, opts, c.h);
    double scale = 1.0 + std::fabs(target.u0);
    if (u0 > target.u0 + 1e-12 * scale) {
        // Approach the maximal solution from above: reflect positions.
        WorkSet m = mirror_workset(ws);
        AsymptoticRun run = future_minimal_side(m, -u0, c);
        return reflect_run_back(std::move(run));
    }
    return future_minimal_side(ws, u0, c);
}

AsymptoticRun asymptotic_past(const Field& field, const Band& band,
                              const PeriodicOrbit& target, double u0,
                              const AsymptoticOptions& opts) {
    // Reverse time, run the future construction, map back.
    Field rfield = reverse_field(field);
    Band rband = Band::make(band.lower.reflected_in_time(), band.upper.reflected_in_time());

    AsymptoticOptions ropts = opts;
    if (opts.modified) {
        ModifiedField rm;
        rm.base = reverse_field(opts.modified->base);
        rm.band = rband;
        rm.phi = opts.modified->phi;
        rm.K = opts.modified->K;
        rm.epsilon = opts.modified->epsilon;
        rm.M = opts.modified->M;
        rm.b_bound = opts.modified->b_bound;
        ropts.modified = rm;
    }

    // w(t) = x(-t): reversed target orbit.
    PeriodicOrbit rtarget = target;
    rtarget.u0 = target.u0;
    rtarget.v0 = -target.v0;
    rtarget.orbit = Trajectory{};  // re-integrated inside the run

    AsymptoticRun run = asymptotic_future(rfield, rband, rtarget, u0, ropts);

    // u_l(t) = w(-t): reflect the reversed-problem limit onto [-N T, 0].
    run.direction = Direction::Past;
    run.target = target;
    std::vector<StateSample> reflected;
    reflected.reserve(run.limit.samples.size());
    for (std::size_t i = run.limit.samples.size(); i-- > 0;) {
        const auto& s = run.limit.samples[i];
        reflected.push_back({-s.t, s.u, -s.v});
    }
    run.limit.samples = std::move(reflected);
    if (run.lifted_barrier) run.lifted_barrier = run.lifted_barrier->reflected_in_time();
    return run;
}

Curve lower_lift(const Field& field, const Band& band, const PeriodicOrbit& target,
                 double u0, const AsymptoticOptions& opts) {
    CoreOptions c = resolve_options(field, opts);
    WorkSet ws = make_workset(field, band, target, opts, c.h);
    return lift_impl(ws, u0, c, field);
}

ManifoldSample manifold_sweep(const Field& field, const Band& band,
                              const PeriodicOrbit& target,
                              const std::vector<double>& u0_list,
                              const AsymptoticOptions& opts, bool future, bool past) {
    ManifoldSample sample;
    struct Slot {
        std::optional<AsymptoticRun> fut, pst;
        std::string fut_err, pst_err;
    };
    std::vector<Slot> slots(u0_list.size());

    AsymptoticOptions inner = opts;
    inner.threads = 1;  // parallelism lives across the positions
    parallel_for(u0_list.size(), opts.threads, [&](std::size_t i) {
        if (future) {
            try {
                slots[i].fut = asymptotic_future(field, band, target, u0_list[i], inner);
            } catch (const std::exception& e) {
                slots[i].fut_err = e.what();
            }
        }
        if (past) {
            try {
                slots[i].pst = asymptotic_past(field, band, target, u0_list[i], inner);
            } catch (const std::exception& e) {
                slots[i].pst_err = e.what();
            }
        }
    });

    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (future) {
            if (slots[i].fut) {
                sample.points.push_back(
                    {u0_list[i], slots[i].fut->start_velocity(), Direction::Future});
                sample.runs.push_back(std::move(*slots[i].fut));
            } else {
                sample.failures.push_back({u0_list[i], "future: " + slots[i].fut_err});
            }
        }
        if (past) {
            if (slots[i].pst) {
                sample.points.push_back(
                    {u0_list[i], slots[i].pst->start_velocity(), Direction::Past});
                sample.runs.push_back(std::move(*slots[i].pst));
            } else {
                sample.failures.push_back({u0_list[i], "past: " + slots[i].pst_err});
            }
        }
    }
    return sample;
}

}  // namespace bandode
