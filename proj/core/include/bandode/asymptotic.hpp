#pragma once

// Constructs solutions asymptotic to the minimal (or, mirrored, maximal)
// periodic solution of a band: for n = 1..N solve the Dirichlet problem
//
//   (D_n)  y(0) = u0,  y(nT) = x(nT)
//
// between the (possibly corner-lifted) lower barrier and the target orbit,
// take the maximal solution y_n, and certify the monotone ladder
// y_n(t-T) <= y_n(t),  y_{n+1} <= y_n,  u(t) <= u(t+T) along the way.  The
// horizon-N solution is the reported limit; its per-period C^1 distance to
// the target is the convergence profile.
//
// (D_1) is solved by bracketed single shooting.  For n >= 2 the sensitivity
// of u(nT) to v0 grows like the n-th power of the largest Floquet
// multiplier, which exhausts double precision around n = 3; the solver
// therefore switches to multiple shooting with period-length windows,
// warm-started from y_{n-1}.  Window matching keeps every residual at the
// one-period conditioning level.

#include <optional>
#include <string>
#include <vector>

#include "bandode/curve.hpp"
#include "bandode/dirichlet.hpp"
#include "bandode/field.hpp"
#include "bandode/flow.hpp"
#include "bandode/modify.hpp"
#include "bandode/periodic.hpp"

namespace bandode {

enum class Direction { Future, Past };

struct SequenceEntry {
    int n = 0;
    double v0 = 0.0;             // initial velocity of y_n
    double sup_delta_prev = 0.0; // sup |y_n - y_{n-1}| on the common domain
};

struct AsymptoticRun {
    double u0 = 0.0;
    Direction direction = Direction::Future;
    PeriodicOrbit target;
    std::vector<SequenceEntry> sequence_log;
    Trajectory limit;  // [0, N T] for future runs, [-N T, 0] for past runs
    std::vector<double> convergence_profile;  // d_0 .. d_{N-1}
    bool converged = false;
    double tol_conv = 1e-4;
    double rho_estimate = 0.0;  // d_{N-1} / d_{N-2}
    std::optional<Curve> lifted_barrier;
    bool mirrored = false;       // ran through the u -> -u reflection
    bool used_modified = false;

    double start_velocity() const {
        return direction == Direction::Future ? limit.samples.front().v
                                              : limit.samples.back().v;
    }
};

struct AsymptoticOptions {
    int horizon = 8;  // N
    double tol_conv = 1e-4;
    double h = 0.0;        // 0 -> T/2048
    int n_scan = 512;
    double v_bound = 0.0;  // 0 -> K of `modified` (one of the two must be set)
    int threads = 0;
    std::optional<ModifiedField> modified;  // integrate under ftilde when set
    double ladder_slack = 1e-7;
};

struct NotConvergedError : std::runtime_error {
    std::vector<double> profile;
    NotConvergedError(const std::string& what, std::vector<double> prof)
        : std::runtime_error(what), profile(std::move(prof)) {}
};

// Requires alpha(0) <= u0 < target(0) (or the mirrored condition
// target(0) < u0 <= beta(0), which is handled by position reflection).
AsymptoticRun asymptotic_future(const Field& field, const Band& band,
                                const PeriodicOrbit& target, double u0,
                                const AsymptoticOptions& opts = {});

// Same contract through time reversal; the returned limit satisfies the
// asymptotics as t -> -infinity and is sampled on [-N T, 0].
AsymptoticRun asymptotic_past(const Field& field, const Band& band,
                              const PeriodicOrbit& target, double u0,
                              const AsymptoticOptions& opts = {});

// Corner lift: the maximal solution of y(0) = u0 = y(T) between alpha and
// the target, extended T-periodically.  Its derivative must drop across the
// wrap (y'(0) > y'(T)); equality or the opposite sign contradict the
// minimality of the target and are reported as errors.
Curve lower_lift(const Field& field, const Band& band, const PeriodicOrbit& target,
                 double u0, const AsymptoticOptions& opts = {});

struct ManifoldPoint {
    double u0 = 0.0;
    double v = 0.0;
    Direction direction = Direction::Future;
};

struct ManifoldSample {
    std::vector<ManifoldPoint> points;
    std::vector<std::pair<double, std::string>> failures;  // (u0, reason)
    std::vector<AsymptoticRun> runs;
};

// Stable/unstable-manifold samples: one future and one past run per initial
// position; failures are collected, not fatal.
ManifoldSample manifold_sweep(const Field& field, const Band& band,
                              const PeriodicOrbit& target,
                              const std::vector<double>& u0_list,
                              const AsymptoticOptions& opts = {}, bool future = true,
                              bool past = true);

}  // namespace bandode
