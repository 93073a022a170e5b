#pragma once

// Truncated field construction: replaces f by
//
//   ftilde(t,u,v) = -u + gamma(t,u) + f(t, gamma(t,u), delta(v))
//
// with gamma the vertical clamp onto [alpha(t), beta(t)] and delta the clamp
// onto [-K, K].  ftilde is bounded between the barriers and shares its
// in-band slow solutions with f; K and epsilon are chosen so that the
// defining integral inequalities hold with enough margin that quadrature
// error cannot flip them.

#include <string>

#include "bandode/curve.hpp"
#include "bandode/field.hpp"
#include "bandode/flow.hpp"

namespace bandode {

struct ModifiedField {
    Field base;
    Band band;
    NagumoSpec phi;
    double K = 0.0;        // speed clamp
    double epsilon = 0.0;  // slow-speed threshold
    double M = 0.0;        // sampled sup |ftilde| between the barriers (+10%)
    double b_bound = 0.0;  // sampled sup |ftilde + u| (+10%); -u'' = -u + b form
    std::string warning;   // set for degenerate bands

    double gamma(double t, double u) const;
    double delta(double v) const;
    double eval(double t, double u, double v) const;

    // ftilde packaged as a Field (with piecewise partials when the base has
    // them); conservative/autonomous flags propagate where they survive the
    // construction.
    Field as_field() const;
};

struct BuildModifiedOptions {
    double margin = 1e-3;      // relative margin on the integral inequalities
    int supremum_grid = 64;    // per axis, for M and b_bound
    double h_check = 0.0;      // step for the optional barrier re-verification
};

// Preconditions: the band verifies (checked) and nagumo_check(phi, full gap)
// is Satisfied (checked).  A degenerate band (beta(0) == alpha(0)) is
// accepted with a warning.
ModifiedField build_modified(const Field& field, const Band& band, const NagumoSpec& phi,
                             const BuildModifiedOptions& opts = {});

enum class SolutionOrigin { OriginalEquation, ModifiedOnly };

struct FilterResult {
    SolutionOrigin origin;
    bool in_band = false;
    bool has_slow_sample = false;
    double original_residual = 0.0;
};

// Classifies a trajectory that solves the modified field: it is a solution
// of the original equation iff it stays in the band and is slower than
// epsilon somewhere.  In that case the residual against the ORIGINAL field
// must also be small; a violation is an internal-consistency error (thrown),
// never silently accepted.
FilterResult same_solution_filter(const ModifiedField& mod, const Trajectory& traj,
                                  double residual_tol = 0.0);

}  // namespace bandode
