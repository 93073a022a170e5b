#pragma once

// T-periodic solutions inside a band, found as fixed points of the time-T
// flow map: sweep initial states, run damped Newton on the displacement
// (u(T)-u0, v(T)-v0) where the sweep brackets a sign change, deduplicate,
// and mark the pointwise minimal/maximal orbits.

#include <array>
#include <complex>
#include <vector>

#include "bandode/curve.hpp"
#include "bandode/dirichlet.hpp"
#include "bandode/field.hpp"
#include "bandode/flow.hpp"

namespace bandode {

struct PeriodicOrbit {
    Trajectory orbit;  // one period, [0, T]
    double u0 = 0.0, v0 = 0.0;
    double closure_residual = 0.0;  // |u(T)-u(0)| + |v(T)-v(0)|
    std::array<std::complex<double>, 2> floquet{};

    double max_multiplier() const {
        return std::max(std::abs(floquet[0]), std::abs(floquet[1]));
    }
};

struct ExtremalPair {
    std::vector<PeriodicOrbit> orbits;
    int x_min_index = -1;
    int x_max_index = -1;
    bool continuum_suspect = false;  // degeneracy hand-off flag
    int newton_failures = 0;
    int cells_with_roots = 0;
    int cells_scanned = 0;
};

struct FindPeriodicOptions {
    double v_bound = 0.0;  // half-width of the v0 sweep; required (> 0)
    double h = 0.0;        // 0 -> T/2048
    int max_newton = 50;
    double newton_tol = 1e-10;
    double dedup_dist = 1e-7;
    double band_tol = 1e-9;
    int threads = 0;
    bool refine_on_empty = true;  // retry once with doubled grids
};

// Sweeps [alpha(0), beta(0)] x [-v_bound, v_bound] on a grid_u x grid_v cell
// grid.  Throws on an empty result after refinement (an internal
// inconsistency when the band verifies and the Nagumo condition holds).
ExtremalPair find_periodic(const Field& field, const Band& band, int grid_u, int grid_v,
                           const FindPeriodicOptions& opts);

// One period of the orbit as a Curve (quintic interpolation; the orbit is
// polished so the wrap mismatch stays below corner tolerances).
Curve curve_from_orbit(const PeriodicOrbit& orbit, const Field& field);

}  // namespace bandode
