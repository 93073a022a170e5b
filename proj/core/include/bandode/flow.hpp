#pragma once

// Initial-value integration of -u'' = f(t,u,u') as the first-order system
// u' = v, v' = -f(t,u,v), with classical fixed-step RK4.  Fixed steps keep
// meshes identical across trajectories so pointwise comparisons need no
// interpolation.

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandode/field.hpp"

namespace bandode {

struct StateSample {
    double t, u, v;
};

struct BlowupError : std::runtime_error {
    double t_blowup;
    explicit BlowupError(double t)
        : std::runtime_error("solution blew up (|u|+|v| > guard) at t = " + std::to_string(t)),
          t_blowup(t) {}
};

struct Trajectory {
    std::vector<StateSample> samples;
    double step = 0.0;   // step magnitude; t_i = t_start + i*direction*step
    int direction = 1;   // +1 forward in time, -1 backward
    double residual_max = 0.0;  // finite-difference residual vs producing field
    std::string field_id;

    std::size_t size() const { return samples.size(); }
    const StateSample& operator[](std::size_t i) const { return samples[i]; }
    double t_start() const { return samples.front().t; }
    double t_end() const { return samples.back().t; }

    // Cubic Hermite interpolation inside the mesh cell containing t.
    double u_at(double t) const;
    double v_at(double t) const;
};

struct IntegrateOptions {
    double blowup_guard = 1e9;
    std::string field_id;
};

// Integrates from (t0, u0, v0) to t1 (t1 < t0 integrates backward) with step
// magnitude h; the final step may be partial so the last sample lands on t1
// exactly.  Throws BlowupError / std::runtime_error on guard violations and
// non-finite field values.
Trajectory integrate(const Field& field, double t0, double u0, double v0, double t1,
                     double h, const IntegrateOptions& opts = {});

// Endpoint-only variant used by shooting scans; no sample storage.
struct Endpoint {
    double u = 0.0, v = 0.0;
    bool finite = false;
};
Endpoint integrate_endpoint(const Field& field, double t0, double u0, double v0,
                            double t1, double h, double blowup_guard = 1e9);

// f_rev(t,u,v) = f(-t,u,-v); w(t) := u(-t) solves the reversed equation iff
// u solves the original.
Field reverse_field(const Field& field);

// Position reflection u -> -u: fhat(t,u,v) = -f(t,-u,-v).  Lower and upper
// solutions swap roles under this map.
Field reflect_position_field(const Field& field);

struct PoincareResult {
    std::array<double, 2> start_state;
    std::array<double, 2> end_state;
    std::array<std::array<double, 2>, 2> jacobian;
    double det() const {
        return jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
    }
};

// Time-T flow map and its 2x2 jacobian (variational system when partials are
// available, central differences with increment 1e-6*(1+|state|) otherwise).
// The determinant must be positive; for conservative autonomous fields it is
// additionally checked against 1 to 1e-6.
PoincareResult poincare(const Field& field, double u0, double v0, double h);

// Flow map over [t0, t0+span] together with its jacobian; poincare() is the
// special case t0 = 0, span = T.
struct FlowWithJacobian {
    double u = 0.0, v = 0.0;
    std::array<std::array<double, 2>, 2> jac{};
};
FlowWithJacobian flow_with_jacobian(const Field& field, double t0, double u0, double v0,
                                    double span, double h);

// Eigenvalues of a 2x2 real matrix (Floquet multipliers of a monodromy).
std::array<std::complex<double>, 2> eigenvalues_2x2(
    const std::array<std::array<double, 2>, 2>& m);

// Max interior finite-difference residual |dv/dt + f(t,u,v)| of a sampled
// trajectory against an arbitrary field.
double trajectory_residual(const Trajectory& traj, const Field& field);

}  // namespace bandode
