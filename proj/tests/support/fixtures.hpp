#pragma once

// Shared fixtures and independent oracles for the test suites.  Everything
// here is computed from closed forms or brute-force scans, never from the
// code paths under test.

#include <cmath>
#include <functional>
#include <vector>

#include "bandode/curve.hpp"
#include "bandode/field.hpp"
#include "bandode/flow.hpp"

namespace fixtures {

inline constexpr double kPi = 3.14159265358979323846;

// Damped pendulum -u'' = c u' + a sin u as a plain lambda field.
inline bandode::Field pendulum(double c, double a, double T) {
    bandode::Field f;
    f.rhs = [c, a](double, double u, double v) { return c * v + a * std::sin(u); };
    f.f_u = [a](double, double u, double) { return a * std::cos(u); };
    f.f_v = [c](double, double, double) { return c; };
    f.period = T;
    f.conservative = (c == 0.0);
    f.autonomous = true;
    return f;
}

// Conservative pendulum -u'' = a sin u.
inline bandode::Field pendulum_conservative(double a, double T) {
    bandode::Field f;
    f.rhs = [a](double, double u, double) { return a * std::sin(u); };
    f.f_u = [a](double, double u, double) { return a * std::cos(u); };
    f.f_v = [](double, double, double) { return 0.0; };
    f.period = T;
    f.conservative = true;
    f.autonomous = true;
    return f;
}

inline bandode::Field constant_field(double value, double T) {
    bandode::Field f;
    f.rhs = [value](double, double, double) { return value; };
    f.f_u = [](double, double, double) { return 0.0; };
    f.f_v = [](double, double, double) { return 0.0; };
    f.period = T;
    f.conservative = true;
    f.autonomous = true;
    return f;
}

// -u'' = u' (the drifting constants example).
inline bandode::Field linear_drift(double T) {
    bandode::Field f;
    f.rhs = [](double, double, double v) { return v; };
    f.f_u = [](double, double, double) { return 0.0; };
    f.f_v = [](double, double, double) { return 1.0; };
    f.period = T;
    f.conservative = false;
    f.autonomous = true;
    return f;
}

// Saddle eigenvalues of the damped pendulum at u = pi:
// lambda^2 + c lambda - a = 0.
inline double lambda_plus(double c, double a) {
    return 0.5 * (-c + std::sqrt(c * c + 4.0 * a));
}
inline double lambda_minus(double c, double a) {
    return 0.5 * (-c - std::sqrt(c * c + 4.0 * a));
}

// Backward-integration oracle for the stable manifold of the saddle
// (pi, 0): start a small step along the stable eigendirection and flow
// backward; returns samples (u, v) along the lower branch.
inline std::vector<std::pair<double, double>> stable_manifold_oracle(
    double c, double a, double u_stop, double seed = 1e-6) {
    bandode::Field f = pendulum(c, a, 2.0 * kPi);
    double lm = lambda_minus(c, a);
    // Lower branch: u below pi, approaching with positive velocity.
    double u = kPi - seed;
    double v = -seed * lm;  // eigenvector (1, lambda_-) scaled by -seed
    std::vector<std::pair<double, double>> branch;
    double h = 1e-3;
    double t = 0.0;
    for (int i = 0; i < 2000000 && u > u_stop; ++i) {
        branch.push_back({u, v});
        // one RK4 step backward in time
        auto deriv = [&f](double uu, double vv) {
            return std::pair<double, double>{vv, -f.rhs(0.0, uu, vv)};
        };
        auto [k1u, k1v] = deriv(u, v);
        auto [k2u, k2v] = deriv(u - 0.5 * h * k1u, v - 0.5 * h * k1v);
        auto [k3u, k3v] = deriv(u - 0.5 * h * k2u, v - 0.5 * h * k2v);
        auto [k4u, k4v] = deriv(u - h * k3u, v - h * k3v);
        u -= h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        v -= h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        t -= h;
    }
    return branch;
}

// Interpolates the oracle branch at a given position.
inline double manifold_velocity_at(const std::vector<std::pair<double, double>>& branch,
                                   double u0) {
    for (std::size_t i = 1; i < branch.size(); ++i) {
        double ua = branch[i - 1].first, ub = branch[i].first;
        if ((ua - u0) * (ub - u0) <= 0.0) {
            double w = (u0 - ua) / (ub - ua);
            return (1.0 - w) * branch[i - 1].second + w * branch[i].second;
        }
    }
    return branch.back().second;
}

struct ReturnArc {
    double v0;
    double v_end;
    bool in_band;
};

// Brute-force sweep oracle for the return problem u(0) = u(T) = u0: scans
// n_scan initial velocities with a local RK4 stepper (independent of the
// library integrator), bisects every sign change of u(T) - u0, and reports
// the terminal velocity and an in-band flag for each refined arc.
inline std::vector<ReturnArc> return_sweep_oracle(
    const std::function<double(double, double, double)>& rhs, double T, double u0,
    double band_lo, double band_hi, double v_lo, double v_hi, int n_scan,
    int steps = 2048) {
    auto propagate = [&](double v0, bool* in_band) {
        double u = u0, v = v0;
        double h = T / steps;
        bool ok = true;
        for (int i = 0; i < steps; ++i) {
            double t = i * h;
            auto f1u = v, f1v = -rhs(t, u, v);
            auto f2u = v + 0.5 * h * f1v, f2v = -rhs(t + 0.5 * h, u + 0.5 * h * f1u, v + 0.5 * h * f1v);
            auto f3u = v + 0.5 * h * f2v, f3v = -rhs(t + 0.5 * h, u + 0.5 * h * f2u, v + 0.5 * h * f2v);
            auto f4u = v + h * f3v, f4v = -rhs(t + h, u + h * f3u, v + h * f3v);
            u += h / 6 * (f1u + 2 * f2u + 2 * f3u + f4u);
            v += h / 6 * (f1v + 2 * f2v + 2 * f3v + f4v);
            if (u < band_lo - 1e-9 || u > band_hi + 1e-9) ok = false;
        }
        if (in_band) *in_band = ok;
        return std::pair<double, double>{u, v};
    };

    std::vector<ReturnArc> arcs;
    double prev_m = propagate(v_lo, nullptr).first - u0;
    double prev_v = v_lo;
    for (int i = 1; i <= n_scan; ++i) {
        double v0 = v_lo + (v_hi - v_lo) * i / n_scan;
        double m = propagate(v0, nullptr).first - u0;
        if (prev_m == 0.0 || prev_m * m < 0.0) {
            double lo = prev_v, hi = v0, flo = prev_m;
            for (int it = 0; it < 100; ++it) {
                double mid = 0.5 * (lo + hi);
                double fm = propagate(mid, nullptr).first - u0;
                if ((flo <= 0) == (fm <= 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            double root = 0.5 * (lo + hi);
            bool in_band = false;
            auto end = propagate(root, &in_band);
            arcs.push_back({root, end.second, in_band});
        }
        prev_m = m;
        prev_v = v0;
    }
    return arcs;
}

}  // namespace fixtures
