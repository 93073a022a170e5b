#pragma once

// Dirichlet boundary value problems  -y'' = f(t,y,y'), y(a)=y_a, y(b)=y_b
// solved by shooting: scan the miss function m(v0) = u(b; a, y_a, v0) - y_b
// over a velocity bracket, refine every sign change by bisection, keep the
// solutions that stay inside the band, and mark the pointwise-extremal ones.

#include <string>
#include <vector>

#include "bandode/curve.hpp"
#include "bandode/field.hpp"
#include "bandode/flow.hpp"

namespace bandode {

struct DirichletSpec {
    double a = 0.0, b = 1.0;
    double ya = 0.0, yb = 0.0;
    Band band;
};

struct SolutionSet {
    std::vector<Trajectory> solutions;
    std::vector<double> v0;  // initial velocities, aligned with solutions
    int extremal_max = -1;
    int extremal_min = -1;
    bool dominance_ok = true;  // extremals dominate pointwise at every node
    std::vector<std::string> warnings;

    bool empty() const { return solutions.empty(); }
};

struct ShootOptions {
    int n_scan = 512;
    double h_target = 0.0;   // 0 -> field.period / 2048
    double band_tol = 1e-9;  // in-band slack for keeping a solution
    bool require_extremal_domination = true;
    int threads = 0;
    double blowup_guard = 1e9;
};

// Scans [v_lo, v_hi]; throws std::invalid_argument on a bad bracket and when
// the miss function is non-finite at the bracket endpoints.  An empty result
// is NOT a proof of nonexistence, just "no in-band solution found in
// bracket".
SolutionSet shoot_all(const Field& field, const DirichletSpec& spec, double v_lo,
                      double v_hi, const ShootOptions& opts = {});

struct RestrictionVerdict {
    bool pass = false;
    double sup_diff_max = 0.0;  // restricted vs restriction, maximal solution
    double sup_diff_min = 0.0;  // dito, minimal solution
};

// Consistency diagnostic: the restriction of an extremal solution to
// [sub_a, sub_b] must be the extremal solution of the restricted problem
// (within 1e-6 sup-norm).
RestrictionVerdict restriction_check(const Field& field, const SolutionSet& set,
                                     const DirichletSpec& spec, double sub_a, double sub_b,
                                     double v_lo, double v_hi,
                                     const ShootOptions& opts = {});

}  // namespace bandode
