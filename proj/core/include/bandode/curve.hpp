#pragma once

// Piecewise-C^2 T-periodic curves: the representation for barrier functions
// (lower/upper solutions).  A curve is a list of smooth segments between
// breakpoints 0 = tau_0 < ... < tau_m = T; corners are allowed at the
// breakpoints, with one-sided derivatives supplied by the neighbouring
// segment evaluators.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bandode/expr.hpp"
#include "bandode/field.hpp"
#include "bandode/flow.hpp"

namespace bandode {

struct CurveSegment {
    double t0, t1;
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
};

class Curve {
public:
    Curve() = default;

    static Curve constant(double c, double period);
    // Single smooth segment from an expression in t (parameters resolved).
    static Curve from_expr(const std::string& src, double period,
                           const std::map<std::string, double>& params);
    // Piecewise declaration: (breakpoint, expression) pairs; the first
    // breakpoint must be 0 and breakpoints must be strictly increasing.
    static Curve from_segments(const std::vector<std::pair<double, std::string>>& decls,
                               double period, const std::map<std::string, double>& params);
    // Quintic Hermite interpolation of a sampled solution on [0, T]; the
    // second derivative at the samples is read off the producing field.
    // The periodic extension has its (potential) corner at the wrap point.
    static Curve from_trajectory(const Trajectory& traj, const Field& field);

    double period() const { return period_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    std::size_t segment_count() const { return segments_.size(); }

    double value(double t) const;
    double deriv(double t) const;   // right-sided at breakpoints
    double second(double t) const;

    // One-sided derivatives at breakpoint index i (0 = wrap point, where the
    // left side is the end of the last segment).
    double left_deriv(std::size_t i) const;
    double right_deriv(std::size_t i) const;

    // Sampled sup of |value|, |d1| over the period (includes side limits).
    double max_abs_value(int samples_per_segment = 512) const;
    double max_abs_deriv(int samples_per_segment = 512) const;
    double min_value(int samples_per_segment = 512) const;
    double max_value(int samples_per_segment = 512) const;

    // Segment-consistency check: centered differences of value must
    // reproduce d1 and d2 within 1e-6*(1+|value|) at 10 interior points per
    // segment; value must be continuous across breakpoints and the wrap.
    // Throws std::invalid_argument on violation.
    void validate() const;

    bool is_constant() const { return constant_; }

    Curve negated() const;            // u -> -u
    Curve reflected_in_time() const;  // t -> -t

private:
    double period_ = 1.0;
    std::vector<double> breakpoints_;
    std::vector<CurveSegment> segments_;
    bool constant_ = false;

    double reduce(double t) const;
    std::size_t segment_of(double t_reduced) const;
    friend Curve make_curve(double period, std::vector<double> bps,
                            std::vector<CurveSegment> segs, bool constant);
};

Curve make_curve(double period, std::vector<double> bps, std::vector<CurveSegment> segs,
                 bool constant);

struct Band {
    Curve lower;   // alpha
    Curve upper;   // beta
    std::vector<double> gap_profile;  // sampled beta - alpha

    // Checks alpha <= beta (+1e-12) on a fine sample grid; throws otherwise.
    static Band make(Curve lower, Curve upper, int samples = 2048);

    double gap_at_zero() const { return upper.value(0.0) - lower.value(0.0); }
    double full_gap() const;  // max beta - min alpha (the Nagumo gap)
};

struct VerifyOptions {
    int n_samples = 256;        // Chebyshev nodes per segment
    double tol_corner = 1e-10;
    double tol_res_factor = 1e-8;  // tol_res = factor * (1 + max |f| on samples)
};

struct VerifyResult {
    bool pass = false;
    enum class Where { None, Segment, Corner } where = Where::None;
    double t_fail = 0.0;
    double residual = 0.0;  // signed violation magnitude
    std::string message;
};

// Lower solution check: -c'' - f(t,c,c') <= tol on every segment at
// Chebyshev nodes, and left_deriv <= right_deriv + tol at every breakpoint.
VerifyResult verify_lower(const Curve& curve, const Field& field,
                          const VerifyOptions& opts = {});
// Mirrored: >= -tol on segments, left_deriv >= right_deriv - tol at corners.
VerifyResult verify_upper(const Curve& curve, const Field& field,
                          const VerifyOptions& opts = {});

enum class OrderingVerdict { StrictlyOrdered, Identical, Inconsistent };

// Samples beta - alpha on a fine grid.  Requires the problem to declare
// uniqueness of initial value problems; "Inconsistent" is the diagnostic
// that uniqueness or the Nagumo condition likely fails.
OrderingVerdict ordering_gap_check(const Band& band, bool uniqueness_declared,
                                   int samples = 4096);

}  // namespace bandode
