#include "bandode/curve.hpp"

#include <algorithm>
#include <cmath>

namespace bandode {

namespace {

constexpr double kPi = 3.14159265358979323846;

// High-order finite differences for expression-backed segments.  Central
// 5-point stencils inside, one-sided 5-point at the edges; the step is kept
// clear of the segment boundaries so stencils never straddle a corner.
struct FdEval {
    std::shared_ptr<ExprProgram> prog;
    double t0, t1;

    double f(double t) const { return prog->eval1(t); }

    double d1(double t) const {
        double d = step(t);
        if (t - 2 * d >= t0 && t + 2 * d <= t1)
            return (-f(t + 2 * d) + 8 * f(t + d) - 8 * f(t - d) + f(t - 2 * d)) / (12 * d);
        if (t + 4 * d <= t1)
            return (-25 * f(t) + 48 * f(t + d) - 36 * f(t + 2 * d) + 16 * f(t + 3 * d) -
                    3 * f(t + 4 * d)) /
                   (12 * d);
        return (25 * f(t) - 48 * f(t - d) + 36 * f(t - 2 * d) - 16 * f(t - 3 * d) +
                3 * f(t - 4 * d)) /
               (12 * d);
    }

    double d2(double t) const {
        double d = step(t);
        if (t - 2 * d >= t0 && t + 2 * d <= t1)
            return (-f(t + 2 * d) + 16 * f(t + d) - 30 * f(t) + 16 * f(t - d) -
                    f(t - 2 * d)) /
                   (12 * d * d);
        if (t + 5 * d <= t1)
            return (45 * f(t) - 154 * f(t + d) + 214 * f(t + 2 * d) - 156 * f(t + 3 * d) +
                    61 * f(t + 4 * d) - 10 * f(t + 5 * d)) /
                   (12 * d * d);
        return (45 * f(t) - 154 * f(t - d) + 214 * f(t - 2 * d) - 156 * f(t - 3 * d) +
                61 * f(t - 4 * d) - 10 * f(t - 5 * d)) /
               (12 * d * d);
    }

    double step(double t) const {
        double base = 1e-3 * (1.0 + std::fabs(t));
        return std::min(base, (t1 - t0) / 8.0);
    }
};

CurveSegment expr_segment(double t0, double t1, const ExprAst& ast) {
    auto prog = std::make_shared<ExprProgram>(ast);
    CurveSegment seg;
    seg.t0 = t0;
    seg.t1 = t1;
    if (!ast.uses_variable("t")) {
        double c = prog->eval1(0.0);
        seg.value = [c](double) { return c; };
        seg.d1 = [](double) { return 0.0; };
        seg.d2 = [](double) { return 0.0; };
    } else {
        FdEval fd{prog, t0, t1};
        seg.value = [prog](double t) { return prog->eval1(t); };
        seg.d1 = [fd](double t) { return fd.d1(t); };
        seg.d2 = [fd](double t) { return fd.d2(t); };
    }
    return seg;
}

// Quintic Hermite data for one trajectory mesh cell.
struct QuinticCell {
    double t0, h;
    double u, v, a;       // value, first, second derivative at the left end
    double c3, c4, c5;

    double value(double t) const {
        double s = t - t0;
        return u + s * (v + s * (0.5 * a + s * (c3 + s * (c4 + s * c5))));
    }
    double d1(double t) const {
        double s = t - t0;
        return v + s * (a + s * (3 * c3 + s * (4 * c4 + s * 5 * c5)));
    }
    double d2(double t) const {
        double s = t - t0;
        return a + s * (6 * c3 + s * (12 * c4 + s * 20 * c5));
    }
};

struct QuinticData {
    std::vector<double> knots;
    std::vector<QuinticCell> cells;

    std::size_t cell_of(double t) const {
        auto it = std::upper_bound(knots.begin(), knots.end(), t);
        std::size_t idx = (it == knots.begin()) ? 0 : static_cast<std::size_t>(it - knots.begin()) - 1;
        return std::min(idx, cells.size() - 1);
    }
};

}  // namespace

Curve make_curve(double period, std::vector<double> bps, std::vector<CurveSegment> segs,
                 bool constant) {
    Curve c;
    c.period_ = period;
    c.breakpoints_ = std::move(bps);
    c.segments_ = std::move(segs);
    c.constant_ = constant;
    return c;
}

Curve Curve::constant(double value, double period) {
    CurveSegment seg;
    seg.t0 = 0.0;
    seg.t1 = period;
    seg.value = [value](double) { return value; };
    seg.d1 = [](double) { return 0.0; };
    seg.d2 = [](double) { return 0.0; };
    return make_curve(period, {0.0, period}, {seg}, true);
}

Curve Curve::from_expr(const std::string& src, double period,
                       const std::map<std::string, double>& params) {
    if (!(period > 0.0)) throw std::invalid_argument("curve period must be positive");
    ExprAst ast = parse_expr(src, {"t"}, params);
    if (!ast.uses_variable("t")) {
        ExprProgram prog(ast);
        return Curve::constant(prog.eval1(0.0), period);
    }
    return make_curve(period, {0.0, period}, {expr_segment(0.0, period, ast)}, false);
}

Curve Curve::from_segments(const std::vector<std::pair<double, std::string>>& decls,
                           double period, const std::map<std::string, double>& params) {
    if (decls.empty()) throw std::invalid_argument("curve needs at least one segment");
    if (std::fabs(decls.front().first) > 1e-12)
        throw std::invalid_argument("first curve breakpoint must be 0");
    std::vector<double> bps;
    std::vector<CurveSegment> segs;
    for (std::size_t i = 0; i < decls.size(); ++i) {
        double a = decls[i].first;
        double b = (i + 1 < decls.size()) ? decls[i + 1].first : period;
        if (!(b > a))
            throw std::invalid_argument("curve breakpoints must be strictly increasing");
        ExprAst ast = parse_expr(decls[i].second, {"t"}, params);
        bps.push_back(a);
        segs.push_back(expr_segment(a, b, ast));
    }
    bps.push_back(period);
    return make_curve(period, std::move(bps), std::move(segs), false);
}

Curve Curve::from_trajectory(const Trajectory& traj, const Field& field) {
    if (traj.samples.size() < 3)
        throw std::invalid_argument("trajectory too short to build a curve");
    double T = field.period;
    if (std::fabs(traj.t_start()) > 1e-9 || std::fabs(traj.t_end() - T) > 1e-9 * (1.0 + T))
        throw std::invalid_argument("trajectory must span exactly [0, T]");

    auto data = std::make_shared<QuinticData>();
    std::size_t n = traj.samples.size();
    data->knots.reserve(n);
    data->cells.reserve(n - 1);
    std::vector<double> acc(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = traj.samples[i];
        acc[i] = -field.rhs(s.t, s.u, s.v);
        data->knots.push_back(s.t);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto& L = traj.samples[i];
        const auto& R = traj.samples[i + 1];
        double h = R.t - L.t;
        QuinticCell cell;
        cell.t0 = L.t;
        cell.h = h;
        cell.u = L.u;
        cell.v = L.v;
        cell.a = acc[i];
        double P = (R.u - (L.u + L.v * h + 0.5 * acc[i] * h * h)) / (h * h * h);
        double Q = (R.v - (L.v + acc[i] * h)) / (h * h);
        double Rr = (acc[i + 1] - acc[i]) / h;
        double c5 = (Rr - 6.0 * Q + 12.0 * P) / (2.0 * h * h);
        double c4 = ((Q - 3.0 * P) - 2.0 * c5 * h * h) / h;
        double c3 = P - c4 * h - c5 * h * h;
        cell.c3 = c3;
        cell.c4 = c4;
        cell.c5 = c5;
        data->cells.push_back(cell);
    }

    CurveSegment seg;
    seg.t0 = 0.0;
    seg.t1 = T;
    seg.value = [data](double t) { return data->cells[data->cell_of(t)].value(t); };
    seg.d1 = [data](double t) { return data->cells[data->cell_of(t)].d1(t); };
    seg.d2 = [data](double t) { return data->cells[data->cell_of(t)].d2(t); };
    return make_curve(T, {0.0, T}, {seg}, false);
}

double Curve::reduce(double t) const {
    double r = t - period_ * std::floor(t / period_);
    if (r < 0.0) r += period_;
    if (r >= period_) r -= period_;
    return r;
}

std::size_t Curve::segment_of(double tr) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), tr);
    std::size_t idx = (it == breakpoints_.begin())
                          ? 0
                          : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    return std::min(idx, segments_.size() - 1);
}

double Curve::value(double t) const {
    double tr = reduce(t);
    return segments_[segment_of(tr)].value(tr);
}

double Curve::deriv(double t) const {
    double tr = reduce(t);
    return segments_[segment_of(tr)].d1(tr);
}

double Curve::second(double t) const {
    double tr = reduce(t);
    return segments_[segment_of(tr)].d2(tr);
}

double Curve::left_deriv(std::size_t i) const {
    if (i == 0) {
        const CurveSegment& last = segments_.back();
        return last.d1(last.t1);
    }
    const CurveSegment& seg = segments_[i - 1];
    return seg.d1(seg.t1);
}

double Curve::right_deriv(std::size_t i) const {
    // The breakpoint at T is the wrap point; its right side is the start of
    // the first segment.
    const CurveSegment& seg = segments_[i % segments_.size()];
    return seg.d1(seg.t0);
}

double Curve::max_abs_value(int samples_per_segment) const {
    double m = 0.0;
    for (const auto& seg : segments_) {
        for (int j = 0; j <= samples_per_segment; ++j) {
            double t = seg.t0 + (seg.t1 - seg.t0) * j / samples_per_segment;
            m = std::max(m, std::fabs(seg.value(t)));
        }
    }
    return m;
}

double Curve::max_abs_deriv(int samples_per_segment) const {
    double m = 0.0;
    for (const auto& seg : segments_) {
        for (int j = 0; j <= samples_per_segment; ++j) {
            double t = seg.t0 + (seg.t1 - seg.t0) * j / samples_per_segment;
            m = std::max(m, std::fabs(seg.d1(t)));
        }
    }
    return m;
}

double Curve::min_value(int samples_per_segment) const {
    double m = segments_.front().value(0.0);
    for (const auto& seg : segments_) {
        for (int j = 0; j <= samples_per_segment; ++j) {
            double t = seg.t0 + (seg.t1 - seg.t0) * j / samples_per_segment;
            m = std::min(m, seg.value(t));
        }
    }
    return m;
}

double Curve::max_value(int samples_per_segment) const {
    double m = segments_.front().value(0.0);
    for (const auto& seg : segments_) {
        for (int j = 0; j <= samples_per_segment; ++j) {
            double t = seg.t0 + (seg.t1 - seg.t0) * j / samples_per_segment;
            m = std::max(m, seg.value(t));
        }
    }
    return m;
}

void Curve::validate() const {
    if (segments_.empty()) throw std::invalid_argument("curve has no segments");
    if (std::fabs(breakpoints_.front()) > 1e-12 ||
        std::fabs(breakpoints_.back() - period_) > 1e-12 * (1.0 + period_))
        throw std::invalid_argument("curve breakpoints must start at 0 and end at T");
    for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i)
        if (!(breakpoints_[i + 1] > breakpoints_[i]))
            throw std::invalid_argument("curve breakpoints must be strictly increasing");

    // Value continuity across breakpoints (and the wrap).
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const CurveSegment& seg = segments_[i];
        const CurveSegment& next = segments_[(i + 1) % segments_.size()];
        double left = seg.value(seg.t1);
        double right = next.value(next.t0);
        double tol = 1e-6 * (1.0 + std::fabs(left));
        if (std::fabs(left - right) > tol)
            throw std::invalid_argument("curve value is discontinuous at breakpoint t = " +
                                        std::to_string(seg.t1));
    }

    // Centered differences of value vs the declared derivatives.
    for (const auto& seg : segments_) {
        double len = seg.t1 - seg.t0;
        double d = std::min(1e-4 * (1.0 + std::fabs(seg.t1)), len / 64.0);
        for (int j = 1; j <= 10; ++j) {
            double t = seg.t0 + len * j / 11.0;
            double f0 = seg.value(t);
            double fp = seg.value(t + d), fm = seg.value(t - d);
            double fp2 = seg.value(t + 2 * d), fm2 = seg.value(t - 2 * d);
            double fd1 = (-fp2 + 8 * fp - 8 * fm + fm2) / (12 * d);
            double fd2 = (-fp2 + 16 * fp - 30 * f0 + 16 * fm - fm2) / (12 * d * d);
            double tol = 1e-6 * (1.0 + std::fabs(f0));
            if (std::fabs(fd1 - seg.d1(t)) > tol)
                throw std::invalid_argument(
                    "curve first derivative inconsistent with value at t = " + std::to_string(t));
            if (std::fabs(fd2 - seg.d2(t)) > std::max(tol, 1e-5 * (1.0 + std::fabs(fd2))))
                throw std::invalid_argument(
                    "curve second derivative inconsistent with value at t = " + std::to_string(t));
        }
    }
}

Curve Curve::negated() const {
    std::vector<CurveSegment> segs;
    for (const auto& seg : segments_) {
        CurveSegment s;
        s.t0 = seg.t0;
        s.t1 = seg.t1;
        s.value = [f = seg.value](double t) { return -f(t); };
        s.d1 = [f = seg.d1](double t) { return -f(t); };
        s.d2 = [f = seg.d2](double t) { return -f(t); };
        segs.push_back(std::move(s));
    }
    return make_curve(period_, breakpoints_, std::move(segs), constant_);
}

Curve Curve::reflected_in_time() const {
    double T = period_;
    std::vector<double> bps;
    std::vector<CurveSegment> segs;
    bps.push_back(0.0);
    for (std::size_t k = segments_.size(); k-- > 0;) {
        const CurveSegment& orig = segments_[k];
        double new_t1 = T - orig.t0;
        CurveSegment s;
        s.t0 = T - orig.t1;
        s.t1 = new_t1;
        s.value = [f = orig.value, T](double t) { return f(T - t); };
        s.d1 = [f = orig.d1, T](double t) { return -f(T - t); };
        s.d2 = [f = orig.d2, T](double t) { return f(T - t); };
        segs.push_back(std::move(s));
        bps.push_back(new_t1);
    }
    return make_curve(T, std::move(bps), std::move(segs), constant_);
}

Band Band::make(Curve lower, Curve upper, int samples) {
    if (std::fabs(lower.period() - upper.period()) > 1e-12 * (1.0 + lower.period()))
        throw std::invalid_argument("band curves must share the period");
    Band b;
    b.gap_profile.reserve(samples + 1);
    double T = lower.period();
    for (int i = 0; i <= samples; ++i) {
        double t = T * i / samples;
        double gap = upper.value(t) - lower.value(t);
        if (gap < -1e-12)
            throw std::invalid_argument("band is not ordered: beta < alpha at t = " +
                                        std::to_string(t));
        b.gap_profile.push_back(gap);
    }
    b.lower = std::move(lower);
    b.upper = std::move(upper);
    return b;
}

double Band::full_gap() const { return upper.max_value() - lower.min_value(); }

namespace {

VerifyResult verify_impl(const Curve& curve, const Field& field, const VerifyOptions& opts,
                         bool lower) {
    if (std::fabs(curve.period() - field.period) > 1e-12 * (1.0 + field.period))
        throw std::invalid_argument("curve period does not match field period");
    curve.validate();

    const double sign = lower ? 1.0 : -1.0;
    VerifyResult out;
    out.pass = true;

    // Residuals at Chebyshev nodes per segment; tolerance is set afterwards
    // from the sampled magnitude of f.
    struct Node {
        double t, residual;
    };
    std::vector<Node> nodes;
    double max_f = 0.0;
    const auto& bps = curve.breakpoints();
    for (std::size_t s = 0; s + 1 < bps.size(); ++s) {
        double a = bps[s], b = bps[s + 1];
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int j = 0; j < opts.n_samples; ++j) {
            double theta = kPi * (2.0 * j + 1.0) / (2.0 * opts.n_samples);
            double t = mid + half * std::cos(theta);
            double val = curve.value(t);
            double d1 = curve.deriv(t);
            double d2 = curve.second(t);
            double fv = field.rhs(t, val, d1);
            max_f = std::max(max_f, std::fabs(fv));
            // lower: -c'' - f <= tol ; upper: -(-c'' - f) <= tol
            nodes.push_back({t, sign * (-d2 - fv)});
        }
    }
    double tol_res = opts.tol_res_factor * (1.0 + max_f);
    for (const auto& n : nodes) {
        if (n.residual > tol_res) {
            out.pass = false;
            out.where = VerifyResult::Where::Segment;
            out.t_fail = n.t;
            out.residual = n.residual;
            out.message = std::string(lower ? "lower" : "upper") +
                          " residual violation at t = " + std::to_string(n.t);
            return out;
        }
    }

    // Corner rule at every breakpoint (index 0 is the wrap point).
    for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
        double l = curve.left_deriv(i);
        double r = curve.right_deriv(i);
        double gap = lower ? (l - r) : (r - l);
        if (gap > opts.tol_corner) {
            out.pass = false;
            out.where = VerifyResult::Where::Corner;
            out.t_fail = bps[i];
            out.residual = gap;
            out.message = std::string(lower ? "lower" : "upper") +
                          " corner violation at breakpoint t = " + std::to_string(bps[i]);
            return out;
        }
    }
    return out;
}

}  // namespace

VerifyResult verify_lower(const Curve& curve, const Field& field, const VerifyOptions& opts) {
    return verify_impl(curve, field, opts, true);
}

VerifyResult verify_upper(const Curve& curve, const Field& field, const VerifyOptions& opts) {
    return verify_impl(curve, field, opts, false);
}

OrderingVerdict ordering_gap_check(const Band& band, bool uniqueness_declared, int samples) {
    if (!uniqueness_declared)
        throw std::invalid_argument(
            "ordering_gap_check requires the problem to declare IVP uniqueness");
    double T = band.lower.period();
    double lo = 1e300, hi = -1e300;
    double max_beta = 0.0;
    for (int i = 0; i <= samples; ++i) {
        double t = T * i / samples;
        double gap = band.upper.value(t) - band.lower.value(t);
        lo = std::min(lo, gap);
        hi = std::max(hi, gap);
        max_beta = std::max(max_beta, std::fabs(band.upper.value(t)));
    }
    double tol = 1e-9 * (1.0 + max_beta);
    if (lo > tol) return OrderingVerdict::StrictlyOrdered;
    if (hi < tol) return OrderingVerdict::Identical;
    return OrderingVerdict::Inconsistent;
}

}  // namespace bandode
