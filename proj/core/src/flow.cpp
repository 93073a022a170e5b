#include "bandode/flow.hpp"

#include <algorithm>
#include <cmath>

namespace bandode {

namespace {

inline void rk4_step(const RhsFn& f, double t, double h, double& u, double& v) {
    double k1u = v;
    double k1v = -f(t, u, v);
    double k2u = v + 0.5 * h * k1v;
    double k2v = -f(t + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
    double k3u = v + 0.5 * h * k2v;
    double k3v = -f(t + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
    double k4u = v + h * k3v;
    double k4v = -f(t + h, u + h * k3u, v + h * k3v);
    u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

// RK4 on the state together with two tangent vectors of the variational
// system  d(du,dv)/dt = (dv, -f_u du - f_v dv).
struct VarState {
    double u, v;
    double a1, b1;  // first tangent column
    double a2, b2;  // second tangent column
};

inline VarState var_deriv(const Field& f, double t, const VarState& s) {
    double fu = (*f.f_u)(t, s.u, s.v);
    double fv = (*f.f_v)(t, s.u, s.v);
    VarState d;
    d.u = s.v;
    d.v = -f.rhs(t, s.u, s.v);
    d.a1 = s.b1;
    d.b1 = -fu * s.a1 - fv * s.b1;
    d.a2 = s.b2;
    d.b2 = -fu * s.a2 - fv * s.b2;
    return d;
}

inline void var_rk4_step(const Field& f, double t, double h, VarState& s) {
    auto add = [](const VarState& x, const VarState& y, double c) {
        return VarState{x.u + c * y.u,   x.v + c * y.v,  x.a1 + c * y.a1,
                        x.b1 + c * y.b1, x.a2 + c * y.a2, x.b2 + c * y.b2};
    };
    VarState k1 = var_deriv(f, t, s);
    VarState k2 = var_deriv(f, t + 0.5 * h, add(s, k1, 0.5 * h));
    VarState k3 = var_deriv(f, t + 0.5 * h, add(s, k2, 0.5 * h));
    VarState k4 = var_deriv(f, t + h, add(s, k3, h));
    s.u += h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    s.v += h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    s.a1 += h / 6.0 * (k1.a1 + 2.0 * k2.a1 + 2.0 * k3.a1 + k4.a1);
    s.b1 += h / 6.0 * (k1.b1 + 2.0 * k2.b1 + 2.0 * k3.b1 + k4.b1);
    s.a2 += h / 6.0 * (k1.a2 + 2.0 * k2.a2 + 2.0 * k3.a2 + k4.a2);
    s.b2 += h / 6.0 * (k1.b2 + 2.0 * k2.b2 + 2.0 * k3.b2 + k4.b2);
}

struct StepPlan {
    long n_steps;
    double dt;      // signed full step
    double span;    // signed total
};

StepPlan plan_steps(double t0, double t1, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("integration step h must be positive");
    double span = t1 - t0;
    int dir = span >= 0.0 ? 1 : -1;
    long n = static_cast<long>(std::ceil(std::fabs(span) / h - 1e-12));
    if (n < 1) n = 1;
    return {n, dir * h, span};
}

}  // namespace

double Trajectory::u_at(double t) const {
    if (samples.size() < 2) return samples.empty() ? 0.0 : samples.front().u;
    // Locate the cell; t is monotone in `direction`.
    std::size_t lo = 0, hi = samples.size() - 1;
    auto before = [&](double a, double b) { return direction > 0 ? a <= b : a >= b; };
    if (before(t, samples.front().t)) {
        hi = 1;
    } else if (before(samples.back().t, t)) {
        lo = samples.size() - 2;
        hi = samples.size() - 1;
    } else {
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (before(samples[mid].t, t))
                lo = mid;
            else
                hi = mid;
        }
    }
    const StateSample& A = samples[lo];
    const StateSample& B = samples[hi];
    double dt = B.t - A.t;
    if (dt == 0.0) return A.u;
    double s = (t - A.t) / dt;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    double h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s);
    double h11 = s * s * (s - 1);
    return h00 * A.u + h10 * dt * A.v + h01 * B.u + h11 * dt * B.v;
}

double Trajectory::v_at(double t) const {
    if (samples.size() < 2) return samples.empty() ? 0.0 : samples.front().v;
    std::size_t lo = 0, hi = samples.size() - 1;
    auto before = [&](double a, double b) { return direction > 0 ? a <= b : a >= b; };
    if (before(t, samples.front().t)) {
        hi = 1;
    } else if (before(samples.back().t, t)) {
        lo = samples.size() - 2;
        hi = samples.size() - 1;
    } else {
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (before(samples[mid].t, t))
                lo = mid;
            else
                hi = mid;
        }
    }
    const StateSample& A = samples[lo];
    const StateSample& B = samples[hi];
    double dt = B.t - A.t;
    if (dt == 0.0) return A.v;
    double s = (t - A.t) / dt;
    // derivative of the cubic Hermite basis
    double g00 = (6 * s * s - 6 * s) / dt;
    double g10 = 3 * s * s - 4 * s + 1;
    double g01 = (6 * s - 6 * s * s) / dt;
    double g11 = 3 * s * s - 2 * s;
    return g00 * A.u + g10 * A.v + g01 * B.u + g11 * B.v;
}

Trajectory integrate(const Field& field, double t0, double u0, double v0, double t1,
                     double h, const IntegrateOptions& opts) {
    StepPlan plan = plan_steps(t0, t1, h);
    Trajectory traj;
    traj.step = h;
    traj.direction = plan.dt >= 0.0 ? 1 : -1;
    traj.field_id = opts.field_id;
    traj.samples.reserve(static_cast<std::size_t>(plan.n_steps) + 1);

    double u = u0, v = v0;
    traj.samples.push_back({t0, u, v});
    for (long i = 0; i < plan.n_steps; ++i) {
        double t_i = t0 + static_cast<double>(i) * plan.dt;
        double t_next = (i + 1 == plan.n_steps) ? t1 : t0 + static_cast<double>(i + 1) * plan.dt;
        rk4_step(field.rhs, t_i, t_next - t_i, u, v);
        if (!std::isfinite(u) || !std::isfinite(v))
            throw std::runtime_error("non-finite field value during integration near t = " +
                                     std::to_string(t_i));
        if (std::fabs(u) + std::fabs(v) > opts.blowup_guard) throw BlowupError(t_next);
        traj.samples.push_back({t_next, u, v});
    }

    traj.residual_max = trajectory_residual(traj, field);
    return traj;
}

Endpoint integrate_endpoint(const Field& field, double t0, double u0, double v0,
                            double t1, double h, double blowup_guard) {
    StepPlan plan = plan_steps(t0, t1, h);
    double u = u0, v = v0;
    for (long i = 0; i < plan.n_steps; ++i) {
        double t_i = t0 + static_cast<double>(i) * plan.dt;
        double t_next = (i + 1 == plan.n_steps) ? t1 : t0 + static_cast<double>(i + 1) * plan.dt;
        rk4_step(field.rhs, t_i, t_next - t_i, u, v);
        if (!std::isfinite(u) || !std::isfinite(v) || std::fabs(u) + std::fabs(v) > blowup_guard)
            return {u, v, false};
    }
    return {u, v, true};
}

Field reverse_field(const Field& field) {
    Field r;
    r.period = field.period;
    r.conservative = field.conservative;
    r.autonomous = field.autonomous;
    r.source = field.source.empty() ? "" : "reverse(" + field.source + ")";
    RhsFn base = field.rhs;
    r.rhs = [base](double t, double u, double v) { return base(-t, u, -v); };
    if (field.f_u) {
        RhsFn fu = *field.f_u;
        r.f_u = [fu](double t, double u, double v) { return fu(-t, u, -v); };
    }
    if (field.f_v) {
        RhsFn fv = *field.f_v;
        r.f_v = [fv](double t, double u, double v) { return -fv(-t, u, -v); };
    }
    return r;
}

Field reflect_position_field(const Field& field) {
    Field r;
    r.period = field.period;
    r.conservative = field.conservative;
    r.autonomous = field.autonomous;
    r.source = field.source.empty() ? "" : "reflect(" + field.source + ")";
    RhsFn base = field.rhs;
    r.rhs = [base](double t, double u, double v) { return -base(t, -u, -v); };
    if (field.f_u) {
        RhsFn fu = *field.f_u;
        r.f_u = [fu](double t, double u, double v) { return fu(t, -u, -v); };
    }
    if (field.f_v) {
        RhsFn fv = *field.f_v;
        r.f_v = [fv](double t, double u, double v) { return fv(t, -u, -v); };
    }
    return r;
}

FlowWithJacobian flow_with_jacobian(const Field& field, double t0, double u0, double v0,
                                    double span, double h) {
    FlowWithJacobian out;
    if (field.f_u && field.f_v) {
        StepPlan plan = plan_steps(t0, t0 + span, h);
        VarState s{u0, v0, 1.0, 0.0, 0.0, 1.0};
        for (long i = 0; i < plan.n_steps; ++i) {
            double t_i = t0 + static_cast<double>(i) * plan.dt;
            double t_next =
                (i + 1 == plan.n_steps) ? t0 + span : t0 + static_cast<double>(i + 1) * plan.dt;
            var_rk4_step(field, t_i, t_next - t_i, s);
            if (!std::isfinite(s.u) || !std::isfinite(s.v))
                throw std::runtime_error("non-finite value in variational integration");
        }
        out.u = s.u;
        out.v = s.v;
        out.jac[0][0] = s.a1;
        out.jac[1][0] = s.b1;
        out.jac[0][1] = s.a2;
        out.jac[1][1] = s.b2;
        return out;
    }

    // Central differences on the flow map.
    double delta = 1e-6 * (1.0 + std::fabs(u0) + std::fabs(v0));
    Endpoint c = integrate_endpoint(field, t0, u0, v0, t0 + span, h);
    if (!c.finite) throw std::runtime_error("flow map not finite over the requested span");
    Endpoint up = integrate_endpoint(field, t0, u0 + delta, v0, t0 + span, h);
    Endpoint um = integrate_endpoint(field, t0, u0 - delta, v0, t0 + span, h);
    Endpoint vp = integrate_endpoint(field, t0, u0, v0 + delta, t0 + span, h);
    Endpoint vm = integrate_endpoint(field, t0, u0, v0 - delta, t0 + span, h);
    if (!up.finite || !um.finite || !vp.finite || !vm.finite)
        throw std::runtime_error("flow map not finite under jacobian perturbations");
    out.u = c.u;
    out.v = c.v;
    out.jac[0][0] = (up.u - um.u) / (2.0 * delta);
    out.jac[1][0] = (up.v - um.v) / (2.0 * delta);
    out.jac[0][1] = (vp.u - vm.u) / (2.0 * delta);
    out.jac[1][1] = (vp.v - vm.v) / (2.0 * delta);
    return out;
}

PoincareResult poincare(const Field& field, double u0, double v0, double h) {
    FlowWithJacobian fwj = flow_with_jacobian(field, 0.0, u0, v0, field.period, h);
    PoincareResult res;
    res.start_state = {u0, v0};
    res.end_state = {fwj.u, fwj.v};
    res.jacobian = fwj.jac;
    double det = res.det();
    if (!(det > 0.0))
        throw std::runtime_error("poincare jacobian determinant is not positive (det = " +
                                 std::to_string(det) + ")");
    if (field.conservative && field.autonomous && std::fabs(det - 1.0) > 1e-6)
        throw std::runtime_error(
            "poincare determinant deviates from 1 for a conservative autonomous field");
    return res;
}

std::array<std::complex<double>, 2> eigenvalues_2x2(
    const std::array<std::array<double, 2>, 2>& m) {
    double tr = m[0][0] + m[1][1];
    double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
    return {0.5 * (tr + disc), 0.5 * (tr - disc)};
}

double trajectory_residual(const Trajectory& traj, const Field& field) {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < traj.samples.size(); ++i) {
        const auto& a = traj.samples[i - 1];
        const auto& m = traj.samples[i];
        const auto& b = traj.samples[i + 1];
        double dt = b.t - a.t;
        if (dt == 0.0) continue;
        double vdot = (b.v - a.v) / dt;
        worst = std::max(worst, std::fabs(vdot + field.rhs(m.t, m.u, m.v)));
    }
    return worst;
}

}  // namespace bandode
