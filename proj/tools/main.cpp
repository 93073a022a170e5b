// Command-line front end: loads a problem file, dispatches to the library,
// and writes deterministic reports (canonical JSON + CSV/SVG artifacts)
// under <out-root>/<problem>/<command>/.
//
// Exit codes: 0 pass, 2 verdict-negative (verification fail, inconclusive
// classification, fixture mismatch), 1 error.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "bandode/asymptotic.hpp"
#include "bandode/banddyn.hpp"
#include "bandode/curve.hpp"
#include "bandode/dirichlet.hpp"
#include "bandode/field.hpp"
#include "bandode/flow.hpp"
#include "bandode/modify.hpp"
#include "bandode/periodic.hpp"
#include "bandode/problem.hpp"
#include "bandode/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bandode;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitNegative = 2;

struct Context {
    ProblemFile problem;
    std::string out_root;
    std::string overrides_digest;

    fs::path command_dir(const std::string& command) const {
        fs::path dir = fs::path(out_root) / problem.name / command;
        fs::create_directories(dir);
        return dir;
    }
};

json make_report(const Context& ctx, const std::string& command, json outputs) {
    json report;
    report["command"] = command;
    report["problem"] = ctx.problem.name;
    report["inputs_digest"] = fnv1a64_hex(ctx.problem.raw_bytes + "|" + ctx.overrides_digest);
    report["outputs"] = std::move(outputs);
    report["deterministic"] = true;
    report["note"] = "seed-free and reproducible; identical inputs give byte-identical artifacts";
    return report;
}

void write_report(const Context& ctx, const std::string& command, const json& report) {
    write_text_file((ctx.command_dir(command) / "report.json").string(), canonical_json(report));
}

double resolve_v_bound(const Context& ctx, const Field& field, const Band& band,
                       std::optional<ModifiedField>& modified) {
    if (ctx.problem.solver.v_bound > 0.0) return ctx.problem.solver.v_bound;
    auto phi = ctx.problem.make_phi();
    if (!phi)
        throw ProblemError(
            "no velocity bracket available: set solver.v_bound or provide \"phi\"");
    modified = build_modified(field, band, *phi);
    return modified->K;
}

const char* verdict_name(OrderingVerdict v) {
    switch (v) {
        case OrderingVerdict::StrictlyOrdered: return "strictly-ordered";
        case OrderingVerdict::Identical: return "identical";
        case OrderingVerdict::Inconsistent: return "INCONSISTENT";
    }
    return "?";
}

const char* verdict_name(NagumoVerdict v) {
    switch (v) {
        case NagumoVerdict::Satisfied: return "satisfied";
        case NagumoVerdict::Violated: return "violated";
        case NagumoVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

const char* verdict_name(ClassifyVerdict v) {
    switch (v) {
        case ClassifyVerdict::AlphaReceives: return "alpha-receives";
        case ClassifyVerdict::BetaReceives: return "beta-receives";
        case ClassifyVerdict::MixedInconclusive: return "mixed/inconclusive";
    }
    return "?";
}

const char* verdict_name(DegeneracyVerdict v) {
    switch (v) {
        case DegeneracyVerdict::Degenerate: return "degenerate";
        case DegeneracyVerdict::GapFound: return "gap-found";
        case DegeneracyVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

const char* tag_name(StabilityTag t) {
    switch (t) {
        case StabilityTag::UnstableCertified: return "unstable-certified";
        case StabilityTag::FloquetUnstable: return "floquet-unstable";
        case StabilityTag::NumericallyStable: return "numerically-stable";
        case StabilityTag::Inconclusive: return "inconclusive";
    }
    return "?";
}

const char* sign_name(FamilySign s) {
    switch (s) {
        case FamilySign::AllPositive: return "all-positive";
        case FamilySign::AllNegative: return "all-negative";
        case FamilySign::Mixed: return "mixed";
        case FamilySign::Incomplete: return "incomplete";
    }
    return "?";
}

json orbit_json(const PeriodicOrbit& orb) {
    json j;
    j["u0"] = orb.u0;
    j["v0"] = orb.v0;
    j["closure_residual"] = orb.closure_residual;
    j["floquet"] = {orb.floquet[0].real(), orb.floquet[0].imag(), orb.floquet[1].real(),
                    orb.floquet[1].imag()};
    return j;
}

// ---- command implementations ---------------------------------------------

int cmd_verify(Context& ctx) {
    const ProblemFile& p = ctx.problem;
    Field field = p.make_field();
    Curve alpha = p.make_alpha();
    Curve beta = p.make_beta();
    Band band = p.make_band();

    json out;
    VerifyResult va = verify_lower(alpha, field);
    VerifyResult vb = verify_upper(beta, field);
    out["alpha"] = {{"pass", va.pass}, {"message", va.pass ? "lower solution" : va.message}};
    out["beta"] = {{"pass", vb.pass}, {"message", vb.pass ? "upper solution" : vb.message}};

    bool ok = va.pass && vb.pass;

    if (p.uniqueness) {
        OrderingVerdict ov = ordering_gap_check(band, true);
        out["ordering"] = verdict_name(ov);
        ok = ok && ov != OrderingVerdict::Inconsistent;
    } else {
        out["ordering"] = "skipped (uniqueness not declared)";
    }

    if (auto phi = p.make_phi()) {
        NagumoResult nr = nagumo_check(*phi, band.full_gap());
        json nj;
        nj["verdict"] = verdict_name(nr.verdict);
        nj["partial_integral"] = nr.partial_integral;
        if (nr.verdict == NagumoVerdict::Satisfied) nj["K_candidate"] = nr.K_candidate;
        if (!nr.note.empty()) nj["note"] = nr.note;
        out["nagumo"] = nj;
        ok = ok && nr.verdict == NagumoVerdict::Satisfied;
    } else {
        out["nagumo"] = "not provided";
    }

    write_report(ctx, "verify", make_report(ctx, "verify", out));
    return ok ? kExitPass : kExitNegative;
}

int cmd_modify(Context& ctx) {
    const ProblemFile& p = ctx.problem;
    Field field = p.make_field();
    Band band = p.make_band();
    auto phi = p.make_phi();
    if (!phi) throw ProblemError("modify needs a \"phi\" declaration");
    ModifiedField mod = build_modified(field, band, *phi);
    if (!mod.warning.empty()) std::cerr << "warning: " << mod.warning << "\n";

    json out;
    out["K"] = mod.K;
    out["epsilon"] = mod.epsilon;
    out["M"] = mod.M;
    out["b_bound"] = mod.b_bound;
    write_report(ctx, "modify", make_report(ctx, "modify", out));
    return kExitPass;
}

int cmd_dirichlet(Context& ctx, double a, double b, double ya, double yb, double vlo,
                  double vhi) {
    const ProblemFile& p = ctx.problem;
    Field field = p.make_field();
    Band band = p.make_band();
    if (b == 0.0) b = p.T;
    if (vlo == 0.0 && vhi == 0.0) {
        std::optional<ModifiedField> modified;
        double K = resolve_v_bound(ctx, field, band, modified);
        vlo = -K;
        vhi = K;
    }
    DirichletSpec spec{a, b, ya, yb, band};
    ShootOptions so;
    so.n_scan = p.solver.n_scan;
    so.h_target = p.solver.h;
    so.threads = p.solver.threads;
    SolutionSet set = shoot_all(field, spec, vlo, vhi, so);

    fs::path dir = ctx.command_dir("dirichlet");
    json out;
    out["count"] = set.solutions.size();
    out["extremal_max"] = set.extremal_max;
    out["extremal_min"] = set.extremal_min;
    out["v0_list"] = set.v0;
    for (std::size_t i = 0; i < set.solutions.size(); ++i)
        write_trajectory_csv(set.solutions[i], (dir / ("solution_" + std::to_string(i) + ".csv")).string());
    write_report(ctx, "dirichlet", make_report(ctx, "dirichlet", out));
    return set.empty() ? kExitNegative : kExitPass;
}

struct PeriodicArtifacts {
    ExtremalPair pair;
    Field field;
    Band band;
    std::optional<ModifiedField> modified;
};

PeriodicArtifacts run_periodic(Context& ctx) {
    const ProblemFile& p = ctx.problem;
    PeriodicArtifacts art;
    art.field = p.make_field();
    art.band = p.make_band();
    double K = resolve_v_bound(ctx, art.field, art.band, art.modified);
    FindPeriodicOptions fp;
    fp.v_bound = K;
    fp.h = p.solver.h;
    fp.threads = p.solver.threads;
    art.pair = find_periodic(art.field, art.band, p.solver.grid_u, p.solver.grid_v, fp);
    return art;
}

json periodic_json(const PeriodicArtifacts& art) {
    json out;
    out["orbits"] = json::array();
    for (const auto& orb : art.pair.orbits) out["orbits"].push_back(orbit_json(orb));
    out["x_min_index"] = art.pair.x_min_index;
    out["x_max_index"] = art.pair.x_max_index;
    out["continuum_suspect"] = art.pair.continuum_suspect;
    return out;
}

int cmd_periodic(Context& ctx) {
    PeriodicArtifacts art = run_periodic(ctx);
    fs::path dir = ctx.command_dir("periodic");
    for (std::size_t i = 0; i < art.pair.orbits.size(); ++i)
        write_trajectory_csv(art.pair.orbits[i].orbit,
                             (dir / ("orbit_" + std::to_string(i) + ".csv")).string());
    write_report(ctx, "periodic", make_report(ctx, "periodic", periodic_json(art)));
    return kExitPass;
}

int cmd_asymptotic(Context& ctx, std::string target_sel, std::string direction,
                   std::vector<double> u0_list) {
    const ProblemFile& p = ctx.problem;
    PeriodicArtifacts art = run_periodic(ctx);
    const PeriodicOrbit& target =
        art.pair.orbits[static_cast<std::size_t>(target_sel == "max" ? art.pair.x_max_index
                                                                     : art.pair.x_min_index)];
    double edge = (target_sel == "max") ? art.band.upper.value(0.0) : art.band.lower.value(0.0);
    if (u0_list.empty()) {
        for (int i = 0; i < 8; ++i)
            u0_list.push_back(edge + (target.u0 - edge) * static_cast<double>(i) / 8.0);
    }

    AsymptoticOptions ao;
    ao.horizon = p.solver.horizon;
    ao.tol_conv = p.solver.tol_conv;
    ao.h = p.solver.h;
    ao.n_scan = p.solver.n_scan;
    ao.threads = p.solver.threads;
    ao.modified = art.modified;
    ao.v_bound = p.solver.v_bound;

    bool want_future = direction == "both" || direction == "future";
    bool want_past = direction == "both" || direction == "past";
    ManifoldSample sample =
        manifold_sweep(art.field, art.band, target, u0_list, ao, want_future, want_past);

    fs::path dir = ctx.command_dir("asymptotic");
    std::string manifold_csv = "u0,v,direction\n";
    json runs = json::array();
    for (std::size_t i = 0; i < sample.runs.size(); ++i) {
        const AsymptoticRun& run = sample.runs[i];
        const char* dname = run.direction == Direction::Future ? "future" : "past";
        write_trajectory_csv(
            run.limit,
            (dir / ("limit_" + std::string(dname) + "_" + std::to_string(i) + ".csv")).string());
        json rj;
        rj["u0"] = run.u0;
        rj["direction"] = dname;
        rj["converged"] = run.converged;
        rj["d"] = run.convergence_profile;
        rj["v"] = run.start_velocity();
        rj["rho"] = run.rho_estimate;
        runs.push_back(std::move(rj));
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%s\n", run.u0, run.start_velocity(), dname);
        manifold_csv += buf;
    }
    write_text_file((dir / "manifold.csv").string(), manifold_csv);

    json out;
    out["target"] = {{"u0", target.u0}, {"v0", target.v0}};
    out["runs"] = runs;
    if (!sample.runs.empty()) out["d"] = sample.runs.front().convergence_profile;
    json fails = json::array();
    for (const auto& f : sample.failures)
        fails.push_back({{"u0", f.first}, {"reason", f.second}});
    out["failures"] = fails;
    write_report(ctx, "asymptotic", make_report(ctx, "asymptotic", out));
    return sample.failures.empty() && !sample.runs.empty() ? kExitPass : kExitNegative;
}

int cmd_classify(Context& ctx, bool with_witness) {
    const ProblemFile& p = ctx.problem;
    PeriodicArtifacts art = run_periodic(ctx);
    if (art.pair.orbits.size() != 2)
        throw std::runtime_error("classify: the band must carry exactly the two neighboring "
                                 "orbits (found " + std::to_string(art.pair.orbits.size()) + ")");
    const PeriodicOrbit& alpha_orbit =
        art.pair.orbits[static_cast<std::size_t>(art.pair.x_min_index)];
    const PeriodicOrbit& beta_orbit =
        art.pair.orbits[static_cast<std::size_t>(art.pair.x_max_index)];

    std::optional<ModifiedField> modified = art.modified;
    BandDynOptions bd;
    bd.v_bound = modified ? modified->K : p.solver.v_bound;
    bd.h = p.solver.h;
    bd.n_scan = p.solver.n_scan;
    bd.threads = p.solver.threads;
    bd.neighboring_grid = p.solver.grid_u;

    ClassifyResult cr = classify_neighboring(art.field, alpha_orbit, beta_orbit,
                                             p.solver.eps_list, p.solver.classify_grid, bd);

    json out;
    out["verdict"] = verdict_name(cr.verdict);
    out["notes"] = cr.notes;
    json fams = json::array();
    for (const auto& fam : cr.families) {
        json fj;
        fj["epsilon"] = fam.epsilon;
        fj["sign"] = sign_name(fam.sign);
        json entries = json::array();
        for (const auto& e : fam.entries) {
            json ej;
            ej["u0"] = e.u0;
            json sols = json::array();
            for (const auto& s : e.solutions)
                sols.push_back({{"v0", s.v0}, {"v_end", s.v_end}, {"gap", s.gap}});
            ej["solutions"] = sols;
            entries.push_back(std::move(ej));
        }
        fj["entries"] = entries;
        fams.push_back(std::move(fj));
    }
    out["families"] = fams;

    bool ok = cr.verdict != ClassifyVerdict::MixedInconclusive;
    if (ok && with_witness) {
        AsymptoticOptions ao;
        ao.horizon = p.solver.horizon;
        ao.tol_conv = p.solver.tol_conv;
        ao.h = p.solver.h;
        ao.n_scan = p.solver.n_scan;
        ao.threads = p.solver.threads;
        ao.modified = art.modified;
        ao.v_bound = p.solver.v_bound;
        try {
            AsymptoticRun run =
                corollary2_witness(art.field, alpha_orbit, beta_orbit, cr.verdict, ao);
            out["witness"] = {{"u0", run.u0},
                              {"converged", run.converged},
                              {"d_last", run.convergence_profile.back()}};
        } catch (const std::exception& e) {
            out["witness"] = {{"error", e.what()}};
            ok = false;
        }
    }

    write_report(ctx, "classify", make_report(ctx, "classify", out));
    return ok ? kExitPass : kExitNegative;
}

PeriodicOrbit orbit_from_curve_state(const Field& field, const Curve& c, double h,
                                     const char* which) {
    double u0 = c.value(0.0);
    double v0 = c.right_deriv(0);
    Trajectory traj = integrate(field, 0.0, u0, v0, field.period, h > 0 ? h : field.period / 2048);
    double closure = std::fabs(traj.samples.back().u - u0) + std::fabs(traj.samples.back().v - v0);
    if (closure > 1e-8 * (1.0 + std::fabs(u0)))
        throw std::runtime_error(std::string(which) +
                                 " is not a periodic solution (closure residual " +
                                 std::to_string(closure) + ")");
    PeriodicOrbit orb;
    orb.u0 = u0;
    orb.v0 = v0;
    orb.closure_residual = closure;
    orb.orbit = std::move(traj);
    orb.floquet = eigenvalues_2x2(poincare(field, u0, v0, h > 0 ? h : field.period / 2048).jacobian);
    return orb;
}

struct DegeneracyArtifacts {
    DegeneracyReport report;
    Field field;
    PeriodicOrbit alpha_orbit, beta_orbit;
};

DegeneracyArtifacts run_degeneracy(Context& ctx) {
    const ProblemFile& p = ctx.problem;
    DegeneracyArtifacts art;
    art.field = p.make_field();
    Band band = p.make_band();
    art.alpha_orbit = orbit_from_curve_state(art.field, band.lower, p.solver.h, "alpha");
    art.beta_orbit = orbit_from_curve_state(art.field, band.upper, p.solver.h, "beta");

    std::optional<ModifiedField> modified;
    double K = resolve_v_bound(ctx, art.field, band, modified);
    BandDynOptions bd;
    bd.v_bound = K;
    bd.h = p.solver.h;
    bd.n_scan = p.solver.n_scan > 256 ? 256 : p.solver.n_scan;
    bd.threads = p.solver.threads;
    art.report = detect_degeneracy(art.field, art.alpha_orbit, art.beta_orbit, p.solver.grid_s, bd);
    return art;
}

json degeneracy_json(const DegeneracyArtifacts& art) {
    json out;
    out["verdict"] = verdict_name(art.report.verdict);
    out["notes"] = art.report.notes;
    if (art.report.verdict == DegeneracyVerdict::Degenerate) {
        json psi = json::array();
        for (const auto& ps : art.report.psi)
            psi.push_back({{"s", ps.s}, {"u0", ps.orbit.u0}, {"v0", ps.orbit.v0}});
        out["psi"] = psi;
    }
    if (art.report.verdict == DegeneracyVerdict::GapFound)
        out["bracket"] = {art.report.bracket.first, art.report.bracket.second};
    return out;
}

int cmd_degeneracy(Context& ctx) {
    DegeneracyArtifacts art = run_degeneracy(ctx);
    write_report(ctx, "degeneracy", make_report(ctx, "degeneracy", degeneracy_json(art)));
    return art.report.verdict == DegeneracyVerdict::Inconclusive ? kExitNegative : kExitPass;
}

int cmd_stability(Context& ctx, bool with_witness) {
    const ProblemFile& p = ctx.problem;
    PeriodicArtifacts art = run_periodic(ctx);

    AsymptoticOptions ao;
    ao.horizon = p.solver.horizon;
    ao.tol_conv = p.solver.tol_conv;
    ao.h = p.solver.h;
    ao.n_scan = p.solver.n_scan;
    ao.threads = p.solver.threads;
    ao.modified = art.modified;
    ao.v_bound = p.solver.v_bound;

    StabilityOptions so;
    so.h = p.solver.h;
    so.threads = p.solver.threads;

    json out;
    out["orbits"] = json::array();
    for (std::size_t i = 0; i < art.pair.orbits.size(); ++i) {
        const PeriodicOrbit& orb = art.pair.orbits[i];
        std::optional<AsymptoticRun> witness;
        if (with_witness) {
            // A converged run into an extremal orbit is an instability
            // certificate; try the band side that faces it.
            double edge = 0.0;
            bool applicable = false;
            if (static_cast<int>(i) == art.pair.x_min_index) {
                edge = art.band.lower.value(0.0);
                applicable = edge < orb.u0 - 1e-6;
            } else if (static_cast<int>(i) == art.pair.x_max_index) {
                edge = art.band.upper.value(0.0);
                applicable = edge > orb.u0 + 1e-6;
            }
            if (applicable) {
                try {
                    witness = asymptotic_future(art.field, art.band, orb,
                                                0.5 * (edge + orb.u0), ao);
                } catch (const std::exception&) {
                    witness.reset();
                }
            }
        }
        std::vector<const AsymptoticRun*> refs;
        if (witness) refs.push_back(&*witness);
        StabilityVerdict sv = stability_verdict(art.field, orb, refs, so);
        json oj = orbit_json(orb);
        oj["tag"] = tag_name(sv.tag);
        oj["max_multiplier"] = sv.max_multiplier;
        oj["witness"] = sv.witness;
        oj["detail"] = sv.detail;
        out["orbits"].push_back(std::move(oj));
    }
    write_report(ctx, "stability", make_report(ctx, "stability", out));
    return kExitPass;
}

int cmd_plot(Context& ctx, const std::vector<std::string>& csvs, std::string svg_out) {
    const ProblemFile& p = ctx.problem;
    Band band = p.make_band();
    std::vector<SvgSeries> series;
    for (const auto& path : csvs) series.push_back({read_trajectory_csv(path), ""});
    std::string svg = svg_plot(series, &band, nullptr);
    if (svg_out.empty()) svg_out = (ctx.command_dir("plot") / "plot.svg").string();
    write_text_file(svg_out, svg);
    json out;
    out["svg"] = svg_out;
    out["series"] = csvs.size();
    write_report(ctx, "plot", make_report(ctx, "plot", out));
    return kExitPass;
}

json run_command_for_report(Context& ctx, const std::string& command) {
    // Re-uses the command implementations; returns the outputs block.
    if (command == "verify") {
        cmd_verify(ctx);
    } else if (command == "modify") {
        cmd_modify(ctx);
    } else if (command == "periodic") {
        cmd_periodic(ctx);
    } else if (command == "classify") {
        cmd_classify(ctx, true);
    } else if (command == "degeneracy") {
        cmd_degeneracy(ctx);
    } else if (command == "stability") {
        cmd_stability(ctx, true);
    } else if (command == "asymptotic") {
        cmd_asymptotic(ctx, "min", "future", {});
    } else {
        throw ProblemError("fixtures reference unsupported command: " + command);
    }
    std::ifstream in(ctx.command_dir(command) / "report.json");
    json report = json::parse(in);
    return report["outputs"];
}

int cmd_report(Context& ctx) {
    const ProblemFile& p = ctx.problem;
    if (p.fixtures.empty()) {
        std::cout << "no fixtures declared in " << p.name << "\n";
        return kExitPass;
    }
    std::map<std::string, json> cache;
    int failures = 0;
    json checks = json::array();
    for (const auto& fix : p.fixtures) {
        if (!cache.count(fix.command)) cache[fix.command] = run_command_for_report(ctx, fix.command);
        const json& outputs = cache[fix.command];
        json got;
        bool ok = false;
        std::string detail;
        try {
            got = outputs.at(json::json_pointer(fix.pointer));
            if (fix.expected.is_number() && got.is_number()) {
                double diff = std::fabs(fix.expected.get<double>() - got.get<double>());
                ok = diff <= fix.tol;
                detail = "diff = " + std::to_string(diff);
            } else {
                ok = fix.expected == got;
            }
        } catch (const std::exception& e) {
            detail = e.what();
        }
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << fix.command << " " << fix.pointer
                  << " expected " << fix.expected.dump() << " got " << got.dump();
        if (!detail.empty()) std::cout << " (" << detail << ")";
        std::cout << "\n";
        if (!ok) ++failures;
        json cj;
        cj["command"] = fix.command;
        cj["pointer"] = fix.pointer;
        cj["expected"] = fix.expected;
        cj["got"] = got;
        cj["pass"] = ok;
        checks.push_back(std::move(cj));
    }
    json out;
    out["checks"] = checks;
    out["failures"] = failures;
    write_report(ctx, "report", make_report(ctx, "report", out));
    return failures == 0 ? kExitPass : kExitNegative;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodic second-order ODE dynamics between lower and upper solutions"};
    app.require_subcommand(1);

    std::string problem_path;
    std::string out_root;
    std::vector<std::string> overrides;
    int threads = -1;
    app.add_option("--out", out_root, "output root (default $BANDODE_OUT or ./out)");
    app.add_option("--threads", threads, "worker thread override");
    app.add_option("--set", overrides, "override problem settings, e.g. --set solver.horizon=12");

    auto add_problem_arg = [&](CLI::App* cmd) {
        cmd->add_option("problem", problem_path, "problem file")->required();
    };

    CLI::App* c_verify = app.add_subcommand("verify", "verify the barrier pair and [N]");
    add_problem_arg(c_verify);
    CLI::App* c_modify = app.add_subcommand("modify", "build the truncated field; print K, epsilon, M, b_bound");
    add_problem_arg(c_modify);

    CLI::App* c_dirichlet = app.add_subcommand("dirichlet", "enumerate Dirichlet solutions by shooting");
    add_problem_arg(c_dirichlet);
    double d_a = 0.0, d_b = 0.0, d_ya = 0.0, d_yb = 0.0, d_vlo = 0.0, d_vhi = 0.0;
    c_dirichlet->add_option("--a", d_a, "left endpoint (default 0)");
    c_dirichlet->add_option("--b", d_b, "right endpoint (default T)");
    c_dirichlet->add_option("--ya", d_ya, "boundary value at a")->required();
    c_dirichlet->add_option("--yb", d_yb, "boundary value at b")->required();
    c_dirichlet->add_option("--vlo", d_vlo, "velocity bracket low (default -K)");
    c_dirichlet->add_option("--vhi", d_vhi, "velocity bracket high (default K)");

    CLI::App* c_periodic = app.add_subcommand("periodic", "find periodic orbits and the extremal pair");
    add_problem_arg(c_periodic);

    CLI::App* c_asymptotic = app.add_subcommand("asymptotic", "build asymptotic trajectories and manifold samples");
    add_problem_arg(c_asymptotic);
    std::string a_target = "min", a_direction = "both";
    std::vector<double> a_u0;
    c_asymptotic->add_option("--target", a_target, "min|max (default min)")
        ->check(CLI::IsMember({"min", "max"}));
    c_asymptotic->add_option("--direction", a_direction, "future|past|both (default both)")
        ->check(CLI::IsMember({"future", "past", "both"}));
    c_asymptotic->add_option("--u0", a_u0, "initial positions (default: 8 spread over the gap)");

    CLI::App* c_classify = app.add_subcommand("classify", "classify neighboring periodic solutions");
    add_problem_arg(c_classify);
    bool cl_witness = true;
    c_classify->add_flag("--witness,!--no-witness", cl_witness, "run the corollary-2 witness (default on)");

    CLI::App* c_degeneracy = app.add_subcommand("degeneracy", "detect a degenerate family between the endpoints");
    add_problem_arg(c_degeneracy);

    CLI::App* c_stability = app.add_subcommand("stability", "stability verdicts for the found orbits");
    add_problem_arg(c_stability);
    bool st_witness = true;
    c_stability->add_flag("--witness,!--no-witness", st_witness, "attempt asymptotic witnesses (default on)");

    CLI::App* c_report = app.add_subcommand("report", "run the problem's fixture checks");
    add_problem_arg(c_report);

    CLI::App* c_plot = app.add_subcommand("plot", "render band + trajectories to SVG");
    add_problem_arg(c_plot);
    std::vector<std::string> plot_csvs;
    std::string plot_out;
    c_plot->add_option("--csv", plot_csvs, "trajectory CSV files");
    c_plot->add_option("--svg", plot_out, "output SVG path (default <out>/plot/plot.svg)");

    CLI11_PARSE(app, argc, argv);

    try {
        Context ctx;
        ctx.problem = load_problem(problem_path);
        for (const auto& ov : overrides) {
            auto eq = ov.find('=');
            if (eq == std::string::npos) throw ProblemError("override must be key=value: " + ov);
            apply_override(ctx.problem, ov.substr(0, eq), ov.substr(eq + 1));
        }
        if (threads >= 0) ctx.problem.solver.threads = threads;
        if (out_root.empty()) {
            const char* env = std::getenv("BANDODE_OUT");
            out_root = env ? env : "out";
        }
        ctx.out_root = out_root;
        {
            std::string acc;
            for (const auto& ov : overrides) acc += ov + ";";
            ctx.overrides_digest = acc;
        }

        auto started = std::chrono::steady_clock::now();
        int rc = kExitError;
        if (app.got_subcommand(c_verify)) rc = cmd_verify(ctx);
        else if (app.got_subcommand(c_modify)) rc = cmd_modify(ctx);
        else if (app.got_subcommand(c_dirichlet)) rc = cmd_dirichlet(ctx, d_a, d_b, d_ya, d_yb, d_vlo, d_vhi);
        else if (app.got_subcommand(c_periodic)) rc = cmd_periodic(ctx);
        else if (app.got_subcommand(c_asymptotic)) rc = cmd_asymptotic(ctx, a_target, a_direction, a_u0);
        else if (app.got_subcommand(c_classify)) rc = cmd_classify(ctx, cl_witness);
        else if (app.got_subcommand(c_degeneracy)) rc = cmd_degeneracy(ctx);
        else if (app.got_subcommand(c_stability)) rc = cmd_stability(ctx, st_witness);
        else if (app.got_subcommand(c_report)) rc = cmd_report(ctx);
        else if (app.got_subcommand(c_plot)) rc = cmd_plot(ctx, plot_csvs, plot_out);

        auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
        std::cerr << "wall time: " << elapsed.count() << " s\n";
        return rc;
    } catch (const ProblemError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
