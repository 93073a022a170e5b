#include "bandode/problem.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace bandode {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const auto& k : allowed)
            if (it.key() == k) known = true;
        if (!known)
            throw ProblemError("unknown key \"" + it.key() + "\" in " + where);
    }
}

double number_or_expr(const json& j, const std::map<std::string, double>& params,
                      const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        ExprAst ast = parse_expr(j.get<std::string>(), {}, params);
        return ExprProgram(ast).eval(nullptr, 0);
    }
    throw ProblemError(where + " must be a number or an expression string");
}

CurveDecl parse_curve_decl(const json& j, const std::string& where) {
    CurveDecl decl;
    if (j.is_string()) {
        decl.expr = j.get<std::string>();
        return decl;
    }
    if (j.is_object()) {
        reject_unknown_keys(j, {"segments"}, where);
        if (!j.contains("segments") || !j["segments"].is_array())
            throw ProblemError(where + ": piecewise curve needs a \"segments\" array");
        decl.piecewise = true;
        for (const auto& seg : j["segments"]) {
            if (!seg.is_object()) throw ProblemError(where + ": segment entries must be objects");
            reject_unknown_keys(seg, {"at", "expr"}, where + ".segments[]");
            if (!seg.contains("at") || !seg.contains("expr"))
                throw ProblemError(where + ": segments need \"at\" and \"expr\"");
            decl.segments.push_back(
                {seg["at"].get<double>(), seg["expr"].get<std::string>()});
        }
        return decl;
    }
    throw ProblemError(where + " must be an expression string or a {segments: [...]} object");
}

}  // namespace

Field ProblemFile::make_field() const {
    return field_from_expr(f_src, T, params, fu_src, fv_src);
}

std::optional<NagumoSpec> ProblemFile::make_phi() const {
    if (phi_src.empty()) return std::nullopt;
    return nagumo_from_expr(phi_src, params);
}

Curve ProblemFile::make_alpha() const {
    if (alpha_decl.piecewise) return Curve::from_segments(alpha_decl.segments, T, params);
    return Curve::from_expr(alpha_decl.expr, T, params);
}

Curve ProblemFile::make_beta() const {
    if (beta_decl.piecewise) return Curve::from_segments(beta_decl.segments, T, params);
    return Curve::from_expr(beta_decl.expr, T, params);
}

Band ProblemFile::make_band() const { return Band::make(make_alpha(), make_beta()); }

ProblemFile parse_problem(const std::string& text, const std::string& fallback_name) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ProblemError("problem file is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ProblemError("problem file must be a JSON object");

    reject_unknown_keys(doc,
                        {"name", "T", "params", "f", "f_u", "f_v", "phi", "uniqueness",
                         "alpha", "beta", "solver", "fixtures"},
                        "the problem file");

    ProblemFile p;
    p.raw_bytes = text;
    p.name = doc.value("name", fallback_name);

    p.params["pi"] = 3.14159265358979323846;
    if (doc.contains("params")) {
        if (!doc["params"].is_object()) throw ProblemError("\"params\" must be an object");
        for (auto it = doc["params"].begin(); it != doc["params"].end(); ++it) {
            if (!it.value().is_number())
                throw ProblemError("parameter \"" + it.key() + "\" must be a number");
            p.params[it.key()] = it.value().get<double>();
        }
    }

    if (!doc.contains("T")) throw ProblemError("problem file is missing \"T\"");
    p.T = number_or_expr(doc["T"], p.params, "\"T\"");
    if (!(p.T > 0.0)) throw ProblemError("\"T\" must be positive");

    if (!doc.contains("f") || !doc["f"].is_string())
        throw ProblemError("problem file needs an expression string \"f\"");
    p.f_src = doc["f"].get<std::string>();
    p.fu_src = doc.value("f_u", std::string{});
    p.fv_src = doc.value("f_v", std::string{});
    p.phi_src = doc.value("phi", std::string{});
    p.uniqueness = doc.value("uniqueness", false);

    if (!doc.contains("alpha") || !doc.contains("beta"))
        throw ProblemError("problem file needs \"alpha\" and \"beta\" curve declarations");
    p.alpha_decl = parse_curve_decl(doc["alpha"], "\"alpha\"");
    p.beta_decl = parse_curve_decl(doc["beta"], "\"beta\"");

    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        if (!s.is_object()) throw ProblemError("\"solver\" must be an object");
        reject_unknown_keys(s,
                            {"h", "n_scan", "grid_u", "grid_v", "horizon", "tol_conv",
                             "grid_s", "classify_grid", "eps_list", "v_bound", "max_periods",
                             "epsilon", "threads"},
                            "\"solver\"");
        p.solver.h = s.value("h", 0.0);
        p.solver.n_scan = s.value("n_scan", 512);
        p.solver.grid_u = s.value("grid_u", 33);
        p.solver.grid_v = s.value("grid_v", 33);
        p.solver.horizon = s.value("horizon", 8);
        p.solver.tol_conv = s.value("tol_conv", 1e-4);
        p.solver.grid_s = s.value("grid_s", 129);
        p.solver.classify_grid = s.value("classify_grid", 9);
        p.solver.v_bound = s.value("v_bound", 0.0);
        p.solver.max_periods = s.value("max_periods", 2000);
        p.solver.epsilon = s.value("epsilon", 1e-3);
        p.solver.threads = s.value("threads", 0);
        if (s.contains("eps_list")) {
            if (!s["eps_list"].is_array()) throw ProblemError("\"eps_list\" must be an array");
            for (const auto& e : s["eps_list"]) p.solver.eps_list.push_back(e.get<double>());
        }
    }

    if (doc.contains("fixtures")) {
        if (!doc["fixtures"].is_array()) throw ProblemError("\"fixtures\" must be an array");
        for (const auto& f : doc["fixtures"]) {
            if (!f.is_object()) throw ProblemError("fixture entries must be objects");
            reject_unknown_keys(f, {"command", "pointer", "expected", "tol"}, "fixtures[]");
            if (!f.contains("command") || !f.contains("pointer") || !f.contains("expected"))
                throw ProblemError("fixtures need \"command\", \"pointer\" and \"expected\"");
            FixtureCheck check;
            check.command = f["command"].get<std::string>();
            check.pointer = f["pointer"].get<std::string>();
            check.expected = f["expected"];
            check.tol = f.value("tol", 0.0);
            p.fixtures.push_back(std::move(check));
        }
    }

    // Validate the declared expressions up front.
    p.make_field();
    p.make_phi();
    Band band = p.make_band();
    (void)band;
    return p;
}

ProblemFile load_problem(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ProblemError("cannot open problem file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string name = path;
    auto slash = name.find_last_of('/');
    if (slash != std::string::npos) name = name.substr(slash + 1);
    auto dot = name.find_last_of('.');
    if (dot != std::string::npos) name = name.substr(0, dot);
    return parse_problem(ss.str(), name);
}

void apply_override(ProblemFile& problem, const std::string& key, const std::string& value) {
    std::string k = key;
    if (k.rfind("solver.", 0) == 0) k = k.substr(7);
    auto as_double = [&value, &key]() {
        try {
            return std::stod(value);
        } catch (...) {
            throw ProblemError("override " + key + ": cannot parse \"" + value + "\" as number");
        }
    };
    auto as_int = [&value, &key]() {
        try {
            return std::stoi(value);
        } catch (...) {
            throw ProblemError("override " + key + ": cannot parse \"" + value + "\" as integer");
        }
    };
    if (k == "h")
        problem.solver.h = as_double();
    else if (k == "n_scan")
        problem.solver.n_scan = as_int();
    else if (k == "grid_u")
        problem.solver.grid_u = as_int();
    else if (k == "grid_v")
        problem.solver.grid_v = as_int();
    else if (k == "horizon")
        problem.solver.horizon = as_int();
    else if (k == "tol_conv")
        problem.solver.tol_conv = as_double();
    else if (k == "grid_s")
        problem.solver.grid_s = as_int();
    else if (k == "classify_grid")
        problem.solver.classify_grid = as_int();
    else if (k == "v_bound")
        problem.solver.v_bound = as_double();
    else if (k == "max_periods")
        problem.solver.max_periods = as_int();
    else if (k == "epsilon")
        problem.solver.epsilon = as_double();
    else if (k == "threads")
        problem.solver.threads = as_int();
    else if (k == "uniqueness")
        problem.uniqueness = (value == "true" || value == "1");
    else
        throw ProblemError("unknown override key: " + key);
}

}  // namespace bandode
