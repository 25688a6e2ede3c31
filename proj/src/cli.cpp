#include "phlab/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "phlab/geodesic.hpp"
#include "phlab/shadowing.hpp"

namespace phlab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& msg) { fail(ErrorCode::InvalidInput, msg); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        bad(std::string("field '") + key + "': " + e.what());
    }
}

void require(bool ok, const std::string& msg) {
    if (!ok) bad(msg);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [k, v] : j.items()) {
        bool found = false;
        for (const char* n : known) found = found || k == n;
        if (!found) bad("unknown field '" + k + "' in " + where);
    }
}

json read_json_file(const fs::path& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) bad(what + " not found: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ParseError, what + " " + path.string() + ": " + e.what());
    }
}

ModelSpec model_from_json(const json& j) {
    if (!j.is_object()) bad("model must be an object");
    reject_unknown(j, {"type", "A", "rho", "eta", "collar_eps", "step"}, "model");
    ModelSpec m;
    m.type = get_or<std::string>(j, "type", "suspension");
    if (m.type == "geodesic") return m;
    require(m.type == "suspension", "model type must be 'suspension' or 'geodesic'");
    if (j.contains("A")) {
        const auto rows = j.at("A").get<std::vector<std::vector<int>>>();
        require(rows.size() == 2 && rows[0].size() == 2 && rows[1].size() == 2, "A must be a 2x2 integer matrix");
        m.a << rows[0][0], rows[0][1], rows[1][0], rows[1][1];
    }
    m.rho = get_or<std::string>(j, "rho", "1");
    m.eta = get_or<double>(j, "eta", 0.0);
    m.collar_eps = get_or<double>(j, "collar_eps", 0.2);
    m.step = get_or<double>(j, "step", 1e-3);
    require(m.eta >= 0.0 && m.eta <= 1e3, "eta must lie in [0, 1000]");
    require(m.collar_eps > 0.0 && m.collar_eps <= 0.2, "collar_eps must lie in (0, 0.2]");
    require(m.step >= 1e-5 && m.step <= 1e-1, "step must lie in [1e-5, 0.1]");
    return m;
}

json model_to_json(const ModelSpec& m) {
    if (m.type == "geodesic") return {{"type", "geodesic"}};
    return {{"type", m.type},
            {"A", {{m.a(0, 0), m.a(0, 1)}, {m.a(1, 0), m.a(1, 1)}}},
            {"rho", m.rho},
            {"eta", m.eta},
            {"collar_eps", m.collar_eps},
            {"step", m.step}};
}

TwistConfig twist_from_json(const json& j) {
    if (!j.is_object()) bad("twist must be an object");
    reject_unknown(j, {"gamma", "kind", "profile", "shear"}, "twist");
    TwistConfig t;
    const auto g = get_or<std::vector<int>>(j, "gamma", {1, 0});
    require(g.size() == 2, "gamma must have two integer entries");
    t.a = g[0];
    t.b = g[1];
    try {
        t.kind = parse_twist_kind(get_or<std::string>(j, "kind", "translation"));
    } catch (const Error& e) {
        bad(e.what());
    }
    if (j.contains("profile")) {
        const json& p = j.at("profile");
        reject_unknown(p, {"start", "end", "width"}, "profile");
        if (p.contains("width")) {
            const double w = p.at("width").get<double>();
            require(w > 0.0 && w <= 1.0, "profile width must lie in (0, 1]");
            t.profile_start = 0.5 - w / 2;
            t.profile_end = 0.5 + w / 2;
        } else {
            t.profile_start = get_or<double>(p, "start", 0.1);
            t.profile_end = get_or<double>(p, "end", 0.9);
        }
        require(0.0 <= t.profile_start && t.profile_start < t.profile_end && t.profile_end <= 1.0,
                "profile needs 0 <= start < end <= 1");
    }
    if (j.contains("shear")) {
        const auto rows = j.at("shear").get<std::vector<std::vector<double>>>();
        require(rows.size() == 2 && rows[0].size() == 2 && rows[1].size() == 2, "shear must be a 2x2 matrix");
        t.shear << rows[0][0], rows[0][1], rows[1][0], rows[1][1];
    }
    return t;
}

json twist_to_json(const TwistConfig& t) {
    json j = {{"gamma", {t.a, t.b}},
              {"kind", to_string(t.kind)},
              {"profile", {{"start", t.profile_start}, {"end", t.profile_end}}}};
    if (t.kind == TwistKind::Shear) {
        j["shear"] = {{t.shear(0, 0), t.shear(0, 1)}, {t.shear(1, 0), t.shear(1, 1)}};
    }
    return j;
}

json resolved_json(const ExperimentConfig& c) {
    json tw = json::array();
    for (const auto& t : c.twists) tw.push_back(twist_to_json(t));
    return {{"model", model_to_json(c.model)},
            {"twists", tw},
            {"flow_time", c.flow_time},
            {"planner",
             {{"alpha", c.alpha}, {"grid", c.planner_grid}, {"cap", c.planner_cap}, {"m", c.m ? json(*c.m) : json()}}},
            {"certify",
             {{"grid", c.grid},
              {"aperture", c.aperture},
              {"iterates", c.iterates},
              {"margin_threshold", c.margin_threshold}}},
            {"transversality",
             {{"grid", c.transversality_grid},
              {"tol", c.transversality_tol},
              {"twist_s_values", c.twist_grid.s_values},
              {"twist_torus", c.twist_grid.torus}}},
            {"seeds", c.seeds},
            {"sweep",
             {{"etas", c.sweep_etas},
              {"points", c.sweep_points},
              {"plan", c.sweep_plan},
              {"planner_grid", c.sweep_planner_grid}}},
            {"shadow", {{"deltas", c.shadow_deltas}, {"steps", c.shadow_steps}, {"eps", c.shadow_eps}}},
            {"ftle", {{"n", c.ftle_n}, {"points", c.ftle_points}}}};
}

std::string hex16(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

void validate(const ExperimentConfig& c) {
    require(c.alpha > 0.0 && c.alpha < 1.0, "planner alpha must lie in (0, 1)");
    require(c.planner_grid >= 1 && c.planner_grid <= 64, "planner grid must lie in [1, 64]");
    require(c.planner_cap >= 1 && c.planner_cap <= 1 << 20, "planner cap must lie in [1, 2^20]");
    require(!c.m || (*c.m >= 1 && *c.m <= 1 << 20), "m must lie in [1, 2^20]");
    require(c.aperture > 0.0 && c.aperture < 1.5, "aperture must lie in (0, 1.5)");
    require(c.grid >= 1 && c.grid <= 128, "grid must lie in [1, 128]");
    require(c.iterates >= 1 && c.iterates <= 64, "iterates must lie in [1, 64]");
    require(c.margin_threshold > 0.0 && c.margin_threshold <= 1.0, "margin_threshold must lie in (0, 1]");
    require(c.transversality_grid >= 1 && c.transversality_grid <= 128, "transversality grid must lie in [1, 128]");
    require(c.transversality_tol > 0.0 && c.transversality_tol < 1.0, "tol must lie in (0, 1)");
    require(c.twist_grid.s_values >= 2 && c.twist_grid.torus >= 1, "twist grid too small");
    require(std::isfinite(c.flow_time) && c.flow_time != 0.0 && std::abs(c.flow_time) <= 1e3,
            "flow_time must be non-zero with |t| <= 1000");
    require(!c.seeds.empty(), "seeds must not be empty");
    require(!c.sweep_etas.empty(), "sweep etas must not be empty");
    for (std::size_t i = 0; i < c.sweep_etas.size(); ++i) {
        require(c.sweep_etas[i] > 0.0, "sweep etas must be positive");
        require(i == 0 || c.sweep_etas[i] > c.sweep_etas[i - 1], "sweep etas must be ascending");
    }
    require(c.sweep_points >= 1 && c.sweep_points <= 64, "sweep points must lie in [1, 64]");
    require(c.sweep_planner_grid >= 1 && c.sweep_planner_grid <= 32, "sweep planner grid must lie in [1, 32]");
    require(!c.shadow_deltas.empty(), "shadow deltas must not be empty");
    for (double d : c.shadow_deltas) require(d >= 0.0 && d <= 1e-2, "shadow deltas must lie in [0, 1e-2]");
    require(c.shadow_steps >= 1 && c.shadow_steps <= 100000, "shadow steps must lie in [1, 1e5]");
    require(c.shadow_eps > 0.0, "shadow eps must be positive");
    require(c.ftle_n >= 10, "ftle n must be at least 10");
    require(c.ftle_points >= 1 && c.ftle_points <= 10000, "ftle points must lie in [1, 1e4]");
    if (c.model.type == "geodesic") require(c.twists.empty(), "twists need a suspension model");
}

json point_json(const ModelPoint& p, const Manifold& m) {
    if (dynamic_cast<const GeodesicModel*>(&m)) return {p[0], p[1], p[2], p[3]};
    return {p[0], p[1], p[2]};
}

json vec_json(const Vec3& v) { return {v[0], v[1], v[2]}; }

json header(const ExperimentConfig& c, const std::string& command) {
    return {{"schema_version", kSchemaVersion},
            {"tool_version", std::string(kToolVersion)},
            {"config_hash", c.hash},
            {"command", command},
            {"config", json::parse(c.resolved)},
            {"results", json::array()}};
}

bool roll_up(const json& report) {
    if (report.contains("error")) return false;
    for (const auto& r : report.at("results")) {
        if (!r.value("pass", false)) return false;
    }
    return true;
}

/// Writes `<command>.json` and `<command>.summary.txt`, returns the exit code.
int finish(const ExperimentConfig& c, json& report, const std::vector<std::string>& lines,
           std::chrono::steady_clock::time_point start, std::ostream& log, int code_if_error = kFail) {
    const bool pass = roll_up(report);
    report["pass"] = pass;
    const std::string command = report.at("command");
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    int code = pass ? kPass : kFail;
    if (report.contains("error")) code = code_if_error;

    std::error_code ec;
    fs::create_directories(c.output_dir, ec);
    const fs::path json_path = c.output_dir / (command + ".json");
    std::ofstream out(json_path);
    if (!out) {
        log << "error: cannot write " << json_path.string() << "\n";
        return kInvalidInput;
    }
    out << report.dump(2) << "\n";

    std::ostringstream summary;
    summary << "phlab " << kToolVersion << " " << command << "\n";
    summary << "config hash: " << c.hash << "\n";
    for (const auto& l : lines) summary << l << "\n";
    if (report.contains("error")) {
        summary << "error in stage '" << report["error"]["stage"].get<std::string>()
                << "': " << report["error"]["message"].get<std::string>() << "\n";
    }
    summary << "result: " << (pass ? "PASS" : "FAIL") << "\n";
    summary << "wall time: " << std::fixed << std::setprecision(3) << wall << " s\n";
    std::ofstream(c.output_dir / (command + ".summary.txt")) << summary.str();
    log << summary.str();
    return code;
}

json certificate_json(const PHCertificate& c, const Manifold& m) {
    json w = json::array();
    for (const auto& x : c.witnesses) {
        w.push_back({{"kind", x.kind}, {"point", point_json(x.point, m)}, {"vector", vec_json(x.vector)},
                     {"value", x.value}});
    }
    json j = {{"type", "ph_certificate"},
              {"map", c.map},
              {"word", c.word},
              {"grid", c.grid},
              {"points", c.points},
              {"iterates", c.iterates},
              {"aperture", c.aperture},
              {"margin_threshold", c.margin_threshold},
              {"cone_margin_uu", c.cone_margin_uu},
              {"cone_margin_ss", c.cone_margin_ss},
              {"min_expansion_uu", c.min_expansion_uu},
              {"max_contraction_ss", c.max_contraction_ss},
              {"gaps_evaluated", c.gaps_evaluated},
              {"splitting_exact", c.splitting_exact},
              {"cones_pass", c.cones_pass},
              {"gaps_pass", c.gaps_pass},
              {"witnesses", w},
              {"failures", c.failures},
              {"pass", c.pass}};
    if (c.gaps_evaluated) {
        j["lambda1"] = c.lambda1;
        j["lambda2"] = c.lambda2;
        j["center_min"] = c.center_min;
        j["center_max"] = c.center_max;
    }
    return j;
}

json transversality_json(const TransversalityCertificate& t, const Manifold& m) {
    return {{"type", "h_transversality"},
            {"f", t.f},
            {"g", t.g},
            {"h", t.h},
            {"grid", t.grid},
            {"tol", t.tol},
            {"min_unstable_angle", t.min_unstable_angle},
            {"min_stable_angle", t.min_stable_angle},
            {"argmin_unstable", point_json(t.argmin_unstable, m)},
            {"argmin_stable", point_json(t.argmin_stable, m)},
            {"reversed_pass", t.reversed_pass},
            {"pass", t.pass}};
}

json twist_report_json(const TwistPath& path, const MinAngleReport& r) {
    return {{"type", "twist_transversality"},
            {"twist", path.describe()},
            {"s_values", r.grid.s_values},
            {"torus", r.grid.torus},
            {"tol", r.grid.tol},
            {"min_angle", r.min_angle},
            {"argmin", {r.argmin_s, r.argmin_point[0], r.argmin_point[1]}},
            {"pass", r.pass}};
}

std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

struct ErrorInfo {
    std::string stage;
    std::string message;
    int code;
};

ErrorInfo capture(const std::string& stage) {
    try {
        throw;
    } catch (const Error& e) {
        return {stage, e.what(), exit_code_for(e.code())};
    } catch (const std::exception& e) {
        return {stage, e.what(), kInvalidInput};
    }
}

void attach(json& report, const ErrorInfo& e) { report["error"] = {{"stage", e.stage}, {"message", e.message}}; }

ComposedMap flow_map(const std::shared_ptr<const FlowModel>& model, double t) {
    return ComposedMap{std::make_shared<FlowTimePiece>(model, t)};
}

}  // namespace

TwistPath TwistConfig::path() const {
    switch (kind) {
        case TwistKind::Translation:
            return TwistPath::translation(a, b, profile());
        case TwistKind::Shear:
            return TwistPath::shear(shear, profile());
        case TwistKind::Identity:
            return TwistPath::identity();
    }
    return TwistPath::identity();
}

int ExperimentConfig::threads() const { return sequential ? 1 : default_threads(); }

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

ModelSpec load_model(const fs::path& path) { return model_from_json(read_json_file(path, "model file")); }

ExperimentConfig parse_config(const std::string& json_text, const fs::path& base_dir, const Overrides& o) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    if (!j.is_object()) bad("config must be a JSON object");
    reject_unknown(j,
                   {"model", "twists", "flow_time", "planner", "certify", "transversality", "seeds", "output_dir",
                    "sweep", "shadow", "ftle"},
                   "config");
    ExperimentConfig c;
    try {
        if (!j.contains("model")) bad("config needs a model");
        if (j["model"].is_string()) {
            c.model_path = base_dir / j["model"].get<std::string>();
            c.model = load_model(c.model_path);
        } else {
            c.model = model_from_json(j["model"]);
        }
        if (j.contains("twists")) {
            require(j["twists"].is_array(), "twists must be an array");
            for (const auto& t : j["twists"]) c.twists.push_back(twist_from_json(t));
        }
        c.flow_time = get_or<double>(j, "flow_time", c.flow_time);
        if (j.contains("planner")) {
            const json& p = j["planner"];
            reject_unknown(p, {"alpha", "grid", "cap", "m"}, "planner");
            c.alpha = get_or<double>(p, "alpha", c.alpha);
            c.planner_grid = get_or<int>(p, "grid", c.planner_grid);
            c.planner_cap = get_or<int>(p, "cap", c.planner_cap);
            if (p.contains("m") && !p["m"].is_null()) c.m = p["m"].get<int>();
        }
        if (j.contains("certify")) {
            const json& p = j["certify"];
            reject_unknown(p, {"grid", "aperture", "iterates", "margin_threshold"}, "certify");
            c.grid = get_or<int>(p, "grid", c.grid);
            c.aperture = get_or<double>(p, "aperture", c.aperture);
            c.iterates = get_or<int>(p, "iterates", c.iterates);
            c.margin_threshold = get_or<double>(p, "margin_threshold", c.margin_threshold);
        }
        if (j.contains("transversality")) {
            const json& p = j["transversality"];
            reject_unknown(p, {"grid", "tol", "twist_s_values", "twist_torus"}, "transversality");
            c.transversality_grid = get_or<int>(p, "grid", c.transversality_grid);
            c.transversality_tol = get_or<double>(p, "tol", c.transversality_tol);
            c.twist_grid.s_values = get_or<int>(p, "twist_s_values", c.twist_grid.s_values);
            c.twist_grid.torus = get_or<int>(p, "twist_torus", c.twist_grid.torus);
        }
        c.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", c.seeds);
        if (j.contains("output_dir")) c.output_dir = base_dir / j["output_dir"].get<std::string>();
        if (j.contains("sweep")) {
            const json& p = j["sweep"];
            reject_unknown(p, {"etas", "points", "plan", "planner_grid"}, "sweep");
            c.sweep_etas = get_or<std::vector<double>>(p, "etas", c.sweep_etas);
            c.sweep_points = get_or<int>(p, "points", c.sweep_points);
            c.sweep_plan = get_or<bool>(p, "plan", c.sweep_plan);
            c.sweep_planner_grid = get_or<int>(p, "planner_grid", c.sweep_planner_grid);
        }
        if (j.contains("shadow")) {
            const json& p = j["shadow"];
            reject_unknown(p, {"deltas", "steps", "eps"}, "shadow");
            c.shadow_deltas = get_or<std::vector<double>>(p, "deltas", c.shadow_deltas);
            c.shadow_steps = get_or<int>(p, "steps", c.shadow_steps);
            c.shadow_eps = get_or<double>(p, "eps", c.shadow_eps);
        }
        if (j.contains("ftle")) {
            const json& p = j["ftle"];
            reject_unknown(p, {"n", "points"}, "ftle");
            c.ftle_n = get_or<int>(p, "n", c.ftle_n);
            c.ftle_points = get_or<int>(p, "points", c.ftle_points);
        }
    } catch (const json::exception& e) {
        bad(std::string("config: ") + e.what());
    }

    if (o.seed) c.seeds = {*o.seed, *o.seed + 1};
    if (o.grid) c.grid = *o.grid;
    if (o.aperture) c.aperture = *o.aperture;
    if (o.tol) {
        c.transversality_tol = *o.tol;
        c.twist_grid.tol = *o.tol;
    }
    if (o.m) c.m = *o.m;
    if (o.output_dir) c.output_dir = *o.output_dir;
    if (const char* env = std::getenv("PHLAB_OUT"); env && *env) c.output_dir = env;
    c.sequential = o.sequential;
    c.twist_grid.tol = c.transversality_tol;

    validate(c);
    c.resolved = resolved_json(c).dump();
    c.hash = hex16(fnv1a64(c.resolved));
    return c;
}

ExperimentConfig load_config(const fs::path& path, const Overrides& overrides) {
    std::ifstream in(path);
    if (!in) bad("config file not found: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig c = parse_config(ss.str(), path.parent_path(), overrides);
    c.config_path = path;
    return c;
}

SuspensionPtr build_suspension(const ModelSpec& spec) {
    if (spec.type != "suspension") bad("model is not a suspension");
    FlowOptions fo;
    fo.step = spec.step;
    return make_suspension(spec.a, ExpressionField::parse(spec.rho), spec.eta, fo);
}

std::shared_ptr<const FlowModel> build_model(const ModelSpec& spec) {
    if (spec.type == "geodesic") return std::make_shared<GeodesicModel>();
    return build_suspension(spec);
}

Pipeline build_pipeline(const ExperimentConfig& config, bool check, std::string* stage) {
    auto at = [&](const char* s) {
        if (stage) *stage = s;
    };
    Pipeline p;
    at("model");
    p.model = build_model(config.model);
    if (config.twists.empty()) {
        p.map = flow_map(p.model, config.flow_time);
        return p;
    }
    p.suspension = std::dynamic_pointer_cast<const SuspensionModel>(p.model);
    if (!p.suspension) bad("twists need a suspension model");

    std::vector<Junction> chain;
    const DynamicsSpec f = DynamicsSpec::flow_time(p.model);
    for (const auto& t : config.twists) {
        at("twist");
        const TwistPath path = t.path();
        if (check) {
            p.twists.push_back(build_dehn_twist(p.suspension, path, config.twist_grid));
        } else {
            DehnTwistSpec s{path, p.suspension, std::make_shared<DehnTwistPiece>(p.suspension, path), {}, {}};
            s.word = s.piece->word();
            p.twists.push_back(std::move(s));
        }
        if (!check) continue;
        at("h-transversality");
        TransverseOptions to;
        to.grid = config.transversality_grid;
        to.tol = config.transversality_tol;
        to.threads = config.threads();
        const ComposedMap h{p.twists.back().piece};
        TransversalityCertificate tc = check_h_transverse(f, f, h, to);
        p.transversality.push_back(tc);
        if (!tc.pass) {
            fail(ErrorCode::TransversalityFail, h.describe() + ": min angles " + fmt(tc.min_unstable_angle) + ", " +
                                                    fmt(tc.min_stable_angle) + " below " + fmt(to.tol));
        }
        chain.push_back({p.model, h, p.model, tc});
    }

    if (config.m) {
        p.m = *config.m;
    } else if (check) {
        at("planner");
        PlanOptions po;
        po.alpha = config.alpha;
        po.aperture = config.aperture;
        po.grid = config.planner_grid;
        po.cap = config.planner_cap;
        po.threads = config.threads();
        p.plan = plan_composition(chain, po);
        p.m = *std::max_element(p.plan->exponents.begin(), p.plan->exponents.end());
    } else {
        p.m = 1;
    }

    at("compose");
    for (const auto& t : p.twists) {
        p.map = p.map.then(t.piece).then(std::make_shared<FlowTimePiece>(p.model, static_cast<double>(p.m)));
    }
    return p;
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::IntegrationError:
        case ErrorCode::TransversalityFail:
        case ErrorCode::MissingSplitting:
        case ErrorCode::CapExceeded:
        case ErrorCode::SplittingEstimationFailed:
        case ErrorCode::NoConvergence:
        case ErrorCode::NonTermination:
        case ErrorCode::DegenerateLinearization:
            return kFail;
        default:
            return kInvalidInput;
    }
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::InvalidInput, "slope needs two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) fail(ErrorCode::DomainError, "log-log slope needs positive data");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int cmd_certify(const ExperimentConfig& config, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    json report = header(config, "certify");
    std::vector<std::string> lines;
    std::string stage = "model";
    try {
        Pipeline p = build_pipeline(config, true, &stage);
        for (const auto& tc : p.transversality) {
            report["results"].push_back(transversality_json(tc, *p.model));
            lines.push_back("h-transversality " + tc.h + ": min angles " + fmt(tc.min_unstable_angle) + " / " +
                            fmt(tc.min_stable_angle) + (tc.pass ? " PASS" : " FAIL"));
        }
        if (!p.twists.empty()) {
            json plan = {{"type", "plan"}, {"m", p.m}, {"alpha", config.alpha}, {"pass", true}};
            if (p.plan) {
                plan["exponents"] = p.plan->exponents;
                plan["unstable_exponents"] = p.plan->unstable_exponents;
                plan["stable_exponents"] = p.plan->stable_exponents;
                plan["unstable_angles"] = p.plan->unstable_angles;
                plan["stable_angles"] = p.plan->stable_angles;
            } else {
                plan["override"] = true;
            }
            report["results"].push_back(plan);
            lines.push_back("exponent m = " + std::to_string(p.m) + (p.plan ? " (planner)" : " (given)"));
        }
        stage = "certify";
        CertifyOptions co;
        co.grid = config.grid;
        co.iterates = config.iterates;
        co.aperture = config.aperture;
        co.margin_threshold = config.margin_threshold;
        co.threads = config.threads();
        const PHCertificate c = certify_ph(p.model, p.map, co);
        report["results"].push_back(certificate_json(c, *p.model));
        lines.push_back("map: " + c.map);
        lines.push_back("word: " + c.word);
        lines.push_back("cone margins uu/ss: " + fmt(c.cone_margin_uu) + " / " + fmt(c.cone_margin_ss) +
                        " (threshold " + fmt(c.margin_threshold) + ")");
        lines.push_back("min expansion " + fmt(c.min_expansion_uu) + ", max contraction " +
                        fmt(c.max_contraction_ss));
        if (c.gaps_evaluated) {
            lines.push_back("lambda1 " + fmt(c.lambda1, 12) + ", lambda2 " + fmt(c.lambda2, 12) + ", center [" +
                            fmt(c.center_min) + ", " + fmt(c.center_max) + "]");
        }
        for (const auto& f : c.failures) lines.push_back("failure: " + f);
        for (const auto& w : c.witnesses) {
            if (w.kind.starts_with("cone-escape")) {
                std::ostringstream os;
                os << "witness " << w.kind << " at (" << w.point[0] << ", " << w.point[1] << ", " << w.point[2]
                   << ") margin " << w.value;
                lines.push_back(os.str());
            }
        }
    } catch (...) {
        const ErrorInfo e = capture(stage);
        attach(report, e);
        return finish(config, report, lines, start, log, e.code);
    }
    return finish(config, report, lines, start, log);
}

int cmd_sweep_eta(const ExperimentConfig& config, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    json report = header(config, "sweep-eta");
    std::vector<std::string> lines;
    std::string stage = "sweep";
    try {
        if (config.model.type != "suspension") bad("sweep-eta needs a suspension model");
        const TwistConfig twist = config.twists.empty() ? TwistConfig{} : config.twists.front();
        std::vector<double> etas, angles;
        std::ostringstream csv;
        csv << std::setprecision(17) << "eta,max_stable_angle,min_twist_angle,certified_m\n";
        json rows = json::array();
        const int n = config.sweep_points;
        for (double eta : config.sweep_etas) {
            stage = "sweep eta=" + fmt(eta);
            ModelSpec spec = config.model;
            spec.eta = eta;
            const SuspensionPtr model = build_suspension(spec);
            const ComposedMap ret = flow_map(model, model->roof());
            std::vector<ModelPoint> pts;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) pts.emplace_back((i + 0.5) / n, (j + 0.5) / n, 0.5 * eta);
            }
            const auto per_point = parallel_map<double>(
                pts.size(),
                [&](std::size_t i) {
                    const auto exact = model->exact_splitting(pts[i]);
                    const SplittingFrame frame = exact ? *exact : estimate_splitting_detailed(ret, pts[i]).frame;
                    return pushed_bundles(*model, pts[i], frame).stable_angle;
                },
                config.threads());
            double worst = 0.0;
            for (double a : per_point) worst = std::max(worst, a);

            const TwistPath path = twist.path();
            const MinAngleReport tw = check_twist_transversality(path, *model, config.twist_grid);

            json m_value = nullptr;
            if (config.sweep_plan && path.kind() == TwistKind::Translation) {
                try {
                    const ComposedMap h{std::make_shared<DehnTwistPiece>(model, path)};
                    const DynamicsSpec f = DynamicsSpec::flow_time(model);
                    TransverseOptions to;
                    to.grid = config.sweep_planner_grid;
                    to.tol = config.transversality_tol;
                    to.threads = config.threads();
                    const auto tc = check_h_transverse(f, f, h, to);
                    PlanOptions po;
                    po.alpha = config.alpha;
                    po.aperture = config.aperture;
                    po.grid = config.sweep_planner_grid;
                    po.cap = config.planner_cap;
                    po.threads = config.threads();
                    const PlanResult plan = plan_composition({{model, h, model, tc}}, po);
                    m_value = plan.exponents.front();
                } catch (const Error& e) {
                    lines.push_back("eta " + fmt(eta) + ": no certified m (" + e.what() + ")");
                }
            }
            csv << eta << "," << worst << "," << tw.min_angle << ","
                << (m_value.is_null() ? std::string("NA") : std::to_string(m_value.get<int>())) << "\n";
            rows.push_back({{"eta", eta}, {"max_stable_angle", worst}, {"min_twist_angle", tw.min_angle},
                            {"certified_m", m_value}});
            lines.push_back("eta " + fmt(eta) + ": max angle " + fmt(worst) + ", twist angle " + fmt(tw.min_angle) +
                            ", m " + (m_value.is_null() ? std::string("NA") : std::to_string(m_value.get<int>())));
            etas.push_back(eta);
            angles.push_back(worst);
        }
        json result = {{"type", "eta_sweep"}, {"rows", rows}, {"points_per_eta", n * n}, {"pass", true}};
        bool positive = true;
        for (double a : angles) positive = positive && a > 0.0;
        if (etas.size() >= 2 && positive) {
            const double slope = loglog_slope(etas, angles);
            result["loglog_slope"] = slope;
            lines.push_back("log-log slope of max angle vs eta: " + fmt(slope));
        } else {
            result["loglog_slope"] = nullptr;
        }
        bool decreasing = true;
        for (std::size_t i = 1; i < angles.size(); ++i) decreasing = decreasing && angles[i] < angles[i - 1];
        result["strictly_decreasing"] = decreasing;
        result["max_angle"] = angles.empty() ? 0.0 : *std::max_element(angles.begin(), angles.end());
        report["results"].push_back(result);

        stage = "write";
        std::error_code ec;
        fs::create_directories(config.output_dir, ec);
        std::ofstream(config.output_dir / "sweep_eta.csv") << csv.str();
        std::ofstream(config.output_dir / "sweep_eta_plot.py")
            << "# Log-log plot of sweep_eta.csv: max stable-bundle angle against eta.\n"
               "import csv, sys\n"
               "import matplotlib\n"
               "matplotlib.use('Agg')\n"
               "import matplotlib.pyplot as plt\n\n"
               "path = sys.argv[1] if len(sys.argv) > 1 else 'sweep_eta.csv'\n"
               "rows = [r for r in csv.DictReader(open(path)) if float(r['max_stable_angle']) > 0]\n"
               "eta = [float(r['eta']) for r in rows]\n"
               "ang = [float(r['max_stable_angle']) for r in rows]\n"
               "plt.loglog(eta, ang, 'o-', label='max angle')\n"
               "if eta:\n"
               "    plt.loglog(eta, [ang[0] * eta[0] / e for e in eta], '--', label='slope -1')\n"
               "plt.xlabel('eta')\n"
               "plt.ylabel('angle to horizontal')\n"
               "plt.legend()\n"
               "plt.savefig(path.rsplit('.', 1)[0] + '.png', dpi=120)\n";
    } catch (...) {
        const ErrorInfo e = capture(stage);
        attach(report, e);
        return finish(config, report, lines, start, log, e.code);
    }
    return finish(config, report, lines, start, log);
}

int cmd_twist_check(const ExperimentConfig& config, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    json report = header(config, "twist-check");
    std::vector<std::string> lines;
    std::string stage = "model";
    try {
        const SuspensionPtr model = build_suspension(config.model);
        stage = "twist";
        if (config.twists.empty()) bad("twist-check needs at least one twist");
        for (const auto& t : config.twists) {
            const TwistPath path = t.path();
            const MinAngleReport r = check_twist_transversality(path, *model, config.twist_grid);
            report["results"].push_back(twist_report_json(path, r));
            lines.push_back(path.describe() + ": min angle " + fmt(r.min_angle) + " at s = " + fmt(r.argmin_s) +
                            (r.pass ? " PASS" : " FAIL"));
        }
        stage = "group";
        const GroupReport g = twist_group_probe(model->foliations(), {{1, 0}, {0, 1}, {1, 1}, {1, -1}}, config.twist_grid);
        json passing = json::array();
        for (const auto& [a, b] : g.passing) passing.push_back({a, b});
        report["results"].push_back({{"type", "twist_group"},
                                     {"summary", g.summary},
                                     {"passing", passing},
                                     {"irrational_slopes", g.irrational_slopes},
                                     {"invalid_foliations", g.invalid_foliations},
                                     {"pass", !g.invalid_foliations}});
        lines.push_back("group probe: " + g.summary);
    } catch (...) {
        const ErrorInfo e = capture(stage);
        attach(report, e);
        return finish(config, report, lines, start, log, e.code);
    }
    return finish(config, report, lines, start, log);
}

int cmd_shadow(const ExperimentConfig& config, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    json report = header(config, "shadow");
    std::vector<std::string> lines;
    std::string stage = "model";
    try {
        const auto model = build_model(config.model);
        const bool geodesic = config.model.type == "geodesic";
        ShadowOptions so;
        so.threads = config.threads();
        std::error_code ec;
        fs::create_directories(config.output_dir, ec);

        std::vector<double> deltas, corrections;
        std::vector<PseudoOrbit> last_pseudo;
        std::vector<ShadowResult> last_shadow;
        bool all_ok = true;
        json runs = json::array();
        for (std::size_t di = 0; di < config.shadow_deltas.size(); ++di) {
            const double delta = config.shadow_deltas[di];
            double worst_correction = 0.0;
            last_pseudo.clear();
            last_shadow.clear();
            for (std::uint64_t seed : config.seeds) {
                stage = "shadow delta=" + fmt(delta) + " seed=" + std::to_string(seed);
                std::mt19937_64 rng(seed);
                const ModelPoint p0 = model->sample(rng);
                PseudoOrbit po = make_pseudo_orbit(model, p0, config.shadow_steps, delta, seed);
                ShadowResult r = shadow(po, config.shadow_eps, so);
                const bool ok = r.success && r.max_residual < 1e-10;
                all_ok = all_ok && ok;
                worst_correction = std::max(worst_correction, r.max_correction);
                runs.push_back({{"delta", delta},
                                {"seed", seed},
                                {"max_defect", po.max_defect()},
                                {"max_correction", r.max_correction},
                                {"max_residual", r.max_residual},
                                {"max_time_change", r.max_time_change},
                                {"iterations", r.iterations},
                                {"success", ok}});
                lines.push_back("delta " + fmt(delta) + " seed " + std::to_string(seed) + ": correction " +
                                fmt(r.max_correction) + ", residual " + fmt(r.max_residual) + ", iterations " +
                                std::to_string(r.iterations) + (ok ? "" : " NOT SHADOWED"));

                std::ostringstream name;
                name << "shadow_d" << di << "_seed" << seed << ".csv";
                std::ofstream csv(config.output_dir / name.str());
                csv << std::setprecision(17) << "k,"
                    << (geodesic ? "a,b,c,d" : "x,y,s") << ",defect,correction\n";
                for (std::size_t k = 0; k < po.points.size(); ++k) {
                    csv << k;
                    const ModelPoint& q = po.points[k];
                    for (int c = 0; c < (geodesic ? 4 : 3); ++c) csv << "," << q[c];
                    csv << "," << (k < po.defects.size() ? po.defects[k] : 0.0) << ","
                        << model->distance(po.points[k], r.points[k]) << "\n";
                }
                last_pseudo.push_back(std::move(po));
                last_shadow.push_back(std::move(r));
            }
            if (delta > 0.0) {
                deltas.push_back(delta);
                corrections.push_back(worst_correction);
            }
        }
        json result = {{"type", "shadowing"}, {"runs", runs}, {"all_shadowed", all_ok}};
        if (deltas.size() >= 2) {
            const double slope = loglog_slope(deltas, corrections);
            result["correction_slope"] = slope;
            lines.push_back("log-log slope of correction vs delta: " + fmt(slope));
        } else {
            result["correction_slope"] = nullptr;
        }

        stage = "idempotence";
        PseudoOrbit again = last_pseudo.front();
        again.points = last_shadow.front().points;
        again.times = last_shadow.front().times;
        const ShadowResult twice = shadow(again, config.shadow_eps, so);
        const bool idempotent = twice.max_correction <= 1e-10;
        result["idempotence_correction"] = twice.max_correction;
        lines.push_back("re-shadowing a true orbit moves it by " + fmt(twice.max_correction));

        bool unique = true;
        if (last_pseudo.size() >= 2) {
            stage = "uniqueness";
            const UniquenessReport u =
                uniqueness_probe(last_pseudo[0], last_shadow[0], last_pseudo[1], last_shadow[1], config.shadow_eps);
            unique = u.pass;
            result["uniqueness"] = {{"pseudo_separation", u.pseudo_separation},
                                    {"shadow_separation", u.shadow_separation},
                                    {"inputs_separated", u.inputs_separated},
                                    {"same_orbit", u.same_orbit},
                                    {"shift", u.shift},
                                    {"pass", u.pass}};
            lines.push_back("uniqueness probe: input separation " + fmt(u.pseudo_separation) + ", shadow separation " +
                            fmt(u.shadow_separation) + (u.pass ? " PASS" : " FAIL"));
        }
        result["pass"] = all_ok && idempotent && unique;
        report["results"].push_back(result);
    } catch (...) {
        const ErrorInfo e = capture(stage);
        attach(report, e);
        return finish(config, report, lines, start, log, e.code);
    }
    return finish(config, report, lines, start, log);
}

int cmd_ftle(const ExperimentConfig& config, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    json report = header(config, "ftle");
    std::vector<std::string> lines;
    std::string stage = "model";
    try {
        const Pipeline p = build_pipeline(config, !config.m && !config.twists.empty(), &stage);
        stage = "ftle";
        std::mt19937_64 rng(config.seeds.front());
        std::vector<ModelPoint> pts;
        for (int i = 0; i < config.ftle_points; ++i) pts.push_back(p.model->sample(rng));
        const auto exps = parallel_map<std::array<double, 3>>(
            pts.size(), [&](std::size_t i) { return ftle(p.map, pts[i], config.ftle_n); }, config.threads());
        json samples = json::array();
        std::array<double, 3> mean{0, 0, 0};
        for (std::size_t i = 0; i < pts.size(); ++i) {
            samples.push_back({{"point", point_json(pts[i], *p.model)}, {"exponents", exps[i]}});
            for (int k = 0; k < 3; ++k) mean[k] += exps[i][k] / static_cast<double>(pts.size());
        }
        report["results"].push_back({{"type", "ftle"},
                                     {"map", p.map.describe()},
                                     {"n", config.ftle_n},
                                     {"samples", samples},
                                     {"mean", mean},
                                     {"pass", true}});
        lines.push_back("map: " + p.map.describe());
        lines.push_back("mean exponents over " + std::to_string(pts.size()) + " points: " + fmt(mean[0], 10) + ", " +
                        fmt(mean[1], 10) + ", " + fmt(mean[2], 10));
    } catch (...) {
        const ErrorInfo e = capture(stage);
        attach(report, e);
        return finish(config, report, lines, start, log, e.code);
    }
    return finish(config, report, lines, start, log);
}

int cmd_word(const ExperimentConfig& config, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    json report = header(config, "word");
    std::vector<std::string> lines;
    std::string stage = "model";
    try {
        const Pipeline p = build_pipeline(config, false, &stage);
        const MappingWord raw = p.map.word();
        const MappingWord w = raw.reduced();
        json letters = json::array();
        for (const auto& l : w.letters()) letters.push_back({{"gamma", {l.a, l.b}}, {"power", l.power}});
        report["results"].push_back({{"type", "word"},
                                     {"map", p.map.describe()},
                                     {"word", w.to_string()},
                                     {"application_order", w.application_order_string()},
                                     {"unreduced", raw.to_string()},
                                     {"letters", letters},
                                     {"pass", true}});
        lines.push_back("word: " + w.to_string());
        lines.push_back("application order: " + (w.empty() ? std::string("(empty)") : w.application_order_string()));
    } catch (...) {
        const ErrorInfo e = capture(stage);
        attach(report, e);
        return finish(config, report, lines, start, log, e.code);
    }
    return finish(config, report, lines, start, log);
}

int cmd_report(const fs::path& path, std::ostream& log) {
    json r;
    try {
        r = read_json_file(path, "report");
        if (!r.is_object() || !r.contains("schema_version") || !r.contains("results") || !r.contains("command") ||
            !r.contains("config_hash") || !r.contains("pass")) {
            bad("not a phlab report");
        }
        if (r["schema_version"].get<int>() != kSchemaVersion) bad("unsupported schema version");
        if (r["pass"].get<bool>() != roll_up(r)) bad("stored roll-up disagrees with the results");
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return kInvalidInput;
    } catch (const json::exception& e) {
        log << "error: " << e.what() << "\n";
        return kInvalidInput;
    }
    log << "command " << r["command"].get<std::string>() << ", config " << r["config_hash"].get<std::string>()
        << ", tool " << r.value("tool_version", "?") << "\n";
    for (const auto& x : r["results"]) {
        const std::string type = x.value("type", "?");
        log << "  " << type << ": " << (x.value("pass", false) ? "PASS" : "FAIL");
        if (type == "ph_certificate") {
            log << " margins " << x["cone_margin_uu"] << "/" << x["cone_margin_ss"];
            if (x.contains("lambda1")) log << " lambda1 " << x["lambda1"] << " lambda2 " << x["lambda2"];
            for (const auto& w : x["witnesses"]) {
                if (w["kind"].get<std::string>().starts_with("cone-escape")) {
                    log << "\n    witness " << w["kind"].get<std::string>() << " at " << w["point"].dump();
                }
            }
        } else if (type == "h_transversality") {
            log << " min angles " << x["min_unstable_angle"] << "/" << x["min_stable_angle"];
        } else if (type == "word") {
            log << " " << x["word"].get<std::string>();
        } else if (type == "plan") {
            log << " m = " << x["m"];
        }
        log << "\n";
    }
    if (r.contains("error")) {
        log << "  error in stage '" << r["error"].value("stage", "?") << "': " << r["error"].value("message", "")
            << "\n";
    }
    log << "roll-up: " << (r["pass"].get<bool>() ? "PASS" : "FAIL") << "\n";
    return r["pass"].get<bool>() ? kPass : kFail;
}

}  // namespace phlab::cli
