// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "phlab/certifier.hpp"
#include "phlab/cli.hpp"
#include "phlab/geodesic.hpp"
#include "phlab/shadowing.hpp"
#include "phlab/suspension.hpp"
#include "phlab/twists.hpp"

using namespace phlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(PHLAB_SOURCE_DIR) / "configs";
const double kLambda = (3 + std::sqrt(5.0)) / 2;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "phlab_acceptance" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

cli::ExperimentConfig config(const std::string& file, const std::string& out) {
    cli::Overrides o;
    o.output_dir = scratch(out).string();
    return cli::load_config(kConfigs / file, o);
}

json read(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

json result_of(const json& report, const std::string& type) {
    for (const auto& r : report["results"]) {
        if (r.value("type", "") == type) return r;
    }
    return json();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

Mat2i cat_map() {
    Mat2i a;
    a << 2, 1, 1, 1;
    return a;
}

SuspensionPtr pure(double eta) { return make_suspension(cat_map(), ExpressionField::constant_field(1.0), eta); }

double pm_identity_distance(const Mat2& g) {
    return std::min((g - Mat2::Identity()).cwiseAbs().maxCoeff(), (g + Mat2::Identity()).cwiseAbs().maxCoeff());
}

Outcome exact_suspension() {
    const auto m = pure(0.0);
    const ComposedMap f{std::make_shared<FlowTimePiece>(m, 1.0)};
    const PHCertificate c = certify_ph(m, f);
    double worst = 0.0;
    std::mt19937_64 rng(11);
    for (int i = 0; i < 8; ++i) {
        const auto e = ftle(f, m->sample(rng), 100);
        worst = std::max({worst, std::abs(e[0] - std::log(kLambda)), std::abs(e[1]),
                          std::abs(e[2] + std::log(kLambda))});
    }
    const double d2 = std::abs(c.lambda2 - kLambda), d1 = std::abs(c.lambda1 - 1 / kLambda);
    return {c.pass && d2 <= 1e-9 && d1 <= 1e-9 && worst <= 1e-6,
            "|l2-lu|=" + fmt(d2) + " |l1-1/lu|=" + fmt(d1) + " ftle err=" + fmt(worst)};
}

Outcome exact_geodesic() {
    const auto m = std::make_shared<GeodesicModel>();
    const ComposedMap f{std::make_shared<FlowTimePiece>(m, 1.0)};
    CertifyOptions o;
    o.grid = 8;
    const PHCertificate c = certify_ph(m, f, o);
    const double d2 = std::abs(c.lambda2 - std::numbers::e), d1 = std::abs(c.lambda1 - 1 / std::numbers::e);
    const double rel = pm_identity_distance(m->group().relator_product());
    return {c.pass && d2 <= 1e-9 && d1 <= 1e-9 && rel <= 1e-8,
            "|l2-e|=" + fmt(d2) + " |l1-1/e|=" + fmt(d1) + " relator=" + fmt(rel)};
}

Outcome transverse_pipeline() {
    std::ostringstream log;
    const cli::ExperimentConfig good = config("certify_eta8.json", "certify_eta8");
    const int code = cli::cmd_certify(good, log);
    const json c = result_of(read(good.output_dir / "certify.json"), "ph_certificate");
    bool ok = code == cli::kPass && good.grid == 32 && !c.is_null();
    double margin = 2, expansion = 0, l1 = 1, l2 = 1;
    if (!c.is_null() && c.value("gaps_evaluated", false)) {
        margin = std::max(c["cone_margin_uu"].get<double>(), c["cone_margin_ss"].get<double>());
        expansion = c["min_expansion_uu"].get<double>();
        l1 = c["lambda1"].get<double>();
        l2 = c["lambda2"].get<double>();
    }
    ok = ok && margin <= 0.9 && expansion > 1 && l1 < 1 && 1 < l2;

    const cli::ExperimentConfig under = config("certify_underiterated.json", "certify_under");
    const int under_code = cli::cmd_certify(under, log);
    const json u = result_of(read(under.output_dir / "certify.json"), "ph_certificate");
    bool escape = false;
    if (!u.is_null()) {
        for (const auto& w : u["witnesses"]) escape = escape || w["kind"].get<std::string>().starts_with("cone-escape");
    }
    ok = ok && under_code == cli::kFail && escape && under.m == 1 && under.model.eta == 1.0;
    return {ok, "exit " + std::to_string(code) + " margin=" + fmt(margin) + " expansion=" + fmt(expansion) +
                    " l1=" + fmt(l1) + " l2=" + fmt(l2) + "; under-iterated exit " + std::to_string(under_code) +
                    (escape ? " with cone escape" : " without cone escape")};
}

Outcome limit_sweep() {
    std::ostringstream log;
    const cli::ExperimentConfig tc = config("sweep_timechanged.json", "sweep_tc");
    const int code = cli::cmd_sweep_eta(tc, log);
    const json r = read(tc.output_dir / "sweep-eta.json")["results"][0];
    const double slope = r["loglog_slope"].is_number() ? r["loglog_slope"].get<double>() : 0.0;
    const bool etas = tc.sweep_etas == std::vector<double>{1, 2, 4, 8, 16};

    const cli::ExperimentConfig pc = config("sweep_pure.json", "sweep_pure");
    const int pure_code = cli::cmd_sweep_eta(pc, log);
    double worst = 0.0;
    for (const auto& row : read(pc.output_dir / "sweep-eta.json")["results"][0]["rows"]) {
        worst = std::max(worst, row["max_stable_angle"].get<double>());
    }
    return {code == cli::kPass && pure_code == cli::kPass && etas && std::abs(slope + 1) <= 0.2 && worst <= 1e-9,
            "slope=" + fmt(slope) + " pure max angle=" + fmt(worst)};
}

Outcome transversality_algebra() {
    const auto m = pure(8.0);
    const DynamicsSpec f = DynamicsSpec::flow_time(m);
    const auto h = std::make_shared<DehnTwistPiece>(m, make_twist_path(1, 0));
    const ComposedMap hm{h};
    TransverseOptions o;
    o.grid = 12;
    // h_eta keeps E^uu horizontal, so its angles sit at pi/2; a fiber rotation
    // after it gives generic angles.
    const Mat2 rot = Eigen::Rotation2Dd(0.4).toRotationMatrix();
    const std::vector<ComposedMap> maps{hm, ComposedMap{h, std::make_shared<FiberLinearPiece>(m, rot)}};
    bool ok = true;
    bool padded = true;
    double sym = 0.0;
    std::string angles;
    TransversalityCertificate base;
    for (std::size_t i = 0; i < maps.size(); ++i) {
        const auto c = check_h_transverse(f, f, maps[i], o);
        if (i == 0) base = c;
        const auto rev = check_h_transverse(f.inverse(), f.inverse(), maps[i].inverse(), o);
        sym = std::max({sym, std::abs(rev.min_unstable_angle - c.min_stable_angle),
                        std::abs(rev.min_stable_angle - c.min_unstable_angle),
                        std::abs(c.reversed_min_unstable_angle - c.min_stable_angle)});
        ok = ok && c.pass && rev.pass == c.pass && c.reversed_pass == c.pass;
        angles += (i ? ", " : "") + fmt(c.min_unstable_angle) + "/" + fmt(c.min_stable_angle);

        // f^k h f^l is h-transverse exactly when h is.
        for (int k = 0; k <= 2; ++k) {
            for (int l = 0; l <= 2; ++l) {
                const ComposedMap p = ComposedMap{std::make_shared<FlowTimePiece>(m, l)}
                                          .then(maps[i])
                                          .then(std::make_shared<FlowTimePiece>(m, k));
                padded = padded && check_h_transverse(f, f, p, o).pass == c.pass;
            }
        }
    }
    ok = ok && padded && sym <= 1e-9;

    // Angles never increase with m, and the planned exponent is the first to reach alpha.
    const Junction j{m, hm, m, base};
    PlanOptions po;
    po.grid = 4;
    po.alpha = 1e-2;
    const PlanResult plan = plan_composition({j}, po);
    const int mu = plan.unstable_exponents.front(), ms = plan.stable_exponents.front();
    bool monotone = true;
    double prev_u = 4, prev_s = 4;
    for (int k = 1; k <= std::max(mu, ms) + 4; ++k) {
        const double au = junction_unstable_angle(j, k, po), as = junction_stable_angle(j, k, po);
        monotone = monotone && au <= prev_u * (1 + 1e-9) && as <= prev_s * (1 + 1e-9);
        monotone = monotone && (k < mu ? au > po.alpha : au <= po.alpha) && (k < ms ? as > po.alpha : as <= po.alpha);
        prev_u = au;
        prev_s = as;
    }
    ok = ok && monotone && plan.exponents.front() == std::max(mu, ms);
    return {ok, "min angles " + angles +
                    " reversal diff=" + fmt(sym) + (padded ? " padding stable" : " padding UNSTABLE") +
                    " m*=" + std::to_string(plan.exponents.front()) + (monotone ? " monotone" : " NOT monotone")};
}

Outcome volume() {
    const auto m = pure(8.0);
    double worst_twist = 0.0;
    for (const auto& [a, b] : std::vector<std::pair<int, int>>{{1, 0}, {0, 1}, {1, 1}, {2, -1}}) {
        const DehnTwistPiece h(m, make_twist_path(a, b));
        for (const ModelPoint& p : m->grid(64)) {
            worst_twist = std::max(worst_twist, std::abs(std::abs(h.jet(p).jacobian.determinant()) - 1));
        }
    }

    // The flow of rho d/ds preserves dvol / rho.
    double worst_flow = 0.0;
    std::mt19937_64 rng(6);
    for (const std::string rho : {"1/(1.3 + 0.3*cos(2*pi*s))", "1/(1 + 0.15*sin(pi*s)*sin(pi*s)*(1 + sin(2*pi*x)))"}) {
        cli::ModelSpec spec;
        spec.rho = rho;
        spec.eta = 2.0;
        const SuspensionPtr s = cli::build_suspension(spec);
        for (int i = 0; i < 100; ++i) {
            const ModelPoint p = s->sample(rng);
            for (double t : {0.7, -1.3, 3.1}) {
                const Jet j = s->flow(p, t);
                const double w = j.jacobian.determinant() * s->speed(p.xyz()) / s->speed(j.point.xyz());
                worst_flow = std::max(worst_flow, std::abs(w - 1));
            }
        }
    }
    return {worst_twist <= 1e-9 && worst_flow <= 1e-6,
            "twist |det|-1 max=" + fmt(worst_twist) + " flow weight err=" + fmt(worst_flow)};
}

ComposedMap padded_twist(const SuspensionPtr& m, int k) {
    const auto f = std::make_shared<FlowTimePiece>(m, k);
    return ComposedMap{f, std::make_shared<DehnTwistPiece>(m, make_twist_path(1, 0)), f};
}

Outcome self_consistency() {
    const cli::ExperimentConfig c = config("certify_eta8.json", "splitting");
    const cli::Pipeline p = cli::build_pipeline(c);
    std::mt19937_64 rng(7);
    double invariance = 0.0;
    for (int i = 0; i < 50; ++i) {
        const ModelPoint x = p.model->sample(rng);
        const SplittingFrame e = estimate_splitting(p.map, x);
        const LinearMap3 d = p.map.differential(x);
        const SplittingFrame ef = estimate_splitting(p.map, d.target);
        invariance = std::max({invariance, angle_between_lines(d.matrix * e.unstable(), ef.unstable()),
                               angle_between_lines(d.matrix * e.stable(), ef.stable()),
                               angle_between_lines(d.matrix * e.center(), ef.center())});
    }

    // F = f^m h f^m: its bundles approach those of the suspension as m grows.
    std::vector<double> angles;
    for (int k : {4, 6, 8}) {
        std::mt19937_64 pts(8);
        double worst = 0.0;
        const ComposedMap f = padded_twist(p.suspension, k);
        for (int i = 0; i < 50; ++i) {
            const ModelPoint x = p.suspension->sample(pts);
            worst = std::max(worst, estimate_splitting(f, x).max_angle_to(*p.suspension->exact_splitting(x)));
        }
        angles.push_back(worst);
    }
    const bool decreasing = angles[0] > angles[1] && angles[1] > angles[2];
    return {invariance <= 1e-6 && decreasing, "m=" + std::to_string(p.m) + " invariance=" + fmt(invariance) +
                                                  " frame angle m=4,6,8: " + fmt(angles[0]) + ", " +
                                                  fmt(angles[1]) + ", " + fmt(angles[2])};
}

Outcome shadowing() {
    std::ostringstream log;
    const cli::ExperimentConfig c = config("shadow_suspension.json", "shadow");
    const int code = cli::cmd_shadow(c, log);
    const json r = read(c.output_dir / "shadow.json")["results"][0];
    bool ok = code == cli::kPass && c.shadow_steps == 200 &&
              c.shadow_deltas == std::vector<double>{1e-5, 1e-4, 1e-3} && c.seeds.size() >= 2;
    double residual = 0.0;
    for (const auto& run : r["runs"]) {
        ok = ok && run["success"].get<bool>();
        residual = std::max(residual, run["max_residual"].get<double>());
    }
    const double slope = r["correction_slope"].get<double>();
    const json u = r["uniqueness"];

    // A noiseless pseudo-orbit is already a true orbit.
    const auto m = pure(0.0);
    const ShadowResult zero = shadow(make_pseudo_orbit(m, {0.1, 0.2, 0.3}, 200, 0.0, 0), c.shadow_eps);
    const bool idempotent = zero.success && zero.max_correction == 0.0 && r["idempotence_correction"] <= 1e-10;
    ok = ok && residual < 1e-10 && std::abs(slope - 1) <= 0.1 && idempotent && u["pass"].get<bool>() &&
         u["inputs_separated"].get<bool>() && u["pseudo_separation"].get<double>() >= 3 * c.shadow_eps;
    return {ok, "residual=" + fmt(residual) + " slope=" + fmt(slope) + (idempotent ? " idempotent" : " NOT idempotent") +
                    " separation " + fmt(u["pseudo_separation"].get<double>()) + " -> " +
                    fmt(u["shadow_separation"].get<double>())};
}

// Composition notation built directly from the chain: adjacent letters of one
// class merge, the newest letter goes leftmost.
std::string expected_word(const std::vector<std::pair<int, int>>& chain) {
    struct Letter {
        int a, b, p;
    };
    std::vector<Letter> stack;
    for (auto [a, b] : chain) {
        int p = 1;
        if (a < 0 || (a == 0 && b < 0)) {
            a = -a;
            b = -b;
            p = -1;
        }
        if (!stack.empty() && stack.back().a == a && stack.back().b == b) {
            stack.back().p += p;
            if (stack.back().p == 0) stack.pop_back();
        } else {
            stack.push_back({a, b, p});
        }
    }
    if (stack.empty()) return "1";
    std::string out;
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        if (!out.empty()) out += "·";
        out += "τ(" + std::to_string(it->a) + "," + std::to_string(it->b) + ")";
        if (it->p == -1) {
            out += "⁻¹";
        } else if (it->p != 1) {
            out += "^" + std::to_string(it->p);
        }
    }
    return out;
}

Outcome words() {
    const std::vector<std::pair<int, int>> classes{{1, 0}, {0, 1}, {1, 1}, {-1, 0}, {0, -1}, {-1, -1}, {2, 1}};
    std::vector<std::vector<std::pair<int, int>>> chains{
        {{1, 0}, {-1, 0}}, {{0, 1}, {1, 0}, {-1, 0}, {0, -1}}, {{1, 1}, {1, 1}}, {{0, 1}, {1, 0}}};
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::size_t> pick(0, classes.size() - 1);
    for (int len = 1; len <= 4; ++len) {
        for (int i = 0; i < 6; ++i) {
            std::vector<std::pair<int, int>> c;
            for (int k = 0; k < len; ++k) c.push_back(classes[pick(rng)]);
            chains.push_back(c);
        }
    }
    const fs::path out = scratch("word");
    int mismatches = 0;
    std::string first_bad;
    for (const auto& chain : chains) {
        json twists = json::array();
        for (auto [a, b] : chain) twists.push_back({{"gamma", {a, b}}});
        json j = {{"model", {{"type", "suspension"}, {"eta", 8}}}, {"twists", twists}, {"output_dir", out.string()}};
        const cli::ExperimentConfig c = cli::parse_config(j.dump(), out);
        std::ostringstream log;
        const int code = cli::cmd_word(c, log);
        const std::string got = read(out / "word.json")["results"][0]["word"].get<std::string>();
        if (code != cli::kPass || got != expected_word(chain)) {
            if (mismatches++ == 0) first_bad = got + " vs " + expected_word(chain);
        }
    }
    return {mismatches == 0, std::to_string(chains.size()) + " chains, " + std::to_string(mismatches) + " mismatches" +
                                 (first_bad.empty() ? "" : " (" + first_bad + ")")};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        double budget;  // seconds
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, 10, exact_suspension},       {2, 30, exact_geodesic},  {3, 300, transverse_pipeline},
        {4, 120, limit_sweep},           {5, 120, transversality_algebra}, {6, 60, volume},
        {7, 120, self_consistency},      {8, 120, shadowing},      {9, 1, words},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.budget;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("criterion %d: %s (%s) [%.2f s of %.0f s]\n", c.id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                    c.budget);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
