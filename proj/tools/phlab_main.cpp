#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "phlab/cli.hpp"
#include "phlab/parallel.hpp"

namespace pc = phlab::cli;

int main(int argc, char** argv) {
    CLI::App app{"phlab: partially hyperbolic examples from Anosov flows and Dehn twists"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pc::kToolVersion));

    std::string config_path;
    std::string report_path;
    pc::Overrides o;
    std::uint64_t seed = 0;
    int grid = 0, m = 0;
    double aperture = 0.0, tol = 0.0;
    std::string out;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--seed", seed, "base seed (seeds become seed, seed+1)");
        sub->add_option("--grid", grid, "certification grid points per dimension");
        sub->add_option("--aperture", aperture, "cone aperture in radians");
        sub->add_option("--tol", tol, "transversality angle tolerance");
        sub->add_option("--m", m, "composition exponent, skips the planner");
        sub->add_option("--out", out, "output directory");
        sub->add_flag("--sequential", o.sequential, "single-threaded reference mode");
    };
    const char* names[] = {"certify", "sweep-eta", "twist-check", "shadow", "ftle", "word"};
    const char* help[] = {"build F, plan m and certify partial hyperbolicity",
                          "bundle angle decay over a list of eta values",
                          "transversality of twist loops to the fiber foliations",
                          "shadow noisy orbits and probe uniqueness",
                          "finite-time Lyapunov exponents of F",
                          "mapping class word of F"};
    for (int i = 0; i < 6; ++i) add_common(app.add_subcommand(names[i], help[i]));
    auto* report = app.add_subcommand("report", "summarize a JSON report written by another command");
    report->add_option("file", report_path, "report JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pc::kInvalidInput;
    }

    auto* sub = app.get_subcommands().front();
    const std::string cmd = sub->get_name();
    if (cmd == "report") return pc::cmd_report(report_path, std::cout);

    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--grid")) o.grid = grid;
    if (sub->count("--aperture")) o.aperture = aperture;
    if (sub->count("--tol")) o.tol = tol;
    if (sub->count("--m")) o.m = m;
    if (sub->count("--out")) o.output_dir = out;
    if (o.sequential) phlab::set_default_threads(1);

    pc::ExperimentConfig config;
    try {
        config = pc::load_config(config_path, o);
    } catch (const std::exception& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return pc::kInvalidInput;
    }
    try {
        if (cmd == "certify") return pc::cmd_certify(config, std::cout);
        if (cmd == "sweep-eta") return pc::cmd_sweep_eta(config, std::cout);
        if (cmd == "twist-check") return pc::cmd_twist_check(config, std::cout);
        if (cmd == "shadow") return pc::cmd_shadow(config, std::cout);
        if (cmd == "ftle") return pc::cmd_ftle(config, std::cout);
        if (cmd == "word") return pc::cmd_word(config, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pc::kInvalidInput;
    }
    return pc::kInvalidInput;
}
