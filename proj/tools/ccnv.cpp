#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "ccnv/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ccnv: checks for CCNV spacetimes and their Killing vectors"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", ccnv::kToolVersion);

    std::string scene_path, report_path;
    ccnv::CommandOptions opt;
    std::uint64_t seed = 0;
    int samples = 0;

    for (const char* name : {"verify", "classify", "invariants", "bracket"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("scene", scene_path, "scene file")->required();
        sub->add_option("--seed", seed, "sampling seed (overrides the scene)");
        sub->add_option("--samples", samples, "number of sample points")->check(CLI::PositiveNumber);
        sub->add_option("--report", report_path, "write the JSON report here");
        if (std::string(name) == "classify") sub->add_option("--grid-out", opt.grid_out, "write the causal grid as CSV");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    auto* sub = app.get_subcommands().front();
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--samples")) opt.samples = samples;

    auto start = std::chrono::steady_clock::now();
    ccnv::CommandResult r;
    try {
        ccnv::Scene scene = ccnv::load_scene(scene_path);
        r = ccnv::run_command(command, scene, opt);
    } catch (const ccnv::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary);
        if (!out || !(out << r.report)) {
            std::cerr << "error: cannot write report " << report_path << "\n";
            return 2;
        }
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << r.summary;
    std::printf("time %.2fs\n", secs);
    return r.pass ? 0 : 1;
}
