// evgrid: EV charging impact pipeline for radial distribution feeders.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evgrid/error.hpp"
#include "evgrid/pipeline.hpp"

int main(int argc, char** argv) {
    using evgrid::Stage;

    CLI::App app{"EV charging impact analysis on radial distribution feeders"};
    app.require_subcommand(1);

    struct Command {
        Stage stage;
        const char* name;
        const char* help;
    };
    const std::vector<Command> commands{
        {Stage::Validate, "validate", "Check the network topology and station registry"},
        {Stage::Profile, "profile", "Synthesize the fleet charging profile and find its peak"},
        {Stage::Assign, "assign", "Allocate the peak over stations and assign them to buses"},
        {Stage::Run, "run", "Solve before/after power flow and time series"},
        {Stage::Impact, "impact", "Classify per-line flow and loss changes"},
        {Stage::Export, "export", "Write the styled GeoJSON map layer"},
        {Stage::Pipeline, "pipeline", "Run every stage and write all artifacts"},
    };

    std::string config_path;
    std::string out_dir;
    std::vector<std::pair<CLI::App*, Stage>> subs;
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", config_path, "Run configuration JSON")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Override output_dir from the configuration");
        subs.emplace_back(sub, c.stage);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    evgrid::RunConfig cfg;
    try {
        cfg = evgrid::load_run_config(config_path);
    } catch (const evgrid::SchemaError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return evgrid::kExitSchema;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return evgrid::kExitFailure;
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    for (const auto& [sub, stage] : subs) {
        if (*sub) return evgrid::run_stage(stage, cfg, std::cerr);
    }
    return evgrid::kExitFailure;
}
