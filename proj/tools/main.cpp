#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "sblab/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    std::string stations;
    int jobs = 0;
    bool desk_scale = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "experiment config file")->required();
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--stations", args.stations, "station filter, e.g. 8:1-52,4:1-10");
    cmd->add_option("--jobs", args.jobs, "parallel station simulations");
    cmd->add_flag("--desk-scale", args.desk_scale, "half-resolution grid for quick runs");
}

sblab::ExperimentSpec make_spec(const CommonArgs& args) {
    sblab::ExperimentSpec spec = sblab::load_experiment_spec(args.config);
    if (!args.out.empty()) spec.out_dir = args.out;
    if (!args.stations.empty()) spec.stations_filter = args.stations;
    if (args.jobs > 0) spec.jobs = args.jobs;
    if (args.desk_scale) spec.desk_scale = true;
    return spec;
}

int run_guarded(const std::function<sblab::Report()>& fn) {
    try {
        sblab::Report report = fn();
        std::fputs(report.text.c_str(), stdout);
        return report.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Harpsichord soundboard simulation laboratory"};
    app.require_subcommand(1);

    CommonArgs thickness_args, simulate_args, aging_args, statics_args, analyze_args;
    std::string wav_dir;

    CLI::App* thickness = app.add_subcommand("thickness", "interpolate and dump the thickness map");
    add_common(thickness, thickness_args);

    CLI::App* simulate = app.add_subcommand("simulate", "impulse response at one station");
    add_common(simulate, simulate_args);

    CLI::App* aging = app.add_subcommand("aging", "damping sweep with T60/centroid metrics");
    add_common(aging, aging_args);

    CLI::App* statics = app.add_subcommand("statics", "string-load toggle matrix");
    add_common(statics, statics_args);

    CLI::App* analyze = app.add_subcommand("analyze", "metrics from existing wav files");
    add_common(analyze, analyze_args);
    analyze->add_option("--wavs", wav_dir, "directory of wav files")->required();

    CLI11_PARSE(app, argc, argv);

    if (thickness->parsed())
        return run_guarded([&] { return sblab::run_thickness_dump(make_spec(thickness_args)); });
    if (simulate->parsed())
        return run_guarded([&] { return sblab::run_single_simulation(make_spec(simulate_args)); });
    if (aging->parsed())
        return run_guarded([&] { return sblab::run_aging_experiment(make_spec(aging_args)); });
    if (statics->parsed())
        return run_guarded([&] { return sblab::run_statics_experiment(make_spec(statics_args)); });
    if (analyze->parsed())
        return run_guarded(
            [&] { return sblab::run_analyze(make_spec(analyze_args), wav_dir); });
    return 1;
}
