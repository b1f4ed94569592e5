#ifndef SBLAB_EXPERIMENT_HPP
#define SBLAB_EXPERIMENT_HPP

#include <string>
#include <vector>

#include "sblab/analysis.hpp"
#include "sblab/fdtd.hpp"
#include "sblab/statics.hpp"
#include "sblab/thickness.hpp"

namespace sblab {

struct ExperimentSpec {
    std::string name = "run";
    std::string layout_path;
    std::string thickness_path;
    std::vector<double> damping_targets = {0.163, 0.235, 0.306}; // s
    std::string stations_filter; // e.g. "8:1-52,4:1-10"; empty = all
    std::string out_dir = "out";
    unsigned seed = 1;
    bool desk_scale = false;
    int jobs = 1;

    double dt = 1.0 / 480000.0;
    double output_rate = 96000.0;
    double desk_dt = 1.0 / 120000.0;
    double desk_output_rate = 24000.0;
    double sim_seconds = 0.45;
    double excitation_width = 0.001; // s; a knock-like force pulse
    double centroid_fmax = 20000.0;
    double calibration_tolerance = 0.02; // fraction of the target T60
    int reference_key = 26;              // 8' calibration station

    MaterialSpec soundboard_material = spruce();
    MaterialSpec bar_material = spruce();
    ClampBounds thickness_clamp;
    PlateBc bc = PlateBc::clamped;
    ProbeField probe_field = ProbeField::displacement;
    HelmholtzSpec helmholtz{343.0, 0.035, 0.13189, 0.004, 1.7};
};

/// Parse a key = value experiment config; CLI flags override afterwards.
ExperimentSpec load_experiment_spec(const std::string& path);

struct PreparedInstrument {
    SoundboardLayout layout;
    ThicknessMap thickness;
    double dt = 0.0;
    double output_rate = 0.0;
};

/// Load layout and thickness samples, optionally coarsen to desk scale
/// (half the node count, double the spacing), interpolate the thickness
/// field, and pick dt / output rate for the chosen scale.
PreparedInstrument prepare_instrument(const ExperimentSpec& spec);

/// Halve the grid resolution of a layout (desk-scale runs).
SoundboardLayout rescale_layout(const SoundboardLayout& layout, int factor);

std::vector<int> filter_stations(const SoundboardLayout& layout, const std::string& filter);

struct Report {
    int exit_code = 0; // 0 ok, 2 partial (divergences / non-convergence), 1 error
    std::string text;
};

struct AgingArtifacts {
    std::vector<std::vector<MetricsRow>> metrics_per_target; // ordered as targets
    std::vector<double> gammas;
    std::vector<DeltaCentroidRow> delta_curve;
};

Report run_aging_experiment(const ExperimentSpec& spec, AgingArtifacts* artifacts = nullptr);

struct StaticsArtifacts {
    std::vector<std::string> case_names;
    std::vector<StressBreakdown> breakdowns;
    std::vector<StaticResult> results;
    std::vector<StringForce> forces;
};

Report run_statics_experiment(const ExperimentSpec& spec, StaticsArtifacts* artifacts = nullptr);

/// Interpolate the thickness field and dump it as CSV (x_m,y_m,h_m,mask).
Report run_thickness_dump(const ExperimentSpec& spec);

/// Simulate one station and write its WAV plus a metrics line.
Report run_single_simulation(const ExperimentSpec& spec);

/// Recompute metrics from WAV files in a directory.
Report run_analyze(const ExperimentSpec& spec, const std::string& wav_dir);

std::string wav_filename(BridgeId bridge, int key, double gamma);

} // namespace sblab

#endif
