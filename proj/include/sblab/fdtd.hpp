#ifndef SBLAB_FDTD_HPP
#define SBLAB_FDTD_HPP

#include <string>
#include <vector>

#include "sblab/geometry.hpp"
#include "sblab/materials.hpp"
#include "sblab/plate_model.hpp"

namespace sblab {

enum class ExcitationKind { velocity_impulse, raised_cosine };

struct Excitation {
    int station = 0; // index into layout.stations
    ExcitationKind kind = ExcitationKind::raised_cosine;
    double amplitude = 1.0; // m/s for impulses, N for force pulses
    double width = 0.0;     // s; defaults to 10 dt for raised_cosine
};

struct ImpulseResponse {
    int station = -1; // index into layout.stations
    std::vector<double> samples;
    double rate = 0.0;
};

struct SimConfig {
    const SoundboardLayout* layout = nullptr;
    const ThicknessMap* thickness = nullptr;
    MaterialSpec soundboard_material = spruce();
    MaterialSpec bar_material = spruce();
    TimeSpec time;
    Excitation excitation;
    std::vector<int> probes; // station indices
    double output_rate = 96000.0;
    PlateBc bc = PlateBc::clamped;
    ProbeField probe_field = ProbeField::displacement;
    bool parallel_kernel = true;
};

/// Time-march the coupled system and return one decimated response per
/// probe. Throws errc::divergence (with step and node) if the state blows
/// up, errc::unstable_configuration if the assembled system cannot run at
/// the configured dt.
std::vector<ImpulseResponse> simulate(const SimConfig& config);

struct CalibrationResult {
    double gamma = 1.0;
    double achieved_t60 = 0.0;
    int iterations = 0;
};

/// Bisect the velocity decrement until the simulated T60 at the excitation
/// station lands within tolerance of the target. The closed-form seed for a
/// per-step velocity multiply is T60 = 6 ln(10) dt / (1 - gamma).
CalibrationResult calibrate_decrement(const SimConfig& config, double target_t60,
                                      double tolerance);

double closed_form_t60(double gamma, double dt);
double closed_form_gamma(double t60, double dt);

struct StationRun {
    int station = -1;
    bool ok = false;
    std::string detail; // divergence or error text when !ok
    ImpulseResponse response;
};

/// One independent simulation per station (excited and probed at the same
/// station). Runs are distributed over `parallelism` threads; results are
/// identical to a sequential run and per-station failures are recorded
/// without aborting the batch.
std::vector<StationRun> run_batch(const SimConfig& base, const std::vector<int>& stations,
                                  int parallelism);

} // namespace sblab

#endif
