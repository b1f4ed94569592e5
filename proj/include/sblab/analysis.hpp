#ifndef SBLAB_ANALYSIS_HPP
#define SBLAB_ANALYSIS_HPP

#include <vector>

#include "sblab/fdtd.hpp"
#include "sblab/geometry.hpp"

namespace sblab {

struct MetricsRow {
    BridgeId bridge = BridgeId::eight_foot;
    int key = 0;
    double gamma = 1.0;
    double t60_s = 0.0;
    double centroid_hz = 0.0;
    bool ok = false;
};

/// Decay time from Schroeder backward integration: the squared signal is
/// integrated from the tail, the decay curve fitted by least squares over
/// the [-5, -35] dB span, and T60 read off the fitted slope (2x the time to
/// fall 30 dB). Throws errc::insufficient_decay when the curve never
/// reaches -35 dB.
double t60(const ImpulseResponse& ir);

/// Amplitude-weighted mean frequency of the magnitude spectrum over
/// 0 < f <= f_max, computed on the full unwindowed response zero-padded to
/// the next power of two.
double spectral_centroid(const ImpulseResponse& ir, double f_max);

struct DeltaCentroidRow {
    BridgeId bridge = BridgeId::eight_foot;
    int key = 0;
    double delta_hz = 0.0;
};

/// Per-station SC(high damping) - SC(low damping), ordered by key within
/// bridge. Stations that diverged in either case are dropped pairwise.
std::vector<DeltaCentroidRow> centroid_difference_curve(
    const std::vector<MetricsRow>& metrics_high_damping,
    const std::vector<MetricsRow>& metrics_low_damping);

struct HelmholtzSpec {
    double speed_of_sound = 343.0;   // m/s
    double hole_radius = 0.0;        // m
    double cavity_volume = 0.0;      // m^3
    double neck_length = 0.0;        // m
    double end_correction_factor = 1.7;

    double effective_length() const { return neck_length + end_correction_factor * hole_radius; }
};

/// f = (c / 2 pi) sqrt(A / (V L_eff)) with A = pi r^2.
double helmholtz_frequency(const HelmholtzSpec& spec);

} // namespace sblab

#endif
