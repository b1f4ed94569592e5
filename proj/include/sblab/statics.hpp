#ifndef SBLAB_STATICS_HPP
#define SBLAB_STATICS_HPP

#include <string>
#include <vector>

#include "sblab/geometry.hpp"
#include "sblab/materials.hpp"

namespace sblab {

/// T = mu (2 L f)^2 with mu = rho pi d^2 / 4.
double string_tension(double pitch_hz, double scale_length, double diameter,
                      double material_density);

/// Downbearing of a string crossing a bridge: F = 2 T sin(angle / 2).
double bearing_force(double tension, double break_angle);

double string_material_density(StringMaterial m); // kg/m^3

/// Strings per course: the 8' register is double strung, the 4' single.
int courses(BridgeId bridge);

struct StringForce {
    int station = -1;            // index into layout.stations
    double tension = 0.0;        // N, one string
    double bearing_normal = 0.0; // N downward at the bridge, whole course
    double rail_inplane = 0.0;   // N toward the nut at the 4' hitchpin
    double rail_normal = 0.0;    // N outward at the 4' hitchpin
    int hitch_node = -1;         // rail node carrying the 4' string end
};

/// Per-station force table. 4' rail components are derived from the climb
/// angle between the bridge top and the hitchpin; 8' hitch forces leave the
/// soundboard and are not modeled.
std::vector<StringForce> compute_string_forces(const SoundboardLayout& layout);

struct LoadToggles {
    bool bridge8_bearing = false;
    bool bridge4_bearing = false;
    bool rail4_inplane = false;
    bool rail4_normal = false;
};

struct LoadCase {
    std::vector<double> fz;       // N per full-grid node, + outward
    std::vector<double> inplane;  // N per full-grid node, pull along -y at rail nodes
};

LoadCase build_load_case(const SoundboardLayout& layout,
                         const std::vector<StringForce>& forces, const LoadToggles& toggles);

struct StaticResult {
    GridSpec grid;
    Mask mask;
    std::vector<double> w;   // m, + outward
    std::vector<double> sx;  // N/m^2 surface bending stress
    std::vector<double> sy;  // includes the membrane share over the rail strip
    std::vector<double> sxy;
    bool converged = false;
    double residual = 0.0;   // N, largest nodal force imbalance at the end
    long steps = 0;
};

struct SolveOptions {
    double dt = 1.0 / 480000.0;
    double gamma = 0.999;      // heavy damping for the relaxation march
    long max_steps = 600000;
    double energy_tol = 1e-12; // stop when kinetic energy falls below tol * peak
    bool parallel = true;
};

/// Dynamic relaxation: march the heavily damped plate under constant loads
/// until the kinetic energy dies, then read off displacement and surface
/// bending stress (sigma = 6 M / h^2). In-plane rail pulls act as a membrane
/// tension strip between the rail chain and the rear rim.
StaticResult solve_static(const SoundboardLayout& layout, const ThicknessMap& thickness,
                          const MaterialSpec& material, const LoadCase& load_case,
                          SolveOptions options = {});

/// Area-weighted integral of the stress magnitude sqrt(sx^2 + sy^2 + sxy^2)
/// over `region`, normalized by the whole soundboard area (N/m^2).
double integrate_stress(const StaticResult& result, const Mask& region);

struct StressPart {
    std::string name;
    double value = 0.0; // N/m^2, same normalization as integrate_stress
    double pct = 0.0;
};

struct StressBreakdown {
    double total = 0.0;
    std::vector<StressPart> parts; // plain soundboard, bridges, rail, cross bar, ribs
};

StressBreakdown integrate_stress_parts(const StaticResult& result,
                                       const SoundboardLayout& layout);

} // namespace sblab

#endif
