// Emits the Dulcken instrument dataset: the soundboard layout (boundary,
// stiffeners, stringing schedule) and a synthetic 497-point thickness survey
// following the published contour description (thin treble around 2.4 mm,
// bass around 5.7 mm, a constant 4.3 mm panel behind the cutoff bar, local
// repair bumps up to 7.5 mm). Scale lengths follow a Pythagorean rule with a
// soft bass cap; the real instrument's measured scalings are not public, so
// the schedule is synthetic and flagged as such in reports.
//
// Usage: make_dulcken_data <output-dir>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "sblab/geometry.hpp"

using namespace sblab;

namespace {

constexpr int kKeys = 52;
constexpr double kPitchA = 392.0; // a' of the present tuning

double pitch8(int key) { return kPitchA * std::pow(2.0, (34 + key - 69) / 12.0); }

// Pythagorean scaling with a smooth bass cap.
double capped_scale(double pyth, double knee, double cap) {
    if (pyth <= knee) return pyth;
    return knee + (cap - knee) * (1.0 - std::exp(-(pyth - knee) / (cap - knee)));
}

double scale8(int key) {
    double pyth = 0.36 * std::pow(2.0, (38 - key) / 12.0);
    return capped_scale(pyth, 1.05, 1.72);
}

// The 4' choir runs relatively long (about 0.61 of the 8'), which is what
// gives it the higher per-string tension carried by the hitchpin rail.
double scale4(int key) {
    double pyth = 0.22 * std::pow(2.0, (38 - key) / 12.0);
    return capped_scale(pyth, 0.62, 0.95);
}

double x8(int key) { return 0.60 - 0.47 * std::pow((52.0 - key) / 51.0, 0.9); }
double x4(int key) { return 0.58 - 0.46 * std::pow((52.0 - key) / 51.0, 0.9); }

double y_nut8(int key) { return -0.32 + 0.28 * (key - 1) / 51.0; }
double y8(int key) { return y_nut8(key) + scale8(key); }
double y4(int key) { return y_nut8(key) + 0.02 + scale4(key); }

double y_hitch4(int key) {
    double gap = std::clamp(0.35 * (y8(key) - y4(key)), 0.045, 0.22);
    return std::min(y4(key) + gap, y8(key) - 0.01);
}

// Total 4' break angle per key: the geometric climb from the hitchpin to the
// bridge top. The speaking side runs essentially level off the nut, so the
// downbearing at the bridge balances the upward pull at the hitch key by
// key, which is what keeps the rail-bridge pair from bowing the panel.
double break_angle4_deg(int key) {
    double gap = y_hitch4(key) - y4(key);
    return 2.0 * std::atan2(0.012, 2.0 * gap) * 180.0 / M_PI;
}

double diameter8(int key) { return 0.5e-3 * std::pow(0.2 / 0.5, (key - 1) / 51.0); }
double diameter4(int key) { return 0.3e-3 * std::pow(0.2 / 0.3, (key - 1) / 51.0); }

const char* material8(int key) { return key <= 13 ? "brass" : "iron"; }
const char* material4(int key) { return key <= 19 ? "brass" : "iron"; }

Polygon dulcken_boundary() {
    Polygon poly;
    poly.pts.push_back({0.005, 0.005});
    poly.pts.push_back({0.705, 0.005});
    poly.pts.push_back({0.705, 0.42});
    // Bentside: convex sweep from the cheek to the tail corner.
    const int n_bent = 14;
    for (int k = 1; k <= n_bent; ++k) {
        double y = 0.42 + (1.70 - 0.42) * k / (n_bent + 1.0);
        double u = (1.70 - y) / (1.70 - 0.42);
        double x = 0.185 + (0.705 - 0.185) * std::pow(u, 1.8);
        poly.pts.push_back({x, y});
    }
    poly.pts.push_back({0.185, 1.70});
    poly.pts.push_back({0.005, 1.765});
    return poly;
}

// Cutoff bar line, used both for the stiffener and the thickness plateau.
double cutoff_x_at(double y) { return 0.26 - 0.22 * (y - 0.05) / 0.70; }

struct Rng {
    std::uint64_t state;
    double next() { // xorshift*, uniform in [0, 1)
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        return static_cast<double>((state * 2685821657736338717ull) >> 11) / 9007199254740992.0;
    }
};

double thickness_mm(double x, double y) {
    // Treble-to-bass ramp.
    const double tx = 0.62, ty = 0.10, bx = 0.12, by = 1.45;
    double vx = bx - tx, vy = by - ty;
    double s = ((x - tx) * vx + (y - ty) * vy) / (vx * vx + vy * vy);
    s = std::clamp(s, 0.0, 1.0);
    double h = 2.45 + (5.7 - 2.45) * std::pow(s, 1.1);

    // Constant panel behind the cutoff bar.
    if (y < 0.80) {
        double d = cutoff_x_at(y) - x; // positive on the spine side
        double blend = std::clamp(d / 0.06, 0.0, 1.0);
        blend = blend * blend * (3.0 - 2.0 * blend);
        h = h * (1.0 - blend) + 4.3 * blend;
    }

    // Repair tapering bump near the tail.
    double rx = x - 0.10, ry = y - 1.60;
    h += 1.8 * std::exp(-(rx * rx + ry * ry) / (2.0 * 0.05 * 0.05));
    return h;
}

void write_layout(const std::string& path) {
    std::ofstream f(path);
    f << "# Dulcken 1755 soundboard layout: boundary, stiffeners, stringing schedule.\n";
    f << "# Geometry hand-derived from instrument photographs and plan drawings;\n";
    f << "# scale lengths are a synthetic Pythagorean schedule (bass-capped).\n\n";
    f << "[grid]\nnx = 72\nny = 178\ndx = 0.01\n\n";

    f << "[boundary]\n";
    for (const Vec2& p : dulcken_boundary().pts) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.4f %.4f\n", p.x, p.y);
        f << buf;
    }

    auto path_header = [&](const char* id, const char* treatment, double height, double width) {
        f << "\n[stiffener " << id << "]\n";
        f << "treatment = " << treatment << "\n";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "height = %.4f\nwidth = %.4f\npath\n", height, width);
        f << buf;
    };
    auto emit = [&](double x, double y) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.4f %.4f\n", x, y);
        f << buf;
    };

    // Bridges traced through the station points (every fourth key keeps the
    // polyline light; stations snap onto the rasterized chain).
    path_header("bridge8", "coupled_bar", 0.014, 0.012);
    for (int k = 1; k <= kKeys; k += 3) emit(x8(k), y8(k));
    emit(x8(kKeys), y8(kKeys));

    path_header("bridge4", "coupled_bar", 0.012, 0.010);
    for (int k = 1; k <= kKeys; k += 3) emit(x4(k), y4(k));
    emit(x4(kKeys), y4(kKeys));

    path_header("rail4", "thickness_add", 0.010, 0.030);
    for (int k = 1; k <= kKeys; k += 3) emit(x4(k), y_hitch4(k));
    emit(x4(kKeys), y_hitch4(kKeys));

    path_header("cutoff_bar", "coupled_bar", 0.015, 0.020);
    emit(0.26, 0.05);
    emit(0.15, 0.40);
    emit(0.04, 0.75);

    path_header("rib_1", "coupled_bar", 0.014, 0.018);
    emit(0.030, 0.160);
    emit(0.200, 0.120);
    path_header("rib_2", "coupled_bar", 0.014, 0.018);
    emit(0.030, 0.340);
    emit(0.155, 0.295);
    path_header("rib_3", "coupled_bar", 0.014, 0.018);
    emit(0.030, 0.520);
    emit(0.115, 0.480);
    path_header("rib_4", "coupled_bar", 0.014, 0.018);
    emit(0.030, 0.660);
    emit(0.065, 0.635);

    f << "\n[stations]\n";
    f << "# key bridge x_m y_m scale_length_m diameter_m material pitch_hz break_angle_deg\n";
    // Break angles follow the afterlength geometry: the 8' strings run long
    // and shallow to the wall hitches, the 4' drop steeply to the rail.
    char buf[160];
    for (int k = 1; k <= kKeys; ++k) {
        std::snprintf(buf, sizeof(buf), "%d eight_foot %.4f %.4f %.4f %.5f %s %.3f 1.5\n", k,
                      x8(k), y8(k), scale8(k), diameter8(k), material8(k), pitch8(k));
        f << buf;
    }
    for (int k = 1; k <= kKeys; ++k) {
        std::snprintf(buf, sizeof(buf), "%d four_foot %.4f %.4f %.4f %.5f %s %.3f %.1f\n", k,
                      x4(k), y4(k), scale4(k), diameter4(k), material4(k), 2.0 * pitch8(k),
                      break_angle4_deg(k));
        f << buf;
    }
}

void write_thickness(const std::string& path) {
    Polygon boundary = dulcken_boundary();
    Rng rng{0x5bd1e995u};

    std::vector<ThicknessSample> samples;
    // Anchor the documented regions exactly.
    samples.push_back({0.60, 0.12, thickness_mm(0.60, 0.12) * 1e-3});
    samples.push_back({0.12, 1.40, thickness_mm(0.12, 1.40) * 1e-3});
    samples.push_back({0.10, 0.30, thickness_mm(0.10, 0.30) * 1e-3});
    samples.push_back({0.10, 1.60, thickness_mm(0.10, 1.60) * 1e-3});

    Vec2 lo, hi;
    boundary.bounding_box(lo, hi);
    while (samples.size() < 497) {
        double x = lo.x + (hi.x - lo.x) * rng.next();
        double y = lo.y + (hi.y - lo.y) * rng.next();
        if (!boundary.contains(x, y)) continue;
        if (boundary.outline_dist2(x, y) < 0.015 * 0.015) continue;
        double noise = (rng.next() - 0.5) * 0.10; // +-0.05 mm survey noise
        samples.push_back({x, y, (thickness_mm(x, y) + noise) * 1e-3});
    }

    std::ofstream f(path);
    f << "x_m,y_m,h_mm\n";
    char buf[64];
    for (const ThicknessSample& s : samples) {
        std::snprintf(buf, sizeof(buf), "%.4f,%.4f,%.3f\n", s.x, s.y, s.h * 1e3);
        f << buf;
    }
}

void write_config(const std::string& path) {
    std::ofstream f(path);
    f << "name = dulcken-1755\n";
    f << "layout = dulcken_layout.txt\n";
    f << "thickness_samples = dulcken_thickness.csv\n";
    f << "targets_t60_s = 0.163, 0.235, 0.306\n";
    f << "rate_hz = 480000\n";
    f << "output_rate_hz = 96000\n";
    f << "desk_rate_hz = 120000\n";
    f << "desk_output_rate_hz = 24000\n";
    f << "sim_seconds = 0.45\n";
    f << "# Knock-like excitation: a millisecond force pulse, as when tapping the bridge.\n";
    f << "excitation_width_s = 0.001\n";
    f << "reference_key = 26\n";
    f << "E_long_pa = 11e9\n";
    f << "anisotropy_ratio = 8\n";
    f << "density = 430\n";
    f << "poisson = 0.3\n";
    f << "# Soundhole and cavity are not simulated; the resonance is analytic.\n";
    f << "helmholtz_speed_mps = 343\n";
    f << "helmholtz_hole_radius_m = 0.035\n";
    f << "helmholtz_cavity_volume_m3 = 0.13189\n";
    f << "helmholtz_neck_length_m = 0.004\n";
    f << "helmholtz_end_correction = 1.7\n";
}

} // namespace

int main(int argc, char** argv) {
    std::string out = argc > 1 ? argv[1] : "data";
    write_layout(out + "/dulcken_layout.txt");
    write_thickness(out + "/dulcken_thickness.csv");
    write_config(out + "/dulcken.cfg");
    std::printf("wrote dulcken dataset to %s\n", out.c_str());
    return 0;
}
