#include <doctest.h>

#include <cmath>

#include "sblab/analysis.hpp"
#include "sblab/dsp.hpp"
#include "sblab/fdtd.hpp"
#include "test_support.hpp"

using namespace sblab;
using sblab::testing::rect_layout;
using sblab::testing::uniform_map;

namespace {

// Steel-like isotropic test plate.
MaterialSpec steel() {
    MaterialSpec mat;
    mat.e_long = 200e9;
    mat.anisotropy_ratio = 1.0;
    mat.density = 7850.0;
    mat.poisson_major = 0.3;
    mat.decrement = 1.0;
    return mat;
}

// One station per layout so the sim API has an excitation target.
void add_station(SoundboardLayout& layout, double x, double y) {
    StringStation st;
    st.key = static_cast<int>(layout.stations.size()) + 1;
    st.bridge = BridgeId::eight_foot;
    st.node = layout.grid.index(layout.grid.nearest_i(x), layout.grid.nearest_j(y));
    st.scale_length = 0.5;
    st.diameter = 0.0003;
    st.material = StringMaterial::iron;
    st.pitch_hz = 220.0;
    st.break_angle = 10.0 * M_PI / 180.0;
    layout.stations.push_back(st);
}

SimConfig plate_config(const SoundboardLayout& layout, const ThicknessMap& map,
                       const MaterialSpec& mat, double dt) {
    SimConfig config;
    config.layout = &layout;
    config.thickness = &map;
    config.soundboard_material = mat;
    config.bar_material = mat;
    config.time.dt = dt;
    config.bc = PlateBc::clamped;
    config.excitation.station = 0;
    config.probes = {0};
    return config;
}

} // namespace

TEST_CASE("zero-amplitude excitation produces a zero response") {
    SoundboardLayout layout = rect_layout(0.3, 0.4, 0.01);
    add_station(layout, 0.1, 0.15);
    ThicknessMap map = uniform_map(layout, 0.003);
    MaterialSpec mat = spruce();
    SimConfig config = plate_config(layout, map, mat, 1.0 / 200000.0);
    config.excitation.amplitude = 0.0;
    config.time.n_steps = 4800;
    config.output_rate = 20000.0;
    std::vector<ImpulseResponse> irs = simulate(config);
    REQUIRE(irs.size() == 1);
    for (double s : irs[0].samples) CHECK(s == 0.0);
}

TEST_CASE("response is linear in the excitation amplitude") {
    SoundboardLayout layout = rect_layout(0.3, 0.4, 0.01);
    add_station(layout, 0.11, 0.17);
    ThicknessMap map = uniform_map(layout, 0.003);
    MaterialSpec mat = spruce();
    SimConfig config = plate_config(layout, map, mat, 1.0 / 200000.0);
    config.time.n_steps = 10000;
    config.output_rate = 20000.0;
    config.excitation.amplitude = 1.0;
    std::vector<double> one = simulate(config)[0].samples;
    config.excitation.amplitude = 2.0;
    std::vector<double> two = simulate(config)[0].samples;
    REQUIRE(one.size() == two.size());
    double worst = 0.0, scale = 0.0;
    for (size_t k = 0; k < one.size(); ++k) {
        worst = std::max(worst, std::fabs(two[k] - 2.0 * one[k]));
        scale = std::max(scale, std::fabs(two[k]));
    }
    CHECK(worst <= 1e-9 * scale);
}

TEST_CASE("undamped energy drifts less than 0.1% over 1e5 steps") {
    SoundboardLayout layout = rect_layout(0.24, 0.3, 0.01);
    ThicknessMap map = uniform_map(layout, 0.003);
    MaterialSpec mat = steel();
    PlateModel::Options opt;
    opt.parallel = false;
    double dt = 0.9 * 2.0 / std::sqrt(plate_node_rate2(mat, 0.003, 0.01));
    PlateModel model(layout, map, mat, mat, dt, opt);
    model.kick(model.plate_dof(layout.grid.index(7, 9)), 1.0);
    model.step();
    double e0 = model.energy();
    REQUIRE(e0 > 0.0);
    double worst = 0.0;
    for (int k = 0; k < 100000; ++k) {
        model.step();
        if ((k & 1023) == 0) worst = std::max(worst, std::fabs(model.energy() - e0) / e0);
    }
    worst = std::max(worst, std::fabs(model.energy() - e0) / e0);
    CHECK(worst < 0.001);
}

TEST_CASE("damped response has a non-increasing Schroeder curve") {
    SoundboardLayout layout = rect_layout(0.3, 0.4, 0.01);
    add_station(layout, 0.13, 0.21);
    ThicknessMap map = uniform_map(layout, 0.003);
    MaterialSpec mat = spruce();
    mat.decrement = 0.9995;
    SimConfig config = plate_config(layout, map, mat, 1.0 / 200000.0);
    config.time.n_steps = 30000;
    config.output_rate = 25000.0;
    std::vector<double> samples = simulate(config)[0].samples;
    double acc = 0.0;
    std::vector<double> schroeder(samples.size());
    for (size_t k = samples.size(); k-- > 0;) {
        acc += samples[k] * samples[k];
        schroeder[k] = acc;
    }
    for (size_t k = 1; k < schroeder.size(); ++k) CHECK(schroeder[k] <= schroeder[k - 1]);
}

TEST_CASE("simply-supported plate modes match the Navier series") {
    // 0.3 x 0.4 m steel plate, dx 5 mm; first three distinct modes.
    const double a = 0.3, b = 0.4, h = 0.003;
    SoundboardLayout layout = rect_layout(a, b, 0.005);
    add_station(layout, 0.31 * a, 0.23 * b);
    ThicknessMap map = uniform_map(layout, h);
    MaterialSpec mat = steel();

    double d = mat.e_long * h * h * h / (12.0 * (1.0 - 0.09));
    double coef = M_PI / 2.0 * std::sqrt(d / (mat.density * h));
    auto navier = [&](int m, int n) {
        return coef * (m * m / (a * a) + n * n / (b * b));
    };

    SimConfig config = plate_config(layout, map, mat, 1.0 / 800000.0);
    config.bc = PlateBc::simply_supported;
    config.excitation.kind = ExcitationKind::velocity_impulse;
    config.time.n_steps = 600000; // 0.75 s
    config.output_rate = 4000.0;
    std::vector<ImpulseResponse> irs = simulate(config);

    std::size_t len = 0;
    std::vector<double> mag = magnitude_spectrum(irs[0].samples, &len);
    double df = irs[0].rate / static_cast<double>(len);
    for (auto [m, n] : {std::pair{1, 1}, {1, 2}, {2, 1}}) {
        double f = navier(m, n);
        double bin = peak_bin(mag, static_cast<size_t>(0.93 * f / df),
                              static_cast<size_t>(1.07 * f / df));
        REQUIRE(bin > 0.0);
        CHECK(std::fabs(bin * df - f) / f < 0.02);
    }
}

TEST_CASE("calibration lands near the closed form on a bare plate") {
    SoundboardLayout layout = rect_layout(0.3, 0.4, 0.01);
    add_station(layout, 0.11, 0.13);
    ThicknessMap map = uniform_map(layout, 0.003);
    MaterialSpec mat = spruce();
    SimConfig config = plate_config(layout, map, mat, 1.0 / 192000.0);
    config.output_rate = 48000.0;

    const double target = 0.15;
    CalibrationResult cal = calibrate_decrement(config, target, 0.003);
    CHECK(std::fabs(cal.achieved_t60 - target) <= 0.003);
    // Closed form for the per-step velocity multiply.
    double predicted = closed_form_t60(cal.gamma, config.time.dt);
    CHECK(std::fabs(predicted - target) / target < 0.10);
}

TEST_CASE("unreachable target reports a non-bracketing error") {
    SoundboardLayout layout = rect_layout(0.3, 0.4, 0.01);
    add_station(layout, 0.11, 0.13);
    ThicknessMap map = uniform_map(layout, 0.003);
    MaterialSpec mat = spruce();
    SimConfig config = plate_config(layout, map, mat, 1.0 / 192000.0);
    config.output_rate = 48000.0;
    CHECK_THROWS_AS(calibrate_decrement(config, 1.0e6, 0.01), error);
}

TEST_CASE("batch runs are identical at any parallelism") {
    SoundboardLayout layout = rect_layout(0.3, 0.4, 0.01);
    add_station(layout, 0.11, 0.13);
    add_station(layout, 0.17, 0.23);
    ThicknessMap map = uniform_map(layout, 0.003);
    MaterialSpec mat = spruce();
    mat.decrement = 0.9995;
    SimConfig config = plate_config(layout, map, mat, 1.0 / 192000.0);
    config.time.n_steps = 20000;
    config.output_rate = 24000.0;

    std::vector<StationRun> seq = run_batch(config, {0, 1}, 1);
    std::vector<StationRun> par = run_batch(config, {0, 1}, 2);
    REQUIRE(seq.size() == par.size());
    for (size_t k = 0; k < seq.size(); ++k) {
        REQUIRE(seq[k].ok);
        REQUIRE(par[k].ok);
        REQUIRE(seq[k].response.samples.size() == par[k].response.samples.size());
        for (size_t s = 0; s < seq[k].response.samples.size(); ++s)
            CHECK(seq[k].response.samples[s] == par[k].response.samples[s]);
    }

    CHECK(run_batch(config, {}, 4).empty());
}

TEST_CASE("first mode converges as the grid refines") {
    // Spec invariant: first-mode frequency moves < 1% when dx halves.
    const double a = 0.3, b = 0.4, h = 0.003;
    MaterialSpec mat = steel();
    auto first_mode = [&](double dx, double dt) {
        SoundboardLayout layout = rect_layout(a, b, dx);
        add_station(layout, 0.29 * a, 0.24 * b);
        ThicknessMap map = uniform_map(layout, h);
        SimConfig config = plate_config(layout, map, mat, dt);
        config.bc = PlateBc::simply_supported;
        config.excitation.kind = ExcitationKind::velocity_impulse;
        config.time.n_steps = static_cast<long>(2.0 / dt);
        config.output_rate = 1.0 / dt / 100.0;
        std::vector<ImpulseResponse> irs = simulate(config);
        std::size_t len = 0;
        std::vector<double> mag = magnitude_spectrum(irs[0].samples, &len);
        double df = irs[0].rate / static_cast<double>(len);
        double bin = peak_bin(mag, static_cast<size_t>(60.0 / df),
                              static_cast<size_t>(220.0 / df));
        REQUIRE(bin > 0.0);
        return bin * df;
    };
    double f_coarse = first_mode(0.02, 1.0 / 48000.0);
    double f_fine = first_mode(0.01, 1.0 / 192000.0);
    CHECK(std::fabs(f_fine - f_coarse) / f_fine < 0.01);
}

TEST_CASE("bar coupling stays reciprocal and bounded") {
    // A plate with one coupled bar across it: energy with gamma = 1 must stay
    // bounded (the penalty coupling is conservative).
    SoundboardLayout layout = rect_layout(0.3, 0.4, 0.01);
    StiffenerPath bar;
    bar.id = "cutoff_bar";
    bar.polyline = {{0.08, 0.1}, {0.22, 0.3}};
    bar.cross_section = {0.012, 0.015};
    bar.treatment = BarTreatment::coupled_bar;
    layout.stiffeners.push_back(bar);
    add_station(layout, 0.15, 0.2);
    ThicknessMap map = uniform_map(layout, 0.004);
    MaterialSpec mat = spruce();

    PlateModel::Options opt;
    opt.parallel = false;
    PlateModel model(layout, map, mat, mat, 1.0 / 480000.0, opt);
    model.kick(model.station_dof(layout.stations[0]), 1.0);
    model.step();
    double e0 = model.energy();
    REQUIRE(e0 > 0.0);
    for (int k = 0; k < 20000; ++k) model.step();
    model.check_finite();
    CHECK(std::fabs(model.energy() - e0) / e0 < 0.001);
}
