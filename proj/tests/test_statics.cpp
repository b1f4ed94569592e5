#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sblab/layout_io.hpp"
#include "sblab/statics.hpp"
#include "sblab/thickness.hpp"
#include "test_support.hpp"

using namespace sblab;
using sblab::testing::data_path;
using sblab::testing::rect_layout;
using sblab::testing::uniform_map;

TEST_CASE("string tension formula") {
    CHECK(string_tension(0.0, 1.0, 0.0003, 7874.0) == 0.0);

    // Brass, d 0.5 mm, L 1.8 m, f 49 Hz:
    // mu = 8635 pi (5e-4)^2 / 4 = 1.69558e-3 kg/m, T = mu (2 L f)^2 = 52.76 N.
    double t = string_tension(49.0, 1.8, 0.0005, 8635.0);
    CHECK(t == doctest::Approx(52.763).epsilon(1e-3));

    // Monotone in every parameter.
    CHECK(string_tension(50.0, 1.8, 0.0005, 8635.0) > t);
    CHECK(string_tension(49.0, 1.9, 0.0005, 8635.0) > t);
    CHECK(string_tension(49.0, 1.8, 0.00051, 8635.0) > t);
    CHECK(string_tension(49.0, 1.8, 0.0005, 8700.0) > t);
}

TEST_CASE("bearing force formula") {
    CHECK(bearing_force(50.0, 0.0) == 0.0);
    CHECK(bearing_force(50.0, 10.0 * M_PI / 180.0) == doctest::Approx(8.7156).epsilon(1e-4));
    for (double deg : {1.0, 10.0, 30.0, 59.0})
        CHECK(bearing_force(50.0, deg * M_PI / 180.0) < 50.0);
}

TEST_CASE("load case toggles and bookkeeping") {
    SoundboardLayout layout = build_layout(data_path("dulcken_layout.txt"));
    std::vector<StringForce> forces = compute_string_forces(layout);
    REQUIRE(forces.size() == 104);

    SUBCASE("all toggles off gives an empty force list") {
        LoadCase lc = build_load_case(layout, forces, {});
        for (double f : lc.fz) CHECK(f == 0.0);
        for (double f : lc.inplane) CHECK(f == 0.0);
    }

    SUBCASE("rail-only case loads only rail nodes") {
        LoadToggles t;
        t.rail4_inplane = true;
        t.rail4_normal = true;
        LoadCase lc = build_load_case(layout, forces, t);
        const StiffenerPath* rail = layout.find_stiffener("rail4");
        REQUIRE(rail != nullptr);
        std::vector<int> chain = rasterize_path(*rail, layout.grid, &layout.mask);
        for (int node = 0; node < layout.grid.count(); ++node) {
            size_t k = static_cast<size_t>(node);
            if (lc.fz[k] != 0.0 || lc.inplane[k] != 0.0) {
                bool on_rail = std::find(chain.begin(), chain.end(), node) != chain.end();
                CHECK(on_rail);
            }
        }
    }

    SUBCASE("net normal force equals rail normal sum minus bearing sums") {
        LoadToggles t;
        t.bridge8_bearing = t.bridge4_bearing = t.rail4_inplane = t.rail4_normal = true;
        LoadCase lc = build_load_case(layout, forces, t);
        double net = 0.0;
        for (double f : lc.fz) net += f;
        double expect = 0.0;
        for (const StringForce& f : forces) expect += f.rail_normal - f.bearing_normal;
        CHECK(net == doctest::Approx(expect).epsilon(1e-9));
    }

    SUBCASE("toggle referencing an absent stiffener fails") {
        SoundboardLayout bare = rect_layout(0.3, 0.4, 0.01);
        LoadToggles t;
        t.rail4_inplane = true;
        CHECK_THROWS_AS(build_load_case(bare, {}, t), error);
    }
}

namespace {

LoadCase point_load(const GridSpec& grid, int node, double fz) {
    LoadCase lc;
    lc.fz.assign(static_cast<size_t>(grid.count()), 0.0);
    lc.inplane.assign(static_cast<size_t>(grid.count()), 0.0);
    lc.fz[static_cast<size_t>(node)] = fz;
    return lc;
}

} // namespace

TEST_CASE("zero load produces zero displacement") {
    SoundboardLayout layout = rect_layout(0.3, 0.3, 0.015);
    ThicknessMap map = uniform_map(layout, 0.003);
    MaterialSpec mat = spruce();
    SolveOptions opt;
    opt.dt = 1.0 / 200000.0;
    opt.max_steps = 20000;
    opt.parallel = false;
    LoadCase lc = point_load(layout.grid, layout.grid.index(10, 10), 0.0);
    StaticResult res = solve_static(layout, map, mat, lc, opt);
    CHECK(res.converged);
    for (double w : res.w) CHECK(w == 0.0);
}

TEST_CASE("clamped square plate under uniform pressure hits the classical coefficient") {
    // w_center = 0.00126 q a^4 / D for a clamped square isotropic plate.
    const double a = 0.4, h = 0.003, dx = 0.01;
    SoundboardLayout layout = rect_layout(a, a, dx);
    ThicknessMap map = uniform_map(layout, h);
    MaterialSpec mat;
    mat.e_long = 200e9;
    mat.anisotropy_ratio = 1.0;
    mat.density = 7850.0;
    mat.poisson_major = 0.3;

    const double q = 1000.0; // N/m^2
    LoadCase lc;
    lc.fz.assign(static_cast<size_t>(layout.grid.count()), 0.0);
    lc.inplane.assign(static_cast<size_t>(layout.grid.count()), 0.0);
    for (int node = 0; node < layout.grid.count(); ++node)
        if (layout.mask[static_cast<size_t>(node)])
            lc.fz[static_cast<size_t>(node)] = q * dx * dx;

    SolveOptions opt;
    opt.dt = 0.9 * 2.0 / std::sqrt(plate_node_rate2(mat, h, dx));
    opt.gamma = 0.9995;
    opt.max_steps = 400000;
    opt.parallel = true;
    StaticResult res = solve_static(layout, map, mat, lc, opt);
    REQUIRE(res.converged);

    double d = mat.e_long * h * h * h / (12.0 * (1.0 - 0.09));
    double expected = 0.00126 * q * a * a * a * a / d;
    int center = layout.grid.index(layout.grid.nx / 2, layout.grid.ny / 2);
    CHECK(res.w[static_cast<size_t>(center)] ==
          doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("static solve is linear and superposable") {
    SoundboardLayout layout = rect_layout(0.24, 0.3, 0.015);
    ThicknessMap map = uniform_map(layout, 0.004);
    MaterialSpec mat = spruce();
    SolveOptions opt;
    opt.dt = 1.0 / 150000.0;
    opt.gamma = 0.999;
    opt.max_steps = 300000;
    opt.parallel = false;

    int n1 = layout.grid.index(6, 8);
    int n2 = layout.grid.index(10, 13);
    StaticResult r1 = solve_static(layout, map, mat, point_load(layout.grid, n1, 2.0), opt);
    StaticResult r2 = solve_static(layout, map, mat, point_load(layout.grid, n2, -1.5), opt);
    LoadCase both = point_load(layout.grid, n1, 2.0);
    both.fz[static_cast<size_t>(n2)] = -1.5;
    StaticResult rb = solve_static(layout, map, mat, both, opt);
    LoadCase dbl = point_load(layout.grid, n1, 4.0);
    StaticResult rd = solve_static(layout, map, mat, dbl, opt);
    REQUIRE(r1.converged);
    REQUIRE(r2.converged);
    REQUIRE(rb.converged);
    REQUIRE(rd.converged);

    double scale = 0.0;
    for (double w : rb.w) scale = std::max(scale, std::fabs(w));
    double worst_super = 0.0, worst_lin = 0.0;
    for (size_t k = 0; k < rb.w.size(); ++k) {
        worst_super = std::max(worst_super, std::fabs(rb.w[k] - (r1.w[k] + r2.w[k])));
        worst_lin = std::max(worst_lin, std::fabs(rd.w[k] - 2.0 * r1.w[k]));
    }
    CHECK(worst_super / scale < 1e-6);
    CHECK(worst_lin / (2.0 * scale) < 1e-6);
}

TEST_CASE("stress integration: uniform field and additivity") {
    SoundboardLayout layout = rect_layout(0.2, 0.2, 0.02);
    StaticResult res;
    res.grid = layout.grid;
    res.mask = layout.mask;
    size_t n = static_cast<size_t>(layout.grid.count());
    res.w.assign(n, 0.0);
    res.sx.assign(n, 3.0);
    res.sy.assign(n, 0.0);
    res.sxy.assign(n, 4.0); // magnitude 5 everywhere

    double total_nodes = 0.0;
    for (auto m : layout.mask) total_nodes += m;

    SUBCASE("uniform stress over a half region") {
        Mask half(n, 0);
        double count = 0.0;
        for (int j = 0; j < layout.grid.ny; ++j)
            for (int i = 0; i < layout.grid.nx / 2; ++i) {
                size_t k = static_cast<size_t>(layout.grid.index(i, j));
                if (layout.mask[k]) {
                    half[k] = 1;
                    count += 1.0;
                }
            }
        CHECK(integrate_stress(res, half) ==
              doctest::Approx(5.0 * count / total_nodes).epsilon(1e-12));
    }

    SUBCASE("whole-mask integral") {
        CHECK(integrate_stress(res, layout.mask) == doctest::Approx(5.0).epsilon(1e-12));
    }

    SUBCASE("empty region is an error") {
        Mask empty(n, 0);
        CHECK_THROWS_AS(integrate_stress(res, empty), error);
    }
}

TEST_CASE("per-part shares sum to 100%") {
    SoundboardLayout layout = build_layout(data_path("dulcken_layout.txt"));
    StaticResult res;
    res.grid = layout.grid;
    res.mask = layout.mask;
    size_t n = static_cast<size_t>(layout.grid.count());
    res.w.assign(n, 0.0);
    res.sx.assign(n, 1.0);
    res.sy.assign(n, 2.0);
    res.sxy.assign(n, 2.0);
    StressBreakdown bd = integrate_stress_parts(res, layout);
    double pct = 0.0, sum = 0.0;
    for (const StressPart& p : bd.parts) {
        pct += p.pct;
        sum += p.value;
    }
    CHECK(pct == doctest::Approx(100.0).epsilon(0.001));
    CHECK(sum == doctest::Approx(bd.total).epsilon(1e-9));
    CHECK(bd.total == doctest::Approx(3.0).epsilon(1e-9));
}
