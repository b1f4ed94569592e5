#include "sblab/statics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sblab/plate_model.hpp"

namespace sblab {

double string_tension(double pitch_hz, double scale_length, double diameter,
                      double material_density) {
    require(pitch_hz >= 0.0 && scale_length > 0.0 && diameter > 0.0 && material_density > 0.0,
            errc::bad_argument, "string parameters must be positive");
    double mu = material_density * M_PI * diameter * diameter / 4.0;
    double v = 2.0 * scale_length * pitch_hz;
    return mu * v * v;
}

double bearing_force(double tension, double break_angle) {
    require(break_angle >= 0.0 && break_angle < M_PI / 2.0, errc::bad_argument,
            "break angle must lie in [0, pi/2)");
    return 2.0 * tension * std::sin(0.5 * break_angle);
}

double string_material_density(StringMaterial m) {
    return m == StringMaterial::brass ? 8635.0 : 7874.0;
}

int courses(BridgeId bridge) { return bridge == BridgeId::eight_foot ? 2 : 1; }

std::vector<StringForce> compute_string_forces(const SoundboardLayout& layout) {
    std::vector<int> rail_chain;
    if (const StiffenerPath* rail = layout.find_stiffener("rail4"))
        rail_chain = rasterize_path(*rail, layout.grid, &layout.mask);
    double bridge4_height = 0.0;
    if (const StiffenerPath* b4 = layout.find_stiffener("bridge4"))
        bridge4_height = b4->cross_section.height;

    std::vector<StringForce> forces;
    for (size_t s = 0; s < layout.stations.size(); ++s) {
        const StringStation& st = layout.stations[s];
        StringForce f;
        f.station = static_cast<int>(s);
        f.tension = string_tension(st.pitch_hz, st.scale_length, st.diameter,
                                   string_material_density(st.material));
        f.bearing_normal = courses(st.bridge) * bearing_force(f.tension, st.break_angle);

        if (st.bridge == BridgeId::four_foot && !rail_chain.empty()) {
            // The afterlength continues along the string direction (grid y),
            // so the hitch is the rail node on the same string line and the
            // climb angle follows the y gap.
            double sx = layout.grid.node_x(st.node % layout.grid.nx);
            double sy = layout.grid.node_y(st.node / layout.grid.nx);
            double best_dx = std::numeric_limits<double>::max();
            double best_dy = std::numeric_limits<double>::max();
            int hitch = -1;
            for (int node : rail_chain) {
                double nx = layout.grid.node_x(node % layout.grid.nx);
                double ny = layout.grid.node_y(node / layout.grid.nx);
                double ddx = std::fabs(nx - sx);
                double ddy = std::fabs(ny - sy);
                if (ddx < best_dx || (ddx == best_dx && ddy < best_dy)) {
                    best_dx = ddx;
                    best_dy = ddy;
                    hitch = node;
                }
            }
            double gap = std::max(best_dy, layout.grid.dx);
            double climb = std::atan2(bridge4_height, gap);
            f.hitch_node = hitch;
            f.rail_inplane = f.tension * std::cos(climb);
            f.rail_normal = f.tension * std::sin(climb);
        }
        forces.push_back(f);
    }
    return forces;
}

LoadCase build_load_case(const SoundboardLayout& layout,
                         const std::vector<StringForce>& forces, const LoadToggles& toggles) {
    if (toggles.bridge8_bearing)
        require(layout.find_stiffener("bridge8") != nullptr, errc::bad_argument,
                "bridge8_bearing toggled but the layout has no bridge8");
    if (toggles.bridge4_bearing)
        require(layout.find_stiffener("bridge4") != nullptr, errc::bad_argument,
                "bridge4_bearing toggled but the layout has no bridge4");
    if (toggles.rail4_inplane || toggles.rail4_normal)
        require(layout.find_stiffener("rail4") != nullptr, errc::bad_argument,
                "rail toggles require a rail4 stiffener");

    LoadCase lc;
    lc.fz.assign(static_cast<size_t>(layout.grid.count()), 0.0);
    lc.inplane.assign(static_cast<size_t>(layout.grid.count()), 0.0);
    for (const StringForce& f : forces) {
        const StringStation& st = layout.stations[static_cast<size_t>(f.station)];
        bool bearing_on = st.bridge == BridgeId::eight_foot ? toggles.bridge8_bearing
                                                            : toggles.bridge4_bearing;
        if (bearing_on) lc.fz[static_cast<size_t>(st.node)] -= f.bearing_normal;
        if (f.hitch_node >= 0) {
            if (toggles.rail4_normal) lc.fz[static_cast<size_t>(f.hitch_node)] += f.rail_normal;
            if (toggles.rail4_inplane)
                lc.inplane[static_cast<size_t>(f.hitch_node)] += f.rail_inplane;
        }
    }
    return lc;
}

namespace {

// The hitch pulls toward the nut; the panel reacts through both rims along
// the string line, split like series springs: compression ahead of the
// hitch, tension behind, shares set by the segment lengths.
std::vector<double> membrane_from_inplane(const SoundboardLayout& layout,
                                          const std::vector<double>& inplane) {
    std::vector<double> ny(static_cast<size_t>(layout.grid.count()), 0.0);
    const GridSpec& g = layout.grid;
    for (int node = 0; node < g.count(); ++node) {
        double pull = inplane[static_cast<size_t>(node)];
        if (pull == 0.0) continue;
        int i = node % g.nx;
        int j0 = node / g.nx;
        int j_front = j0, j_rear = j0;
        while (j_front > 0 && layout.mask[static_cast<size_t>(g.index(i, j_front - 1))])
            --j_front;
        while (j_rear + 1 < g.ny && layout.mask[static_cast<size_t>(g.index(i, j_rear + 1))])
            ++j_rear;
        double len_front = std::max(1, j0 - j_front);
        double len_rear = std::max(1, j_rear - j0);
        double share_front = len_rear / (len_front + len_rear);
        double share_rear = len_front / (len_front + len_rear);
        for (int j = j_front; j < j0; ++j)
            ny[static_cast<size_t>(g.index(i, j))] -= pull * share_front / g.dx;
        for (int j = j0; j <= j_rear; ++j)
            ny[static_cast<size_t>(g.index(i, j))] += pull * share_rear / g.dx;
    }
    return ny;
}

} // namespace

StaticResult solve_static(const SoundboardLayout& layout, const ThicknessMap& thickness,
                          const MaterialSpec& material, const LoadCase& load_case,
                          SolveOptions options) {
    require(load_case.fz.size() == static_cast<size_t>(layout.grid.count()),
            errc::bad_argument, "load case does not match the grid");
    for (double f : load_case.fz)
        require(std::isfinite(f), errc::bad_argument, "loads must be finite");

    PlateModel::Options mopt;
    mopt.bc = PlateBc::clamped;
    mopt.parallel = options.parallel;
    PlateModel model(layout, thickness, material, material, options.dt, mopt);
    model.set_gamma(options.gamma);
    if (!load_case.inplane.empty()) {
        std::vector<double> ny = membrane_from_inplane(layout, load_case.inplane);
        bool any = std::any_of(ny.begin(), ny.end(), [](double v) { return v != 0.0; });
        if (any) model.set_membrane_tension(ny);
    }
    model.set_static_load(load_case.fz);

    StaticResult result;
    result.grid = layout.grid;
    result.mask = layout.mask;
    result.converged = false;

    // Kinetic energy passes through zero twice per oscillation cycle, so the
    // stop rule looks at the max over a trailing window of checks.
    double peak_ke = 0.0;
    double window[8] = {};
    size_t window_at = 0;
    long step = 0;
    for (; step < options.max_steps; ++step) {
        model.step();
        if ((step & 255) == 255) {
            model.check_finite();
            double ke = model.kinetic_energy();
            peak_ke = std::max(peak_ke, ke);
            window[window_at++ & 7] = ke;
            double recent = 0.0;
            for (double v : window) recent = std::max(recent, v);
            if (step > 4000 && window_at >= 8 &&
                (peak_ke == 0.0 || recent <= options.energy_tol * peak_ke)) {
                result.converged = true;
                ++step;
                break;
            }
        }
    }
    result.steps = step;
    result.residual = model.max_residual_force();

    const GridSpec& g = layout.grid;
    std::vector<double> w = model.displacement_grid();
    result.w = w;
    result.sx.assign(w.size(), 0.0);
    result.sy.assign(w.size(), 0.0);
    result.sxy.assign(w.size(), 0.0);

    ThicknessMap eff = effective_thickness(layout, thickness);
    std::vector<double> membrane = membrane_from_inplane(layout, load_case.inplane);

    auto at = [&](int i, int j) -> double {
        if (!g.in_range(i, j)) return 0.0;
        return w[static_cast<size_t>(g.index(i, j))];
    };
    const double dx2 = g.dx * g.dx;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            size_t k = static_cast<size_t>(g.index(i, j));
            if (!layout.mask[k]) continue;
            double h = eff.h[k];
            BendingStiffness d = bending_stiffness(material, h);
            double wxx = (at(i - 1, j) - 2.0 * at(i, j) + at(i + 1, j)) / dx2;
            double wyy = (at(i, j - 1) - 2.0 * at(i, j) + at(i, j + 1)) / dx2;
            double wxy = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) +
                          at(i - 1, j - 1)) /
                         (4.0 * dx2);
            // Grid x = cross grain, grid y = grain.
            double mx = -(d.cross_grain * wxx + d.coupling * wyy);
            double my = -(d.along_grain * wyy + d.coupling * wxx);
            double mxy = 2.0 * d.twisting * wxy;
            double h2 = h * h;
            result.sx[k] = 6.0 * mx / h2;
            result.sy[k] = 6.0 * my / h2 + membrane[k] / h;
            result.sxy[k] = 6.0 * mxy / h2;
        }
    }
    return result;
}

double integrate_stress(const StaticResult& result, const Mask& region) {
    require(region.size() == result.mask.size(), errc::bad_argument,
            "region mask does not match the grid");
    double area_total = 0.0;
    for (size_t k = 0; k < result.mask.size(); ++k)
        if (result.mask[k]) area_total += 1.0;
    require(area_total > 0.0, errc::empty_region, "result has no in-mask nodes");

    double sum = 0.0;
    double count = 0.0;
    for (size_t k = 0; k < region.size(); ++k) {
        if (!region[k] || !result.mask[k]) continue;
        count += 1.0;
        double s = std::sqrt(result.sx[k] * result.sx[k] + result.sy[k] * result.sy[k] +
                             result.sxy[k] * result.sxy[k]);
        sum += s;
    }
    require(count > 0.0, errc::empty_region, "stress region is empty");
    return sum / area_total;
}

StressBreakdown integrate_stress_parts(const StaticResult& result,
                                       const SoundboardLayout& layout) {
    const GridSpec& g = layout.grid;
    // Node ownership: bridges first, then rail, cross bar, ribs; the rest is
    // plain soundboard.
    std::vector<int> owner(static_cast<size_t>(g.count()), 0);
    const char* part_names[] = {"soundboard", "bridge8", "bridge4", "rail4", "cross_bar", "ribs"};
    auto claim = [&](const std::string& id, int part) {
        const StiffenerPath* s = layout.find_stiffener(id);
        if (!s) return;
        for (int node : rasterize_strip(*s, g, layout.mask))
            if (owner[static_cast<size_t>(node)] == 0) owner[static_cast<size_t>(node)] = part;
    };
    claim("bridge8", 1);
    claim("bridge4", 2);
    claim("rail4", 3);
    claim("cutoff_bar", 4);
    claim("rib_1", 5);
    claim("rib_2", 5);
    claim("rib_3", 5);
    claim("rib_4", 5);

    StressBreakdown breakdown;
    for (int part = 0; part < 6; ++part) {
        Mask region(static_cast<size_t>(g.count()), 0);
        size_t n = 0;
        for (size_t k = 0; k < region.size(); ++k) {
            if (result.mask[k] && owner[k] == part) {
                region[k] = 1;
                ++n;
            }
        }
        StressPart p;
        p.name = part_names[part];
        p.value = n > 0 ? integrate_stress(result, region) : 0.0;
        breakdown.parts.push_back(p);
        breakdown.total += p.value;
    }
    for (StressPart& p : breakdown.parts)
        p.pct = breakdown.total > 0.0 ? 100.0 * p.value / breakdown.total : 0.0;
    return breakdown;
}

} // namespace sblab
