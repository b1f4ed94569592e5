#include "sblab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "sblab/layout_io.hpp"
#include "sblab/thickness.hpp"
#include "sblab/wav_io.hpp"

namespace fs = std::filesystem;

namespace sblab {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

struct ConfigMap {
    std::map<std::string, std::string> kv;
    std::string path;

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    }
    double num(const std::string& key, double fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            fail(errc::schema_violation, path + ": bad number for key '" + key + "'");
        }
    }
    std::vector<double> nums(const std::string& key) const {
        std::vector<double> out;
        auto it = kv.find(key);
        if (it == kv.end()) return out;
        std::string s = it->second;
        std::replace(s.begin(), s.end(), ',', ' ');
        std::istringstream iss(s);
        double v;
        while (iss >> v) out.push_back(v);
        return out;
    }
};

ConfigMap read_config(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), errc::io_error, "cannot open config file: " + path);
    ConfigMap cfg;
    cfg.path = path;
    std::string line;
    int number = 0;
    while (std::getline(f, line)) {
        ++number;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string s = trim(line);
        if (s.empty()) continue;
        size_t eq = s.find('=');
        require(eq != std::string::npos, errc::schema_violation,
                path + ":" + std::to_string(number) + ": expected key = value");
        cfg.kv[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
    }
    return cfg;
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

} // namespace

ExperimentSpec load_experiment_spec(const std::string& path) {
    ConfigMap cfg = read_config(path);
    ExperimentSpec spec;
    spec.name = cfg.str("name", spec.name);
    spec.layout_path = cfg.str("layout", "");
    spec.thickness_path = cfg.str("thickness_samples", "");
    require(!spec.layout_path.empty() && !spec.thickness_path.empty(), errc::schema_violation,
            path + ": config needs 'layout' and 'thickness_samples' paths");

    // Paths are relative to the config file's directory.
    fs::path base = fs::path(path).parent_path();
    if (!fs::path(spec.layout_path).is_absolute())
        spec.layout_path = (base / spec.layout_path).string();
    if (!fs::path(spec.thickness_path).is_absolute())
        spec.thickness_path = (base / spec.thickness_path).string();

    std::vector<double> targets = cfg.nums("targets_t60_s");
    if (!targets.empty()) spec.damping_targets = targets;
    spec.stations_filter = cfg.str("stations", "");
    spec.out_dir = cfg.str("out", spec.out_dir);
    spec.seed = static_cast<unsigned>(cfg.num("seed", spec.seed));
    spec.desk_scale = cfg.num("desk_scale", 0.0) != 0.0;
    spec.jobs = static_cast<int>(cfg.num("jobs", spec.jobs));

    if (cfg.has("rate_hz")) spec.dt = 1.0 / cfg.num("rate_hz", 480000.0);
    spec.dt = cfg.num("dt_s", spec.dt);
    spec.output_rate = cfg.num("output_rate_hz", spec.output_rate);
    if (cfg.has("desk_rate_hz")) spec.desk_dt = 1.0 / cfg.num("desk_rate_hz", 120000.0);
    spec.desk_output_rate = cfg.num("desk_output_rate_hz", spec.desk_output_rate);
    spec.sim_seconds = cfg.num("sim_seconds", spec.sim_seconds);
    spec.excitation_width = cfg.num("excitation_width_s", spec.excitation_width);
    spec.centroid_fmax = cfg.num("centroid_fmax_hz", spec.centroid_fmax);
    spec.calibration_tolerance = cfg.num("calibration_tolerance", spec.calibration_tolerance);
    spec.reference_key = static_cast<int>(cfg.num("reference_key", spec.reference_key));

    spec.soundboard_material.e_long = cfg.num("E_long_pa", spec.soundboard_material.e_long);
    spec.soundboard_material.anisotropy_ratio =
        cfg.num("anisotropy_ratio", spec.soundboard_material.anisotropy_ratio);
    spec.soundboard_material.density = cfg.num("density", spec.soundboard_material.density);
    spec.soundboard_material.poisson_major =
        cfg.num("poisson", spec.soundboard_material.poisson_major);
    spec.soundboard_material.decrement =
        cfg.num("decrement", spec.soundboard_material.decrement);
    spec.bar_material = spec.soundboard_material;

    spec.thickness_clamp.h_min = cfg.num("clamp_h_min_m", spec.thickness_clamp.h_min);
    spec.thickness_clamp.h_max = cfg.num("clamp_h_max_m", spec.thickness_clamp.h_max);

    std::string bc = cfg.str("boundary_condition", "clamped");
    require(bc == "clamped" || bc == "simply_supported", errc::schema_violation,
            path + ": boundary_condition must be clamped or simply_supported");
    spec.bc = bc == "clamped" ? PlateBc::clamped : PlateBc::simply_supported;
    std::string probe = cfg.str("probe_field", "displacement");
    require(probe == "displacement" || probe == "velocity", errc::schema_violation,
            path + ": probe_field must be displacement or velocity");
    spec.probe_field = probe == "displacement" ? ProbeField::displacement : ProbeField::velocity;

    spec.helmholtz.speed_of_sound = cfg.num("helmholtz_speed_mps", spec.helmholtz.speed_of_sound);
    spec.helmholtz.hole_radius = cfg.num("helmholtz_hole_radius_m", spec.helmholtz.hole_radius);
    spec.helmholtz.cavity_volume =
        cfg.num("helmholtz_cavity_volume_m3", spec.helmholtz.cavity_volume);
    spec.helmholtz.neck_length = cfg.num("helmholtz_neck_length_m", spec.helmholtz.neck_length);
    spec.helmholtz.end_correction_factor =
        cfg.num("helmholtz_end_correction", spec.helmholtz.end_correction_factor);
    return spec;
}

SoundboardLayout rescale_layout(const SoundboardLayout& layout, int factor) {
    require(factor >= 1, errc::bad_argument, "rescale factor must be >= 1");
    if (factor == 1) return layout;
    SoundboardLayout coarse;
    coarse.grid.nx = (layout.grid.nx + factor - 1) / factor;
    coarse.grid.ny = (layout.grid.ny + factor - 1) / factor;
    coarse.grid.dx = layout.grid.dx * factor;
    coarse.boundary = layout.boundary;
    coarse.stiffeners = layout.stiffeners;
    coarse.mask = build_mask(coarse.boundary, coarse.grid);

    std::vector<int> chain8, chain4;
    if (const StiffenerPath* b8 = coarse.find_stiffener("bridge8"))
        chain8 = rasterize_path(*b8, coarse.grid, &coarse.mask);
    if (const StiffenerPath* b4 = coarse.find_stiffener("bridge4"))
        chain4 = rasterize_path(*b4, coarse.grid, &coarse.mask);

    for (StringStation st : layout.stations) {
        double x = layout.grid.node_x(st.node % layout.grid.nx);
        double y = layout.grid.node_y(st.node / layout.grid.nx);
        const std::vector<int>& chain = st.bridge == BridgeId::eight_foot ? chain8 : chain4;
        if (chain.empty()) {
            st.node = coarse.grid.index(coarse.grid.nearest_i(x), coarse.grid.nearest_j(y));
        } else {
            double best = std::numeric_limits<double>::max();
            for (int node : chain) {
                double nx = coarse.grid.node_x(node % coarse.grid.nx);
                double ny = coarse.grid.node_y(node / coarse.grid.nx);
                double d2 = (nx - x) * (nx - x) + (ny - y) * (ny - y);
                if (d2 < best) {
                    best = d2;
                    st.node = node;
                }
            }
        }
        coarse.stations.push_back(st);
    }
    return coarse;
}

PreparedInstrument prepare_instrument(const ExperimentSpec& spec) {
    PreparedInstrument inst;
    inst.layout = build_layout(spec.layout_path);
    if (spec.desk_scale) inst.layout = rescale_layout(inst.layout, 2);
    std::vector<ThicknessSample> samples = load_thickness_samples(spec.thickness_path);
    inst.thickness = interpolate_thickness(samples, inst.layout.grid, inst.layout.boundary,
                                           spec.thickness_clamp);
    inst.dt = spec.desk_scale ? spec.desk_dt : spec.dt;
    inst.output_rate = spec.desk_scale ? spec.desk_output_rate : spec.output_rate;
    return inst;
}

std::vector<int> filter_stations(const SoundboardLayout& layout, const std::string& filter) {
    std::vector<int> out;
    if (trim(filter).empty()) {
        for (size_t k = 0; k < layout.stations.size(); ++k) out.push_back(static_cast<int>(k));
        return out;
    }
    auto match_token = [&](const std::string& token, const StringStation& st) {
        size_t colon = token.find(':');
        std::string bridge = trim(colon == std::string::npos ? token : token.substr(0, colon));
        if (bridge == "8" && st.bridge != BridgeId::eight_foot) return false;
        if (bridge == "4" && st.bridge != BridgeId::four_foot) return false;
        require(bridge == "8" || bridge == "4", errc::bad_argument,
                "station filter bridge must be 8 or 4: " + token);
        if (colon == std::string::npos) return true;
        std::string range = trim(token.substr(colon + 1));
        size_t dash = range.find('-');
        int lo = std::stoi(range.substr(0, dash));
        int hi = dash == std::string::npos ? lo : std::stoi(range.substr(dash + 1));
        return st.key >= lo && st.key <= hi;
    };
    std::istringstream iss(filter);
    std::string token;
    std::vector<std::string> tokens;
    while (std::getline(iss, token, ',')) tokens.push_back(token);
    for (size_t k = 0; k < layout.stations.size(); ++k) {
        for (const std::string& t : tokens) {
            if (match_token(t, layout.stations[k])) {
                out.push_back(static_cast<int>(k));
                break;
            }
        }
    }
    return out;
}

std::string wav_filename(BridgeId bridge, int key, double gamma) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%02d_%.6f.wav", to_string(bridge).c_str(), key, gamma);
    return buf;
}

namespace {

int reference_station(const SoundboardLayout& layout, int key) {
    int idx = layout.station_index(BridgeId::eight_foot, key);
    if (idx < 0 && !layout.stations.empty()) idx = 0;
    require(idx >= 0, errc::bad_argument, "layout has no stations to calibrate against");
    return idx;
}

} // namespace

Report run_aging_experiment(const ExperimentSpec& spec, AgingArtifacts* artifacts) {
    std::ostringstream report;
    PreparedInstrument inst = prepare_instrument(spec);
    fs::create_directories(spec.out_dir);

    require(spec.damping_targets.size() >= 2, errc::bad_argument,
            "a difference curve needs at least 2 damping targets");

    TimeSpec time;
    time.dt = inst.dt;
    StabilityReport stab = check_stability(spec.soundboard_material, inst.thickness,
                                           inst.layout.grid, time);
    report << "instrument: " << spec.name << (spec.desk_scale ? " (desk scale)" : "") << "\n";
    report << "grid: " << inst.layout.grid.nx << " x " << inst.layout.grid.ny << " at "
           << fmt("%.4f", inst.layout.grid.dx) << " m, rate " << fmt("%.0f", 1.0 / inst.dt)
           << " Hz\n";
    report << "stability number " << fmt("%.3f", stab.stability_number) << ", grid bandwidth "
           << fmt("%.0f", stab.bandwidth_hz) << " Hz\n";
    report << "helmholtz estimate " << fmt("%.2f", helmholtz_frequency(spec.helmholtz))
           << " Hz (analytic; the cavity is not simulated)\n\n";

    std::vector<int> stations = filter_stations(inst.layout, spec.stations_filter);
    require(!stations.empty(), errc::bad_argument, "station filter matched nothing");

    SimConfig base;
    base.layout = &inst.layout;
    base.thickness = &inst.thickness;
    base.soundboard_material = spec.soundboard_material;
    base.bar_material = spec.bar_material;
    base.time.dt = inst.dt;
    base.output_rate = inst.output_rate;
    base.bc = spec.bc;
    base.probe_field = spec.probe_field;
    base.excitation.kind = ExcitationKind::raised_cosine;
    base.excitation.amplitude = 1.0;
    base.excitation.width = spec.excitation_width;
    base.excitation.station = reference_station(inst.layout, spec.reference_key);

    std::vector<double> targets = spec.damping_targets;
    std::sort(targets.begin(), targets.end());

    double fmax = std::min(spec.centroid_fmax, 0.45 * inst.output_rate);
    std::vector<std::vector<MetricsRow>> metrics_per_target;
    std::vector<double> gammas;
    bool any_diverged = false;

    std::ofstream manifest(fs::path(spec.out_dir) / "manifest.csv");
    manifest << "station,gamma,status,path\n";

    for (double target : targets) {
        CalibrationResult cal =
            calibrate_decrement(base, target, spec.calibration_tolerance * target);
        gammas.push_back(cal.gamma);
        report << "target T60 " << fmt("%.3f", target) << " s -> gamma "
               << fmt("%.8f", cal.gamma) << " (achieved " << fmt("%.3f", cal.achieved_t60)
               << " s in " << cal.iterations << " iterations)\n";

        SimConfig run = base;
        run.soundboard_material.decrement = cal.gamma;
        run.bar_material.decrement = cal.gamma;
        double t_sim = std::max(spec.sim_seconds, 0.75 * target + 0.1);
        run.time.n_steps = static_cast<long>(std::ceil(t_sim / run.time.dt));

        std::vector<StationRun> runs = run_batch(run, stations, spec.jobs);
        std::vector<MetricsRow> metrics;
        for (const StationRun& sr : runs) {
            const StringStation& st = inst.layout.stations[static_cast<size_t>(sr.station)];
            MetricsRow row;
            row.bridge = st.bridge;
            row.key = st.key;
            row.gamma = cal.gamma;
            row.ok = sr.ok;
            std::string file = wav_filename(st.bridge, st.key, cal.gamma);
            if (sr.ok) {
                write_wav((fs::path(spec.out_dir) / file).string(), sr.response.samples,
                          sr.response.rate);
                row.t60_s = t60(sr.response);
                row.centroid_hz = spectral_centroid(sr.response, fmax);
                manifest << to_string(st.bridge) << st.key << "," << fmt("%.8f", cal.gamma)
                         << ",ok," << file << "\n";
            } else {
                any_diverged = true;
                manifest << to_string(st.bridge) << st.key << "," << fmt("%.8f", cal.gamma)
                         << ",diverged,\n";
                report << "  diverged: " << to_string(st.bridge) << " key " << st.key << " ("
                       << sr.detail << ")\n";
            }
            metrics.push_back(row);
        }
        metrics_per_target.push_back(std::move(metrics));
    }

    // Metrics CSV across all damping cases.
    {
        std::ofstream f(fs::path(spec.out_dir) / "metrics.csv");
        f << "bridge,key,gamma,t60_s,centroid_hz,status\n";
        for (const auto& metrics : metrics_per_target) {
            for (const MetricsRow& row : metrics) {
                f << (row.bridge == BridgeId::eight_foot ? "8" : "4") << "," << row.key << ","
                  << fmt("%.8f", row.gamma) << ",";
                if (row.ok)
                    f << fmt("%.6f", row.t60_s) << "," << fmt("%.3f", row.centroid_hz) << ",ok\n";
                else
                    f << ",,diverged\n";
            }
        }
    }

    // Difference curve: highest damping (shortest T60) minus lowest damping.
    std::vector<DeltaCentroidRow> delta =
        centroid_difference_curve(metrics_per_target.front(), metrics_per_target.back());
    {
        std::ofstream f(fs::path(spec.out_dir) / "delta_centroid.csv");
        f << "bridge,key,delta_centroid_hz\n";
        for (const DeltaCentroidRow& row : delta)
            f << (row.bridge == BridgeId::eight_foot ? "8" : "4") << "," << row.key << ","
              << fmt("%.3f", row.delta_hz) << "\n";
    }

    // Where does the 8' curve cross zero in the low-key region?
    {
        int crossing = -1;
        const DeltaCentroidRow* prev = nullptr;
        for (const DeltaCentroidRow& row : delta) {
            if (row.bridge != BridgeId::eight_foot) continue;
            if (prev && prev->delta_hz * row.delta_hz < 0.0 && crossing < 0) crossing = row.key;
            prev = &row;
        }
        if (crossing >= 0)
            report << "\n8' centroid difference changes sign near key " << crossing << "\n";
        else
            report << "\n8' centroid difference does not change sign over the compass\n";
    }

    report << "stations: " << stations.size() << " per damping case, "
           << metrics_per_target.size() << " cases\n";
    for (const auto& metrics : metrics_per_target) {
        size_t ok = 0;
        for (const MetricsRow& m : metrics) ok += m.ok ? 1 : 0;
        report << "  gamma " << fmt("%.8f", metrics.front().gamma) << ": " << ok << " ok, "
               << (metrics.size() - ok) << " diverged\n";
    }

    std::ofstream rf(fs::path(spec.out_dir) / "report.txt");
    rf << report.str();

    if (artifacts) {
        artifacts->metrics_per_target = std::move(metrics_per_target);
        artifacts->gammas = gammas;
        artifacts->delta_curve = std::move(delta);
    }
    Report out;
    out.exit_code = any_diverged ? 2 : 0;
    out.text = report.str();
    return out;
}

namespace {

void write_static_grid(const std::string& path, const StaticResult& r) {
    std::ofstream f(path);
    f << "x_m,y_m,w_m,sx,sy,sxy\n";
    for (int j = 0; j < r.grid.ny; ++j) {
        for (int i = 0; i < r.grid.nx; ++i) {
            size_t k = static_cast<size_t>(r.grid.index(i, j));
            if (!r.mask[k]) continue;
            f << fmt("%.4f", r.grid.node_x(i)) << "," << fmt("%.4f", r.grid.node_y(j)) << ","
              << fmt("%.9e", r.w[k]) << "," << fmt("%.6e", r.sx[k]) << ","
              << fmt("%.6e", r.sy[k]) << "," << fmt("%.6e", r.sxy[k]) << "\n";
        }
    }
}

} // namespace

Report run_statics_experiment(const ExperimentSpec& spec, StaticsArtifacts* artifacts) {
    std::ostringstream report;
    PreparedInstrument inst = prepare_instrument(spec);
    fs::create_directories(spec.out_dir);

    std::vector<StringForce> forces = compute_string_forces(inst.layout);
    {
        std::ofstream f(fs::path(spec.out_dir) / "string_forces.csv");
        f << "bridge,key,tension_n,bearing_n,rail_inplane_n,rail_normal_n\n";
        for (const StringForce& sf : forces) {
            const StringStation& st = inst.layout.stations[static_cast<size_t>(sf.station)];
            f << (st.bridge == BridgeId::eight_foot ? "8" : "4") << "," << st.key << ","
              << fmt("%.3f", sf.tension) << "," << fmt("%.3f", sf.bearing_normal) << ","
              << fmt("%.3f", sf.rail_inplane) << "," << fmt("%.3f", sf.rail_normal) << "\n";
        }
    }
    double total = 0.0, total_rail = 0.0, total_bearing8 = 0.0, total_bearing4 = 0.0;
    for (const StringForce& sf : forces) {
        const StringStation& st = inst.layout.stations[static_cast<size_t>(sf.station)];
        total += courses(st.bridge) * sf.tension;
        total_rail += sf.rail_inplane;
        if (st.bridge == BridgeId::eight_foot)
            total_bearing8 += sf.bearing_normal;
        else
            total_bearing4 += sf.bearing_normal;
    }
    report << "stringing: " << forces.size() << " stations, total string force "
           << fmt("%.0f", total) << " N (synthetic scaling schedule)\n";
    report << "  4' rail in-plane " << fmt("%.0f", total_rail) << " N, 8' bearing "
           << fmt("%.0f", total_bearing8) << " N, 4' bearing " << fmt("%.0f", total_bearing4)
           << " N\n\n";

    struct Case {
        const char* name;
        LoadToggles toggles;
    };
    const Case cases[] = {
        {"only_bridge8", {true, false, false, false}},
        {"only_bridge4", {false, true, false, false}},
        {"only_rail4", {false, false, true, true}},
        {"bridges_and_rail", {true, true, true, true}},
    };

    SolveOptions sopt;
    sopt.dt = inst.dt;
    sopt.parallel = spec.jobs != 1;

    StaticsArtifacts local;
    bool all_converged = true;
    std::ofstream summary(fs::path(spec.out_dir) / "statics_summary.csv");
    summary << "case,total,soundboard,bridge8,bridge4,rail4,cross_bar,ribs,"
               "soundboard_pct,bridge8_pct,bridge4_pct,rail4_pct,cross_bar_pct,ribs_pct\n";
    for (const Case& c : cases) {
        LoadCase lc = build_load_case(inst.layout, forces, c.toggles);
        StaticResult res = solve_static(inst.layout, inst.thickness,
                                        spec.soundboard_material, lc, sopt);
        all_converged = all_converged && res.converged;
        StressBreakdown bd = integrate_stress_parts(res, inst.layout);
        write_static_grid((fs::path(spec.out_dir) / (std::string(c.name) + "_grid.csv")).string(),
                          res);
        summary << c.name << "," << fmt("%.4f", bd.total);
        for (const StressPart& p : bd.parts) summary << "," << fmt("%.4f", p.value);
        for (const StressPart& p : bd.parts) summary << "," << fmt("%.2f", p.pct);
        summary << "\n";
        report << c.name << ": integrated stress " << fmt("%.4f", bd.total) << " N/m^2, "
               << (res.converged ? "converged" : "NOT converged") << " in " << res.steps
               << " steps, residual " << fmt("%.3e", res.residual) << " N\n";
        local.case_names.push_back(c.name);
        local.breakdowns.push_back(bd);
        local.results.push_back(std::move(res));
    }
    local.forces = forces;

    // Sign pattern of the full case: outward at the rail, inward at the 4'
    // bridge.
    {
        const StaticResult& full = local.results.back();
        double rail_mean = 0.0, bridge4_mean = 0.0;
        size_t rail_n = 0, b4_n = 0;
        if (const StiffenerPath* rail = inst.layout.find_stiffener("rail4")) {
            for (int node : rasterize_strip(*rail, inst.layout.grid, inst.layout.mask)) {
                rail_mean += full.w[static_cast<size_t>(node)];
                ++rail_n;
            }
        }
        if (const StiffenerPath* b4 = inst.layout.find_stiffener("bridge4")) {
            for (int node : rasterize_strip(*b4, inst.layout.grid, inst.layout.mask)) {
                bridge4_mean += full.w[static_cast<size_t>(node)];
                ++b4_n;
            }
        }
        if (rail_n > 0 && b4_n > 0) {
            rail_mean /= static_cast<double>(rail_n);
            bridge4_mean /= static_cast<double>(b4_n);
            report << "\nfull case: mean displacement at rail " << fmt("%.3e", rail_mean)
                   << " m (outward +), at 4' bridge " << fmt("%.3e", bridge4_mean) << " m\n";
        }
        double wmax = 0.0, wmin = 0.0;
        for (size_t k = 0; k < full.w.size(); ++k) {
            wmax = std::max(wmax, full.w[k]);
            wmin = std::min(wmin, full.w[k]);
        }
        report << "full case displacement range [" << fmt("%.3e", wmin) << ", "
               << fmt("%.3e", wmax) << "] m\n";
    }

    std::ofstream rf(fs::path(spec.out_dir) / "statics_report.txt");
    rf << report.str();

    if (artifacts) *artifacts = std::move(local);
    Report out;
    out.exit_code = all_converged ? 0 : 2;
    out.text = report.str();
    return out;
}

Report run_thickness_dump(const ExperimentSpec& spec) {
    PreparedInstrument inst = prepare_instrument(spec);
    fs::create_directories(spec.out_dir);
    std::ofstream f(fs::path(spec.out_dir) / "thickness_map.csv");
    f << "x_m,y_m,h_m,mask\n";
    const GridSpec& g = inst.layout.grid;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            size_t k = static_cast<size_t>(g.index(i, j));
            f << fmt("%.4f", g.node_x(i)) << "," << fmt("%.4f", g.node_y(j)) << ","
              << fmt("%.6f", inst.thickness.h[k]) << ","
              << static_cast<int>(inst.thickness.mask[k]) << "\n";
        }
    }
    Report out;
    out.text = "thickness map: " + std::to_string(g.nx) + " x " + std::to_string(g.ny) +
               ", in-mask range [" + fmt("%.4f", inst.thickness.min_in_mask()) + ", " +
               fmt("%.4f", inst.thickness.max_in_mask()) + "] m\n";
    return out;
}

Report run_single_simulation(const ExperimentSpec& spec) {
    PreparedInstrument inst = prepare_instrument(spec);
    fs::create_directories(spec.out_dir);
    std::vector<int> stations = filter_stations(inst.layout, spec.stations_filter);
    require(stations.size() == 1, errc::bad_argument,
            "simulate runs exactly one station; use --stations like 8:26");

    SimConfig config;
    config.layout = &inst.layout;
    config.thickness = &inst.thickness;
    config.soundboard_material = spec.soundboard_material;
    config.bar_material = spec.bar_material;
    config.time.dt = inst.dt;
    config.time.n_steps = static_cast<long>(std::ceil(spec.sim_seconds / inst.dt));
    config.output_rate = inst.output_rate;
    config.bc = spec.bc;
    config.probe_field = spec.probe_field;
    config.excitation.station = stations[0];
    config.excitation.width = spec.excitation_width;
    config.probes = {stations[0]};
    config.parallel_kernel = spec.jobs != 1;

    const StringStation& st = inst.layout.stations[static_cast<size_t>(stations[0])];
    Report out;
    try {
        std::vector<ImpulseResponse> irs = simulate(config);
        std::string file = wav_filename(st.bridge, st.key, config.soundboard_material.decrement);
        write_wav((fs::path(spec.out_dir) / file).string(), irs[0].samples, irs[0].rate);
        double fmax = std::min(spec.centroid_fmax, 0.45 * inst.output_rate);
        std::string t60_text = "n/a (no decay in record)";
        try {
            t60_text = fmt("%.4f", t60(irs[0])) + " s";
        } catch (const error& e) {
            if (e.code() != errc::insufficient_decay) throw;
        }
        out.text = "station " + to_string(st.bridge) + " key " + std::to_string(st.key) +
                   ": t60 " + t60_text + ", centroid " +
                   fmt("%.1f", spectral_centroid(irs[0], fmax)) + " Hz -> " + file + "\n";
    } catch (const error& e) {
        if (e.code() != errc::divergence) throw;
        out.exit_code = 2;
        out.text = std::string("diverged: ") + e.what() + "\n";
    }
    return out;
}

Report run_analyze(const ExperimentSpec& spec, const std::string& wav_dir) {
    fs::create_directories(spec.out_dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(wav_dir))
        if (entry.path().extension() == ".wav") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    require(!files.empty(), errc::bad_argument, "no wav files in " + wav_dir);

    std::ofstream f(fs::path(spec.out_dir) / "analyzed_metrics.csv");
    f << "file,t60_s,centroid_hz\n";
    std::ostringstream report;
    for (const fs::path& path : files) {
        WavData wav = read_wav(path.string());
        ImpulseResponse ir;
        ir.samples = std::move(wav.samples);
        ir.rate = wav.rate;
        double fmax = std::min(spec.centroid_fmax, 0.45 * ir.rate);
        std::string t60_text = "n/a";
        try {
            t60_text = fmt("%.6f", t60(ir));
        } catch (const error&) {
        }
        f << path.filename().string() << "," << t60_text << ","
          << fmt("%.3f", spectral_centroid(ir, fmax)) << "\n";
    }
    report << "analyzed " << files.size() << " wav files\n";
    Report out;
    out.text = report.str();
    return out;
}

} // namespace sblab
