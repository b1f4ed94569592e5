#include "sblab/fdtd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sblab/analysis.hpp"
#include "sblab/dsp.hpp"

namespace sblab {

namespace {

void validate(const SimConfig& config) {
    require(config.layout != nullptr && config.thickness != nullptr, errc::bad_argument,
            "simulation needs a layout and a thickness map");
    require(!config.probes.empty(), errc::bad_argument, "probe list must not be empty");
    config.time.validate();
    double ratio = config.time.sample_rate() / config.output_rate;
    require(std::fabs(ratio - std::llround(ratio)) < 1e-9 && ratio >= 1.0, errc::bad_argument,
            "output rate must divide the simulation rate");
    require(config.excitation.station >= 0 &&
                config.excitation.station < static_cast<int>(config.layout->stations.size()),
            errc::bad_argument, "excitation station does not exist");
    for (int p : config.probes)
        require(p >= 0 && p < static_cast<int>(config.layout->stations.size()),
                errc::bad_argument, "probe station does not exist");
    if (config.excitation.kind == ExcitationKind::raised_cosine && config.excitation.width > 0.0)
        require(config.excitation.width >= 2.0 * config.time.dt, errc::bad_argument,
                "raised cosine width must be at least 2 dt");
}

} // namespace

std::vector<ImpulseResponse> simulate(const SimConfig& config) {
    validate(config);
    check_stability(config.soundboard_material, *config.thickness, config.layout->grid,
                    config.time);

    PlateModel::Options opt;
    opt.bc = config.bc;
    opt.parallel = config.parallel_kernel;
    PlateModel model(*config.layout, *config.thickness, config.soundboard_material,
                     config.bar_material, config.time.dt, opt);

    const StringStation& exc_station =
        config.layout->stations[static_cast<size_t>(config.excitation.station)];
    DofRef exc = model.station_dof(exc_station);

    std::vector<DofRef> probe_dofs;
    for (int p : config.probes)
        probe_dofs.push_back(model.station_dof(config.layout->stations[static_cast<size_t>(p)]));

    const long n_steps = config.time.n_steps;
    require(n_steps > 0, errc::bad_argument, "n_steps must be positive");
    std::vector<std::vector<double>> traces(probe_dofs.size());
    for (auto& t : traces) t.reserve(static_cast<size_t>(n_steps));

    double width = config.excitation.width > 0.0 ? config.excitation.width
                                                 : 10.0 * config.time.dt;
    long force_steps = 0;
    if (config.excitation.kind == ExcitationKind::velocity_impulse) {
        model.kick(exc, config.excitation.amplitude);
    } else {
        force_steps = static_cast<long>(std::ceil(width / config.time.dt));
    }

    for (long step = 0; step < n_steps; ++step) {
        if (step < force_steps) {
            double t = static_cast<double>(step) * config.time.dt;
            double f = config.excitation.amplitude * 0.5 *
                       (1.0 - std::cos(2.0 * M_PI * t / width));
            model.step_forced(exc, f);
        } else {
            model.step();
        }
        for (size_t p = 0; p < probe_dofs.size(); ++p)
            traces[p].push_back(model.sample(probe_dofs[p], config.probe_field));
        if ((step & 255) == 255) model.check_finite();
    }
    model.check_finite();

    std::vector<ImpulseResponse> out(probe_dofs.size());
    for (size_t p = 0; p < probe_dofs.size(); ++p) {
        out[p].station = config.probes[p];
        out[p].rate = config.output_rate;
        out[p].samples = decimate(traces[p], config.time.sample_rate(), config.output_rate);
    }
    return out;
}

double closed_form_t60(double gamma, double dt) {
    if (gamma >= 1.0) return std::numeric_limits<double>::infinity();
    return 6.0 * std::log(10.0) * dt / (1.0 - gamma);
}

double closed_form_gamma(double t60, double dt) {
    return 1.0 - 6.0 * std::log(10.0) * dt / t60;
}

namespace {

double measure_t60(const SimConfig& base, double gamma, double expected_t60) {
    SimConfig config = base;
    config.soundboard_material.decrement = gamma;
    config.bar_material.decrement = gamma;
    config.probes = {config.excitation.station};
    // Long enough to reach -35 dB on the decay curve with headroom.
    double t_sim = std::max(0.12, 0.85 * std::max(expected_t60, 0.05));
    config.time.n_steps = static_cast<long>(std::ceil(t_sim / config.time.dt));
    std::vector<ImpulseResponse> irs = simulate(config);
    return t60(irs.front());
}

} // namespace

CalibrationResult calibrate_decrement(const SimConfig& config, double target_t60,
                                      double tolerance) {
    require(target_t60 > 0.0, errc::bad_argument, "target T60 must be positive");
    require(tolerance > 0.0, errc::bad_argument, "tolerance must be positive");

    double seed = closed_form_gamma(target_t60, config.time.dt);
    // Targets demanding 1 - gamma below 1e-8 sit at the undamped boundary;
    // no finite simulation can distinguish them.
    require(seed > 0.99 && seed < 1.0 - 1e-8, errc::non_bracketing,
            "target T60 is not reachable with gamma in (0.99, 1)");
    double lo = std::max(0.99, 1.0 - 3.0 * (1.0 - seed));
    double hi = std::min(1.0 - (1.0 - seed) / 3.0, 1.0 - 1e-9);
    require(lo < hi, errc::non_bracketing,
            "target T60 is not reachable with gamma in (0.99, 1)");

    auto eval = [&](double gamma) -> double {
        try {
            return measure_t60(config, gamma, closed_form_t60(gamma, config.time.dt));
        } catch (const error& e) {
            if (e.code() == errc::insufficient_decay)
                return std::numeric_limits<double>::infinity();
            throw;
        }
    };

    double f_lo = eval(lo);
    double f_hi = eval(hi);
    require(f_lo <= target_t60 && f_hi >= target_t60, errc::non_bracketing,
            "bisection interval does not bracket the target T60");

    CalibrationResult result;
    double gamma = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        gamma = 0.5 * (lo + hi);
        double t = eval(gamma);
        ++result.iterations;
        result.gamma = gamma;
        result.achieved_t60 = t;
        if (std::fabs(t - target_t60) <= tolerance) return result;
        if (t < target_t60)
            lo = gamma;
        else
            hi = gamma;
    }
    fail(errc::non_convergence, "decrement calibration did not converge");
}

std::vector<StationRun> run_batch(const SimConfig& base, const std::vector<int>& stations,
                                  int parallelism) {
    std::vector<StationRun> runs(stations.size());
    if (stations.empty()) return runs;
    int jobs = std::max(1, parallelism);

#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (jobs > 1)
    for (long k = 0; k < static_cast<long>(stations.size()); ++k) {
        SimConfig config = base;
        config.excitation.station = stations[static_cast<size_t>(k)];
        config.probes = {stations[static_cast<size_t>(k)]};
        config.parallel_kernel = base.parallel_kernel && jobs == 1;
        StationRun& run = runs[static_cast<size_t>(k)];
        run.station = stations[static_cast<size_t>(k)];
        try {
            run.response = simulate(config).front();
            run.ok = true;
        } catch (const error& e) {
            run.ok = false;
            run.detail = e.what();
        }
    }
    return runs;
}

} // namespace sblab
