// Throughput benchmark: serial reference stencil vs the OpenMP kernel on a
// mid-size plate. Both paths must produce bit-identical states; the speedup
// is what this target measures.

#include <chrono>
#include <cstdio>
#include <vector>

#include "sblab/plate_model.hpp"
#include "sblab/thickness.hpp"

using namespace sblab;
using clock_type = std::chrono::steady_clock;

namespace {

SoundboardLayout make_plate(double a, double b, double dx) {
    SoundboardLayout layout;
    layout.grid = {static_cast<int>(a / dx) + 1, static_cast<int>(b / dx) + 1, dx};
    layout.boundary.pts = {{0, 0}, {a, 0}, {a, b}, {0, b}};
    layout.mask = build_mask(layout.boundary, layout.grid);
    return layout;
}

ThicknessMap uniform_map(const SoundboardLayout& layout, double h) {
    ThicknessMap map;
    map.grid = layout.grid;
    map.mask = layout.mask;
    map.h.assign(static_cast<size_t>(layout.grid.count()), 0.0);
    for (size_t k = 0; k < map.h.size(); ++k)
        if (map.mask[k]) map.h[k] = h;
    return map;
}

double run(const SoundboardLayout& layout, const ThicknessMap& map, bool parallel, long steps,
           double dt) {
    MaterialSpec mat = spruce();
    PlateModel::Options opt;
    opt.parallel = parallel;
    opt.parallel_min_nodes = 0; // benchmark both paths regardless of size
    PlateModel model(layout, map, mat, mat, dt, opt);
    model.kick(model.plate_dof(layout.grid.index(layout.grid.nx / 3, layout.grid.ny / 3)), 1.0);
    auto t0 = clock_type::now();
    for (long s = 0; s < steps; ++s) model.step();
    auto t1 = clock_type::now();
    double secs = std::chrono::duration<double>(t1 - t0).count();
    double node_steps = static_cast<double>(model.dof_count()) * static_cast<double>(steps);
    std::printf("%-8s %8.2f Msteps/s  (%ld steps, %d nodes, %.2f s)\n",
                parallel ? "openmp" : "serial", node_steps / secs / 1e6, steps,
                model.dof_count(), secs);
    return node_steps / secs;
}

} // namespace

int main() {
    const double dx = 0.01;
    SoundboardLayout layout = make_plate(0.7, 1.7, dx);
    ThicknessMap map = uniform_map(layout, 0.004);
    const double dt = 1.0 / 480000.0;
    const long steps = 20000;

    std::printf("plate stencil throughput, %dx%d grid\n", layout.grid.nx, layout.grid.ny);
    double serial = run(layout, map, false, steps, dt);
    double parallel = run(layout, map, true, steps, dt);
    std::printf("speedup  %8.2fx\n", parallel / serial);
    return 0;
}
