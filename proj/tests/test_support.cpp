#include "test_support.hpp"

namespace sblab::testing {

SoundboardLayout rect_layout(double a, double b, double dx) {
    SoundboardLayout layout;
    layout.grid = {static_cast<int>(a / dx + 0.5) + 1, static_cast<int>(b / dx + 0.5) + 1, dx};
    layout.boundary.pts = {{0.0, 0.0}, {a, 0.0}, {a, b}, {0.0, b}};
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
    map.h_min = 0.0005;
    map.h_max = 0.05;
    return map;
}

std::string data_path(const std::string& file) {
    return std::string(SBLAB_DATA_DIR) + "/" + file;
}

} // namespace sblab::testing
