#ifndef SBLAB_GEOMETRY_HPP
#define SBLAB_GEOMETRY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sblab/error.hpp"

namespace sblab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Regular node grid. x runs along the keyboard edge (nx nodes), y along
/// the strings (ny nodes), uniform spacing dx in both directions.
struct GridSpec {
    int nx = 0;
    int ny = 0;
    double dx = 0.0;

    int count() const { return nx * ny; }
    int index(int i, int j) const { return j * nx + i; }
    double node_x(int i) const { return i * dx; }
    double node_y(int j) const { return j * dx; }
    bool in_range(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    int nearest_i(double x) const;
    int nearest_j(double y) const;

    void validate() const;
};

/// Simple (non-self-intersecting) polygon in meters.
struct Polygon {
    std::vector<Vec2> pts;

    double area() const;                 // shoelace, absolute value
    bool contains(double x, double y) const;
    bool is_simple() const;
    void bounding_box(Vec2& lo, Vec2& hi) const;
    /// Squared distance from (x, y) to the polygon outline.
    double outline_dist2(double x, double y) const;
};

using Mask = std::vector<std::uint8_t>;

/// In-mask nodes are interior degrees of freedom; everything on or outside
/// the boundary polygon is rigid support.
Mask build_mask(const Polygon& boundary, const GridSpec& grid);

double mask_area(const Mask& mask, const GridSpec& grid);

struct ThicknessSample {
    double x = 0.0; // m
    double y = 0.0; // m
    double h = 0.0; // m
};

struct ThicknessMap {
    GridSpec grid;
    std::vector<double> h; // per node, meters; 0 outside mask
    Mask mask;
    double h_min = 0.002; // configured clamp bounds the field honors
    double h_max = 0.008;

    double min_in_mask() const;
    double max_in_mask() const;
};

enum class BarTreatment { coupled_bar, thickness_add };

struct CrossSection {
    double height = 0.0; // m, transverse to the soundboard
    double width = 0.0;  // m, in plane
    double area() const { return height * width; }
    double second_moment() const { return width * height * height * height / 12.0; }
};

struct StiffenerPath {
    std::string id;
    std::vector<Vec2> polyline;
    CrossSection cross_section;
    BarTreatment treatment = BarTreatment::coupled_bar;
};

enum class BridgeId { eight_foot, four_foot };

enum class StringMaterial { brass, iron };

struct StringStation {
    int key = 0; // 1..52
    BridgeId bridge = BridgeId::eight_foot;
    int node = -1; // grid node on the rasterized bridge chain
    double scale_length = 0.0; // m
    double diameter = 0.0;     // m
    StringMaterial material = StringMaterial::iron;
    double pitch_hz = 0.0;
    double break_angle = 0.0;  // rad
};

struct SoundboardLayout {
    GridSpec grid;
    Polygon boundary;
    std::vector<StiffenerPath> stiffeners;
    std::vector<StringStation> stations;
    Mask mask; // built from boundary at load time

    const StiffenerPath* find_stiffener(const std::string& id) const;
    const StringStation* find_station(BridgeId bridge, int key) const;
    int station_index(BridgeId bridge, int key) const;
};

/// Grid-node chain along a stiffener polyline: 8-connected, no duplicate
/// consecutive nodes, independent of traversal direction up to reversal.
std::vector<int> rasterize_path(const StiffenerPath& path, const GridSpec& grid,
                                const Mask* mask = nullptr);

/// Nodes covered by the path swept with its cross-section width.
std::vector<int> rasterize_strip(const StiffenerPath& path, const GridSpec& grid,
                                 const Mask& mask);

std::string to_string(BridgeId bridge);
std::string to_string(StringMaterial m);

} // namespace sblab

#endif
