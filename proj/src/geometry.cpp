#include "sblab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sblab {

int GridSpec::nearest_i(double x) const {
    int i = static_cast<int>(std::llround(x / dx));
    return std::clamp(i, 0, nx - 1);
}

int GridSpec::nearest_j(double y) const {
    int j = static_cast<int>(std::llround(y / dx));
    return std::clamp(j, 0, ny - 1);
}

void GridSpec::validate() const {
    require(nx >= 3 && ny >= 3, errc::bad_argument, "grid must be at least 3x3 nodes");
    require(dx > 0.0, errc::bad_argument, "grid spacing must be positive");
}

double Polygon::area() const {
    double a = 0.0;
    const size_t n = pts.size();
    for (size_t k = 0; k < n; ++k) {
        const Vec2& p = pts[k];
        const Vec2& q = pts[(k + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    return std::fabs(a) * 0.5;
}

bool Polygon::contains(double x, double y) const {
    // Ray cast toward +x.
    bool inside = false;
    const size_t n = pts.size();
    for (size_t k = 0, m = n - 1; k < n; m = k++) {
        const Vec2& a = pts[k];
        const Vec2& b = pts[m];
        if ((a.y > y) != (b.y > y)) {
            double xc = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (x < xc) inside = !inside;
        }
    }
    return inside;
}

namespace {

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto cross = [](const Vec2& o, const Vec2& p, const Vec2& q) {
        return (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
    };
    double d1 = cross(c, d, a);
    double d2 = cross(c, d, b);
    double d3 = cross(a, b, c);
    double d4 = cross(a, b, d);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

double point_segment_dist2(double x, double y, const Vec2& a, const Vec2& b) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double wx = x - a.x, wy = y - a.y;
    double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
    double dx = wx - t * vx, dy = wy - t * vy;
    return dx * dx + dy * dy;
}

} // namespace

bool Polygon::is_simple() const {
    const size_t n = pts.size();
    if (n < 3) return false;
    for (size_t k = 0; k < n; ++k) {
        for (size_t m = k + 1; m < n; ++m) {
            // Skip shared-endpoint pairs.
            if (m == k || (m + 1) % n == k || (k + 1) % n == m) continue;
            if (segments_intersect(pts[k], pts[(k + 1) % n], pts[m], pts[(m + 1) % n]))
                return false;
        }
    }
    return true;
}

void Polygon::bounding_box(Vec2& lo, Vec2& hi) const {
    lo = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    hi = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    for (const Vec2& p : pts) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
}

double Polygon::outline_dist2(double x, double y) const {
    double best = std::numeric_limits<double>::max();
    const size_t n = pts.size();
    for (size_t k = 0; k < n; ++k)
        best = std::min(best, point_segment_dist2(x, y, pts[k], pts[(k + 1) % n]));
    return best;
}

Mask build_mask(const Polygon& boundary, const GridSpec& grid) {
    require(boundary.pts.size() >= 3 && boundary.area() > 0.0, errc::degenerate_boundary,
            "boundary polygon is degenerate");
    require(boundary.is_simple(), errc::degenerate_boundary,
            "boundary polygon self-intersects");
    // Nodes sitting exactly on the outline are support, not interior dofs;
    // the wall of an edge-aligned rectangle then lands on the edge itself.
    const double eps2 = 1e-18;
    Mask mask(static_cast<size_t>(grid.count()), 0);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            double x = grid.node_x(i), y = grid.node_y(j);
            if (boundary.contains(x, y) && boundary.outline_dist2(x, y) > eps2)
                mask[static_cast<size_t>(grid.index(i, j))] = 1;
        }
    }
    return mask;
}

double mask_area(const Mask& mask, const GridSpec& grid) {
    size_t n = 0;
    for (std::uint8_t m : mask) n += m;
    return static_cast<double>(n) * grid.dx * grid.dx;
}

double ThicknessMap::min_in_mask() const {
    double v = std::numeric_limits<double>::max();
    for (size_t k = 0; k < h.size(); ++k)
        if (mask[k]) v = std::min(v, h[k]);
    return v;
}

double ThicknessMap::max_in_mask() const {
    double v = 0.0;
    for (size_t k = 0; k < h.size(); ++k)
        if (mask[k]) v = std::max(v, h[k]);
    return v;
}

const StiffenerPath* SoundboardLayout::find_stiffener(const std::string& id) const {
    for (const StiffenerPath& s : stiffeners)
        if (s.id == id) return &s;
    return nullptr;
}

const StringStation* SoundboardLayout::find_station(BridgeId bridge, int key) const {
    for (const StringStation& s : stations)
        if (s.bridge == bridge && s.key == key) return &s;
    return nullptr;
}

int SoundboardLayout::station_index(BridgeId bridge, int key) const {
    for (size_t k = 0; k < stations.size(); ++k)
        if (stations[k].bridge == bridge && stations[k].key == key) return static_cast<int>(k);
    return -1;
}

std::vector<int> rasterize_path(const StiffenerPath& path, const GridSpec& grid,
                                const Mask* mask) {
    require(path.polyline.size() >= 2, errc::bad_argument,
            "stiffener path needs at least 2 points: " + path.id);

    // Arclength positions: every vertex plus a symmetric subdivision of the
    // total length, so a reversed polyline rasterizes to the reversed chain.
    std::vector<double> seg_start(path.polyline.size(), 0.0);
    double total = 0.0;
    for (size_t k = 1; k < path.polyline.size(); ++k) {
        double dx = path.polyline[k].x - path.polyline[k - 1].x;
        double dy = path.polyline[k].y - path.polyline[k - 1].y;
        total += std::hypot(dx, dy);
        seg_start[k] = total;
    }
    require(total > 0.0, errc::bad_argument, "stiffener path has zero length: " + path.id);

    int subdiv = std::max(1, static_cast<int>(std::ceil(total / (0.5 * grid.dx))));
    std::vector<double> stops(seg_start.begin(), seg_start.end());
    for (int k = 1; k < subdiv; ++k) stops.push_back(total * k / subdiv);
    std::sort(stops.begin(), stops.end());

    auto point_at = [&](double s) -> Vec2 {
        size_t seg = 1;
        while (seg + 1 < seg_start.size() && seg_start[seg] < s) ++seg;
        double s0 = seg_start[seg - 1], s1 = seg_start[seg];
        double t = s1 > s0 ? (s - s0) / (s1 - s0) : 0.0;
        const Vec2& a = path.polyline[seg - 1];
        const Vec2& b = path.polyline[seg];
        return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    };

    std::vector<int> chain;
    int last_i = -1000, last_j = -1000;
    for (double s : stops) {
        Vec2 p = point_at(s);
        int i = grid.nearest_i(p.x);
        int j = grid.nearest_j(p.y);
        if (i == last_i && j == last_j) continue;
        if (mask) {
            require((*mask)[static_cast<size_t>(grid.index(i, j))] != 0, errc::path_exits_mask,
                    "stiffener path leaves the soundboard mask: " + path.id);
        }
        chain.push_back(grid.index(i, j));
        last_i = i;
        last_j = j;
    }
    return chain;
}

std::vector<int> rasterize_strip(const StiffenerPath& path, const GridSpec& grid,
                                 const Mask& mask) {
    std::vector<int> chain = rasterize_path(path, grid, &mask);
    double half_w = 0.5 * path.cross_section.width;
    int r = static_cast<int>(std::floor(half_w / grid.dx + 0.5));
    if (r <= 0) return chain;

    std::vector<std::uint8_t> hit(static_cast<size_t>(grid.count()), 0);
    std::vector<int> nodes;
    for (int idx : chain) {
        int ci = idx % grid.nx;
        int cj = idx / grid.nx;
        for (int dj = -r; dj <= r; ++dj) {
            for (int di = -r; di <= r; ++di) {
                int i = ci + di, j = cj + dj;
                if (!grid.in_range(i, j)) continue;
                int k = grid.index(i, j);
                if (!mask[static_cast<size_t>(k)] || hit[static_cast<size_t>(k)]) continue;
                hit[static_cast<size_t>(k)] = 1;
                nodes.push_back(k);
            }
        }
    }
    std::sort(nodes.begin(), nodes.end());
    return nodes;
}

std::string to_string(BridgeId bridge) {
    return bridge == BridgeId::eight_foot ? "8f" : "4f";
}

std::string to_string(StringMaterial m) {
    return m == StringMaterial::brass ? "brass" : "iron";
}

} // namespace sblab
