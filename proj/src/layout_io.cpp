#include "sblab/layout_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace sblab {

namespace {

const char* kStiffenerIds[] = {"bridge8", "bridge4", "cutoff_bar", "rib_1",
                               "rib_2",   "rib_3",   "rib_4",      "rail4"};

bool known_stiffener_id(const std::string& id) {
    for (const char* s : kStiffenerIds)
        if (id == s) return true;
    return false;
}

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

struct Line {
    std::string text;
    int number;
};

std::vector<Line> read_lines(std::istream& in) {
    std::vector<Line> lines;
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::string s = strip(raw);
        if (!s.empty()) lines.push_back({s, number});
    }
    return lines;
}

[[noreturn]] void schema_fail(const std::string& name, int line, const std::string& msg) {
    fail(errc::schema_violation, name + ":" + std::to_string(line) + ": " + msg);
}

double parse_num(const std::string& name, int line, const std::string& tok) {
    try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        schema_fail(name, line, "expected a number, got '" + tok + "'");
    }
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

BridgeId parse_bridge(const std::string& name, int line, const std::string& tok) {
    if (tok == "eight_foot" || tok == "8") return BridgeId::eight_foot;
    if (tok == "four_foot" || tok == "4") return BridgeId::four_foot;
    schema_fail(name, line, "unknown bridge '" + tok + "'");
}

StringMaterial parse_material(const std::string& name, int line, const std::string& tok) {
    if (tok == "brass") return StringMaterial::brass;
    if (tok == "iron") return StringMaterial::iron;
    schema_fail(name, line, "unknown string material '" + tok + "'");
}

} // namespace

SoundboardLayout build_layout_from_string(const std::string& text, const std::string& name) {
    std::istringstream in(text);
    std::vector<Line> lines = read_lines(in);

    SoundboardLayout layout;
    std::vector<Vec2> station_coords;
    bool have_grid = false;

    std::string section;
    StiffenerPath* current_path = nullptr;
    bool in_path_table = false;

    for (const Line& line : lines) {
        if (line.text.front() == '[') {
            require(line.text.back() == ']', errc::schema_violation,
                    name + ":" + std::to_string(line.number) + ": unterminated section header");
            std::string header = strip(line.text.substr(1, line.text.size() - 2));
            std::vector<std::string> toks = split_ws(header);
            section = toks.empty() ? "" : toks[0];
            current_path = nullptr;
            in_path_table = false;
            if (section == "stiffener") {
                if (toks.size() != 2) schema_fail(name, line.number, "[stiffener] needs an id");
                if (!known_stiffener_id(toks[1]))
                    schema_fail(name, line.number, "unknown stiffener id '" + toks[1] + "'");
                layout.stiffeners.push_back({});
                current_path = &layout.stiffeners.back();
                current_path->id = toks[1];
            } else if (section != "grid" && section != "boundary" && section != "stations") {
                schema_fail(name, line.number, "unknown section [" + section + "]");
            }
            continue;
        }

        size_t eq = line.text.find('=');
        if (section == "grid") {
            if (eq == std::string::npos) schema_fail(name, line.number, "expected key = value");
            std::string key = strip(line.text.substr(0, eq));
            std::string val = strip(line.text.substr(eq + 1));
            if (key == "nx")
                layout.grid.nx = static_cast<int>(parse_num(name, line.number, val));
            else if (key == "ny")
                layout.grid.ny = static_cast<int>(parse_num(name, line.number, val));
            else if (key == "dx")
                layout.grid.dx = parse_num(name, line.number, val);
            else
                schema_fail(name, line.number, "unknown grid key '" + key + "'");
            have_grid = true;
        } else if (section == "boundary") {
            std::vector<std::string> toks = split_ws(line.text);
            if (toks.size() != 2) schema_fail(name, line.number, "boundary rows are 'x y'");
            layout.boundary.pts.push_back({parse_num(name, line.number, toks[0]),
                                           parse_num(name, line.number, toks[1])});
        } else if (section == "stiffener") {
            if (!in_path_table && line.text == "path") {
                in_path_table = true;
            } else if (!in_path_table && eq != std::string::npos) {
                std::string key = strip(line.text.substr(0, eq));
                std::string val = strip(line.text.substr(eq + 1));
                if (key == "treatment") {
                    if (val == "coupled_bar")
                        current_path->treatment = BarTreatment::coupled_bar;
                    else if (val == "thickness_add")
                        current_path->treatment = BarTreatment::thickness_add;
                    else
                        schema_fail(name, line.number, "unknown treatment '" + val + "'");
                } else if (key == "height") {
                    current_path->cross_section.height = parse_num(name, line.number, val);
                } else if (key == "width") {
                    current_path->cross_section.width = parse_num(name, line.number, val);
                } else {
                    schema_fail(name, line.number, "unknown stiffener key '" + key + "'");
                }
            } else {
                std::vector<std::string> toks = split_ws(line.text);
                if (toks.size() != 2) schema_fail(name, line.number, "path rows are 'x y'");
                current_path->polyline.push_back({parse_num(name, line.number, toks[0]),
                                                  parse_num(name, line.number, toks[1])});
                in_path_table = true;
            }
        } else if (section == "stations") {
            std::vector<std::string> toks = split_ws(line.text);
            if (toks.size() != 9)
                schema_fail(name, line.number,
                            "station rows are 'key bridge x y scale_length diameter material "
                            "pitch break_angle_deg'");
            StringStation st;
            st.key = static_cast<int>(parse_num(name, line.number, toks[0]));
            st.bridge = parse_bridge(name, line.number, toks[1]);
            double x = parse_num(name, line.number, toks[2]);
            double y = parse_num(name, line.number, toks[3]);
            st.scale_length = parse_num(name, line.number, toks[4]);
            st.diameter = parse_num(name, line.number, toks[5]);
            st.material = parse_material(name, line.number, toks[6]);
            st.pitch_hz = parse_num(name, line.number, toks[7]);
            st.break_angle = parse_num(name, line.number, toks[8]) * M_PI / 180.0;
            if (st.key < 1 || st.key > 52)
                schema_fail(name, line.number, "station key out of range 1..52");
            if (st.diameter < 0.0002 || st.diameter > 0.0005)
                schema_fail(name, line.number, "string diameter outside [0.2, 0.5] mm");
            if (st.scale_length <= 0.0 || st.pitch_hz <= 0.0)
                schema_fail(name, line.number, "scale length and pitch must be positive");
            layout.stations.push_back(st);
            station_coords.push_back({x, y});
        } else {
            schema_fail(name, line.number, "content outside any section");
        }
    }

    require(have_grid, errc::schema_violation, name + ": missing [grid] section");
    layout.grid.validate();
    require(layout.boundary.pts.size() >= 3, errc::schema_violation,
            name + ": boundary polygon needs at least 3 vertices");

    layout.mask = build_mask(layout.boundary, layout.grid);

    // Validate stiffeners and rasterize to check they stay inside the mask.
    for (StiffenerPath& s : layout.stiffeners) {
        require(s.polyline.size() >= 2, errc::schema_violation,
                name + ": stiffener " + s.id + " needs at least 2 path points");
        require(s.cross_section.height > 0.0 && s.cross_section.width > 0.0,
                errc::schema_violation, name + ": stiffener " + s.id + " needs a cross-section");
        if (s.id == "rail4") {
            require(s.treatment == BarTreatment::thickness_add &&
                        std::fabs(s.cross_section.height - 0.01) < 1e-12,
                    errc::bad_stiffener_treatment,
                    name + ": rail4 must use thickness_add with height 0.01");
        } else {
            require(s.treatment == BarTreatment::coupled_bar, errc::bad_stiffener_treatment,
                    name + ": " + s.id + " must use coupled_bar treatment");
        }
        rasterize_path(s, layout.grid, &layout.mask);
    }

    // Snap stations onto their bridge chains (or the grid when the layout has
    // no bridges, as in small test layouts).
    std::vector<int> chain8, chain4;
    if (const StiffenerPath* b8 = layout.find_stiffener("bridge8"))
        chain8 = rasterize_path(*b8, layout.grid, &layout.mask);
    if (const StiffenerPath* b4 = layout.find_stiffener("bridge4"))
        chain4 = rasterize_path(*b4, layout.grid, &layout.mask);

    const double snap_tol = 0.75 * layout.grid.dx;
    for (size_t k = 0; k < layout.stations.size(); ++k) {
        StringStation& st = layout.stations[k];
        double x = station_coords[k].x;
        double y = station_coords[k].y;
        const std::vector<int>& chain = st.bridge == BridgeId::eight_foot ? chain8 : chain4;
        if (chain.empty()) {
            int i = layout.grid.nearest_i(x);
            int j = layout.grid.nearest_j(y);
            int node = layout.grid.index(i, j);
            require(layout.mask[static_cast<size_t>(node)] != 0, errc::schema_violation,
                    name + ": station " + std::to_string(st.key) + " lies outside the mask");
            st.node = node;
            continue;
        }
        double best = std::numeric_limits<double>::max();
        int best_node = -1;
        for (int node : chain) {
            double nx = layout.grid.node_x(node % layout.grid.nx);
            double ny = layout.grid.node_y(node / layout.grid.nx);
            double d2 = (nx - x) * (nx - x) + (ny - y) * (ny - y);
            if (d2 < best) {
                best = d2;
                best_node = node;
            }
        }
        require(std::sqrt(best) <= snap_tol, errc::station_off_bridge,
                name + ": station " + to_string(st.bridge) + " key " + std::to_string(st.key) +
                    " is " + std::to_string(std::sqrt(best)) + " m off its bridge");
        st.node = best_node;
    }

    return layout;
}

SoundboardLayout build_layout(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), errc::io_error, "cannot open layout file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return build_layout_from_string(ss.str(), path);
}

std::vector<ThicknessSample> load_thickness_samples(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), errc::io_error, "cannot open thickness csv: " + path);
    std::string line;
    require(static_cast<bool>(std::getline(f, line)), errc::io_error, "empty csv: " + path);
    require(strip(line) == "x_m,y_m,h_mm", errc::schema_violation,
            path + ": expected header x_m,y_m,h_mm");
    std::vector<ThicknessSample> samples;
    int number = 1;
    while (std::getline(f, line)) {
        ++number;
        std::string s = strip(line);
        if (s.empty()) continue;
        std::replace(s.begin(), s.end(), ',', ' ');
        std::vector<std::string> toks = split_ws(s);
        if (toks.size() != 3) schema_fail(path, number, "expected 3 columns");
        ThicknessSample sample;
        sample.x = parse_num(path, number, toks[0]);
        sample.y = parse_num(path, number, toks[1]);
        sample.h = parse_num(path, number, toks[2]) * 1e-3;
        samples.push_back(sample);
    }
    return samples;
}

void save_thickness_samples(const std::string& path,
                            const std::vector<ThicknessSample>& samples) {
    std::ofstream f(path);
    require(f.good(), errc::io_error, "cannot open csv for writing: " + path);
    f << "x_m,y_m,h_mm\n";
    char buf[96];
    for (const ThicknessSample& s : samples) {
        std::snprintf(buf, sizeof(buf), "%.4f,%.4f,%.3f\n", s.x, s.y, s.h * 1e3);
        f << buf;
    }
}

} // namespace sblab
