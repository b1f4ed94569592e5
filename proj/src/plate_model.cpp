#include "sblab/plate_model.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace sblab {

namespace {

// Offset slots in wgt_ rows.
enum {
    C = 0,   // center
    XM1, XP1, XM2, XP2,
    YM1, YP1, YM2, YP2,
    PP, PM, MP, MM // (+1,+1), (+1,-1), (-1,+1), (-1,-1)
};

} // namespace

PlateModel::PlateModel(const SoundboardLayout& layout, const ThicknessMap& thickness,
                       const MaterialSpec& plate_material, const MaterialSpec& bar_material,
                       double dt, Options options)
    : plate_mat_(plate_material), bar_mat_(bar_material), grid_(layout.grid), opt_(options),
      dt_(dt), gamma_(plate_material.decrement) {
    require(dt_ > 0.0, errc::bad_argument, "time step must be positive");
    require(thickness.grid.nx == grid_.nx && thickness.grid.ny == grid_.ny &&
                thickness.grid.dx == grid_.dx,
            errc::bad_argument, "thickness map grid does not match the layout grid");
    plate_mat_.validate();
    bar_mat_.validate();

    ThicknessMap effective = effective_thickness(layout, thickness);

    assemble(layout, effective);
    build_bars(layout, effective);
    audit_stability();
}

void PlateModel::assemble(const SoundboardLayout& layout, const ThicknessMap& thickness) {
    const int W = grid_.nx + 4;
    const int H = grid_.ny + 4;
    padded_w_ = W;
    w_.assign(static_cast<size_t>(W) * H, 0.0);

    const int off1 = 1, offw = W;
    int offs[13] = {0,      -off1,      +off1,      -2 * off1,  +2 * off1,
                    -offw,  +offw,      -2 * offw,  +2 * offw,
                    offw + 1, -offw + 1, offw - 1,  -offw - 1};
    std::copy(offs, offs + 13, offsets_);

    compact_of_.assign(static_cast<size_t>(grid_.count()), -1);
    for (int j = 0; j < grid_.ny; ++j) {
        for (int i = 0; i < grid_.nx; ++i) {
            int node = grid_.index(i, j);
            if (!thickness.mask[static_cast<size_t>(node)]) continue;
            compact_of_[static_cast<size_t>(node)] = static_cast<int>(nodes_.size());
            nodes_.push_back((j + 2) * W + (i + 2));
            grid_node_.push_back(node);
        }
    }
    require(!nodes_.empty(), errc::bad_argument, "layout mask has no interior nodes");

    const size_t n = nodes_.size();
    v_.assign(n, 0.0);
    a_.assign(n, 0.0);
    inv_mass_.assign(n, 0.0);
    wgt_.assign(n * 13, 0.0);
    row_rate2_.assign(n, 0.0);

    const double dx2 = grid_.dx * grid_.dx;
    for (size_t k = 0; k < n; ++k) {
        double h = thickness.h[static_cast<size_t>(grid_node_[k])];
        inv_mass_[k] = 1.0 / (plate_mat_.density * h * dx2);
    }

    // The stiffness matrix is assembled from the bending energy: axis
    // curvatures at nodes, twist at cell centers, coefficients evaluated at
    // the curvature point. Every contribution is a squared form, so K is
    // symmetric positive semidefinite for any thickness field and the
    // explicit scheme inherits the real spectrum the stability audit
    // assumes. For a uniform board this reproduces the classical 13-point
    // stencil; displacement reads zero outside the mask, which clamps the
    // rim (wall-point curvatures included) or simply supports it (omitted).
    accumulate_energy_rows(thickness);
}

namespace {

int slot_of(int di, int dj) {
    if (dj == 0) {
        if (di == 0) return C;
        if (di == -1) return XM1;
        if (di == +1) return XP1;
        if (di == -2) return XM2;
        if (di == +2) return XP2;
    } else if (di == 0) {
        if (dj == -1) return YM1;
        if (dj == +1) return YP1;
        if (dj == -2) return YM2;
        if (dj == +2) return YP2;
    } else if (di == +1) {
        return dj == +1 ? PP : PM;
    } else if (di == -1) {
        return dj == +1 ? MP : MM;
    }
    return -1;
}

struct StencilPoint {
    int i = 0;
    int j = 0;
    double coef = 0.0;
};

} // namespace

void PlateModel::accumulate_energy_rows(const ThicknessMap& thickness) {
    const GridSpec& g = grid_;
    const double s = 1.0 / (g.dx * g.dx);
    auto in_mask = [&](int i, int j) {
        return g.in_range(i, j) && thickness.mask[static_cast<size_t>(g.index(i, j))] != 0;
    };
    auto h_at = [&](int i, int j) { return thickness.h[static_cast<size_t>(g.index(i, j))]; };

    // K[a][b] += c * coef_a * coef_b for every in-mask pair of a stencil.
    auto add_outer = [&](const StencilPoint* pts, int count, double c) {
        for (int a = 0; a < count; ++a) {
            if (!in_mask(pts[a].i, pts[a].j)) continue;
            int row = compact_of_[static_cast<size_t>(g.index(pts[a].i, pts[a].j))];
            for (int b = 0; b < count; ++b) {
                if (!in_mask(pts[b].i, pts[b].j)) continue;
                int slot = slot_of(pts[b].i - pts[a].i, pts[b].j - pts[a].j);
                wgt_[static_cast<size_t>(row) * 13 + slot] += c * pts[a].coef * pts[b].coef;
            }
        }
    };
    // Mixed term: K[a][b] += c (x_a y_b + y_a x_b).
    auto add_cross = [&](const StencilPoint* xs, const StencilPoint* ys, double c) {
        for (int a = 0; a < 3; ++a) {
            if (!in_mask(xs[a].i, xs[a].j)) continue;
            int row = compact_of_[static_cast<size_t>(g.index(xs[a].i, xs[a].j))];
            for (int b = 0; b < 3; ++b) {
                if (!in_mask(ys[b].i, ys[b].j)) continue;
                int slot = slot_of(ys[b].i - xs[a].i, ys[b].j - xs[a].j);
                wgt_[static_cast<size_t>(row) * 13 + slot] += c * xs[a].coef * ys[b].coef;
            }
        }
        for (int a = 0; a < 3; ++a) {
            if (!in_mask(ys[a].i, ys[a].j)) continue;
            int row = compact_of_[static_cast<size_t>(g.index(ys[a].i, ys[a].j))];
            for (int b = 0; b < 3; ++b) {
                if (!in_mask(xs[b].i, xs[b].j)) continue;
                int slot = slot_of(xs[b].i - ys[a].i, xs[b].j - ys[a].j);
                wgt_[static_cast<size_t>(row) * 13 + slot] += c * ys[a].coef * xs[b].coef;
            }
        }
    };

    const bool clamped = opt_.bc == PlateBc::clamped;

    // Axis curvature points: every in-mask node; for the clamped rim also
    // the support nodes whose arm reaches into the mask.
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            bool inside = in_mask(i, j);
            bool x_wall = !inside && (in_mask(i - 1, j) || in_mask(i + 1, j));
            bool y_wall = !inside && (in_mask(i, j - 1) || in_mask(i, j + 1));
            if (!inside && !(clamped && (x_wall || y_wall))) continue;

            double h;
            if (inside) {
                h = h_at(i, j);
            } else {
                h = 0.0;
                if (in_mask(i - 1, j)) h = std::max(h, h_at(i - 1, j));
                if (in_mask(i + 1, j)) h = std::max(h, h_at(i + 1, j));
                if (in_mask(i, j - 1)) h = std::max(h, h_at(i, j - 1));
                if (in_mask(i, j + 1)) h = std::max(h, h_at(i, j + 1));
            }
            BendingStiffness d = bending_stiffness(plate_mat_, h);

            StencilPoint cx[3] = {{i - 1, j, 1.0}, {i, j, -2.0}, {i + 1, j, 1.0}};
            StencilPoint cy[3] = {{i, j - 1, 1.0}, {i, j, -2.0}, {i, j + 1, 1.0}};
            // Grid x is cross grain, grid y grain. Wall-point curvature
            // carries weight 2: that reproduces the mirror-ghost clamped
            // rows, which hold the wall on the support line to second
            // order, while staying a positive energy term.
            if (inside)
                add_outer(cx, 3, s * d.cross_grain);
            else if (x_wall)
                add_outer(cx, 3, 2.0 * s * d.cross_grain);
            if (inside)
                add_outer(cy, 3, s * d.along_grain);
            else if (y_wall)
                add_outer(cy, 3, 2.0 * s * d.along_grain);
            if (inside) add_cross(cx, cy, s * d.coupling);
        }
    }

    // Twist at cell centers, including rim cells: the twist curvature is
    // nonzero along a supported edge under either boundary condition, and
    // reads outside the mask as zero displacement.
    for (int j = -1; j < g.ny; ++j) {
        for (int i = -1; i < g.nx; ++i) {
            int corners_in = 0;
            double h_sum = 0.0;
            StencilPoint cell[4] = {
                {i, j, 1.0}, {i + 1, j, -1.0}, {i, j + 1, -1.0}, {i + 1, j + 1, 1.0}};
            for (const StencilPoint& p : cell) {
                if (in_mask(p.i, p.j)) {
                    ++corners_in;
                    h_sum += h_at(p.i, p.j);
                }
            }
            if (corners_in == 0) continue;
            BendingStiffness d = bending_stiffness(plate_mat_, h_sum / corners_in);
            add_outer(cell, 4, s * 4.0 * d.twisting);
        }
    }

    // a = -(K w) / m.
    for (size_t k = 0; k < nodes_.size(); ++k)
        for (int t = 0; t < 13; ++t) wgt_[k * 13 + t] *= inv_mass_[k];
    rows_dirty_ = true;
}

void PlateModel::set_membrane_tension(const std::vector<double>& ny) {
    require(steps_ == 0, errc::bad_argument, "membrane tension must be set before stepping");
    require(ny.size() == static_cast<size_t>(grid_.count()), errc::bad_argument,
            "membrane field must cover the full grid");
    // Edge energy 1/2 N (w_up - w_down)^2 per vertical edge: symmetric, and
    // positive for tension. Compression (negative N) is admitted as a
    // linearized geometric softening; the loads here sit far below the
    // buckling threshold, which the audit's row bound cannot see but the
    // relaxation solver would expose as non-convergence.
    const GridSpec& g = grid_;
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            size_t lo = static_cast<size_t>(g.index(i, j));
            size_t hi = static_cast<size_t>(g.index(i, j + 1));
            double tension = 0.5 * (ny[lo] + ny[hi]);
            if (tension == 0.0) continue;
            int a = compact_of_[lo];
            int b = compact_of_[hi];
            if (a >= 0) {
                wgt_[static_cast<size_t>(a) * 13 + C] += tension * inv_mass_[static_cast<size_t>(a)];
                if (b >= 0)
                    wgt_[static_cast<size_t>(a) * 13 + YP1] -=
                        tension * inv_mass_[static_cast<size_t>(a)];
            }
            if (b >= 0) {
                wgt_[static_cast<size_t>(b) * 13 + C] += tension * inv_mass_[static_cast<size_t>(b)];
                if (a >= 0)
                    wgt_[static_cast<size_t>(b) * 13 + YM1] -=
                        tension * inv_mass_[static_cast<size_t>(b)];
            }
        }
    }
    membrane_set_ = true;
    rows_dirty_ = true;
    audit_stability();
}

void PlateModel::build_bars(const SoundboardLayout& layout, const ThicknessMap& thickness) {
    for (const StiffenerPath& s : layout.stiffeners) {
        if (s.treatment != BarTreatment::coupled_bar) continue;

        double total = 0.0;
        std::vector<double> seg_start(s.polyline.size(), 0.0);
        for (size_t k = 1; k < s.polyline.size(); ++k) {
            total += std::hypot(s.polyline[k].x - s.polyline[k - 1].x,
                                s.polyline[k].y - s.polyline[k - 1].y);
            seg_start[k] = total;
        }
        // Node spacing never drops below the grid spacing; a bar too short
        // for a bending stencil still contributes its mass through the
        // coupling springs.
        int n = std::max(2, static_cast<int>(std::floor(total / grid_.dx)) + 1);
        double ds = total / (n - 1);

        Bar bar;
        bar.id = s.id;
        bar.ds = ds;
        double area = s.cross_section.area();
        double ei = bar_mat_.e_long * s.cross_section.second_moment();
        bar.node_mass = bar_mat_.density * area * ds;
        bar.accel_coef =
            n >= 4 ? ei / (bar_mat_.density * area * ds * ds * ds * ds) : 0.0;
        bar.u.assign(static_cast<size_t>(n), 0.0);
        bar.v.assign(static_cast<size_t>(n), 0.0);
        bar.a.assign(static_cast<size_t>(n), 0.0);

        auto point_at = [&](double at) -> Vec2 {
            size_t seg = 1;
            while (seg + 1 < seg_start.size() && seg_start[seg] < at) ++seg;
            double s0 = seg_start[seg - 1], s1 = seg_start[seg];
            double t = s1 > s0 ? (at - s0) / (s1 - s0) : 0.0;
            const Vec2& a = s.polyline[seg - 1];
            const Vec2& b = s.polyline[seg];
            return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
        };

        for (int k = 0; k < n; ++k) {
            Vec2 p = point_at(k * ds);
            int node = grid_.index(grid_.nearest_i(p.x), grid_.nearest_j(p.y));
            int compact = compact_of_[static_cast<size_t>(node)];
            require(compact >= 0, errc::path_exits_mask,
                    "bar " + s.id + " touches a node outside the mask");
            bar.plate_node.push_back(compact);
            bar.pos.push_back(p);
        }

        // Penalty spring per bar node: aim for 100x the local plate
        // stiffness-to-node ratio, capped by the stability budget.
        const double lambda_lim =
            std::pow(2.0 * opt_.stability_target / dt_, 2.0);
        double lambda_bar = 16.0 * bar.accel_coef;
        for (int k = 0; k < n; ++k) {
            int compact = bar.plate_node[static_cast<size_t>(k)];
            int node = grid_node_[static_cast<size_t>(compact)];
            double h = thickness.h[static_cast<size_t>(node)];
            double m_p = plate_mat_.density * h * grid_.dx * grid_.dx;
            double lambda_p = plate_node_rate2(plate_mat_, h, grid_.dx);
            double k_desired = 100.0 * m_p * lambda_p;
            double lambda_avail = lambda_lim - std::max(lambda_p, lambda_bar);
            require(lambda_avail > 0.0, errc::unstable_configuration,
                    "bar " + s.id + " exceeds the stability budget; reduce dt or cross-section");
            double k_cap = lambda_avail / (1.0 / m_p + 1.0 / bar.node_mass);
            bar.spring_k.push_back(std::min(k_desired, k_cap));
        }
        bars_.push_back(std::move(bar));
    }
}

double PlateModel::bar_row_rate2(const Bar& bar, size_t k) const {
    const size_t n = bar.u.size();
    double stencil;
    if (k == 0 || k == n - 1)
        stencil = 4.0; // |1 -2 1|
    else if (k == 1 || k == n - 2)
        stencil = 12.0; // |-2 5 -4 1|
    else
        stencil = 16.0; // |1 -4 6 -4 1|
    return stencil * bar.accel_coef + bar.spring_k[k] / bar.node_mass;
}

void PlateModel::audit_stability() {
    std::vector<double> spring_on_plate(nodes_.size(), 0.0);
    for (const Bar& bar : bars_)
        for (size_t k = 0; k < bar.plate_node.size(); ++k)
            spring_on_plate[static_cast<size_t>(bar.plate_node[k])] += bar.spring_k[k];

    double worst = 0.0;
    std::string where = "plate";
    int worst_node = -1;
    for (size_t k = 0; k < nodes_.size(); ++k) {
        double row = 0.0;
        const double* w = &wgt_[k * 13];
        for (int t = 0; t < 13; ++t) row += std::fabs(w[t]);
        row += spring_on_plate[k] * inv_mass_[k];
        row_rate2_[k] = row;
        if (row > worst) {
            worst = row;
            worst_node = grid_node_[k];
        }
    }
    for (const Bar& bar : bars_) {
        for (size_t k = 0; k < bar.u.size(); ++k) {
            double row = bar_row_rate2(bar, k);
            if (row > worst) {
                worst = row;
                worst_node = -1;
                where = "bar " + bar.id;
            }
        }
    }
    stability_number_ = 0.5 * dt_ * std::sqrt(worst);
    if (stability_number_ > 1.0) {
        std::string loc = worst_node >= 0
                              ? "node (" + std::to_string(worst_node % grid_.nx) + ", " +
                                    std::to_string(worst_node / grid_.nx) + ")"
                              : where;
        fail(errc::unstable_configuration,
             "assembled system unstable (number " + std::to_string(stability_number_) +
                 ") at " + loc);
    }
}

void PlateModel::set_static_load(const std::vector<double>& fz) {
    require(fz.size() == static_cast<size_t>(grid_.count()), errc::bad_argument,
            "static load must cover the full grid");
    static_accel_.assign(nodes_.size(), 0.0);
    for (size_t k = 0; k < nodes_.size(); ++k)
        static_accel_[k] = fz[static_cast<size_t>(grid_node_[k])] * inv_mass_[k];
}

void PlateModel::set_gamma(double gamma) {
    require(gamma > 0.0 && gamma <= 1.0, errc::bad_argument, "gamma must lie in (0, 1]");
    gamma_ = gamma;
}

DofRef PlateModel::plate_dof(int node) const {
    require(node >= 0 && node < grid_.count(), errc::bad_argument, "node out of range");
    int compact = compact_of_[static_cast<size_t>(node)];
    require(compact >= 0, errc::bad_argument, "node lies outside the mask");
    return {-1, compact};
}

DofRef PlateModel::station_dof(const StringStation& station) const {
    const char* want = station.bridge == BridgeId::eight_foot ? "bridge8" : "bridge4";
    double x = grid_.node_x(station.node % grid_.nx);
    double y = grid_.node_y(station.node / grid_.nx);
    for (size_t b = 0; b < bars_.size(); ++b) {
        if (bars_[b].id != want) continue;
        double best = std::numeric_limits<double>::max();
        int at = 0;
        for (size_t k = 0; k < bars_[b].pos.size(); ++k) {
            double d2 = (bars_[b].pos[k].x - x) * (bars_[b].pos[k].x - x) +
                        (bars_[b].pos[k].y - y) * (bars_[b].pos[k].y - y);
            if (d2 < best) {
                best = d2;
                at = static_cast<int>(k);
            }
        }
        return {static_cast<int>(b), at};
    }
    return plate_dof(station.node);
}

void PlateModel::kick(DofRef dof, double dv) {
    if (dof.bar < 0)
        v_[static_cast<size_t>(dof.index)] += dv;
    else
        bars_[static_cast<size_t>(dof.bar)].v[static_cast<size_t>(dof.index)] += dv;
}

void PlateModel::compact_rows() {
    std::map<std::array<double, 13>, int> unique;
    rows_.clear();
    row_of_.assign(nodes_.size(), 0);
    for (size_t k = 0; k < nodes_.size(); ++k) {
        std::array<double, 13> row;
        std::copy(&wgt_[k * 13], &wgt_[k * 13] + 13, row.begin());
        auto [it, inserted] = unique.try_emplace(row, static_cast<int>(unique.size()));
        if (inserted) rows_.insert(rows_.end(), row.begin(), row.end());
        row_of_[k] = it->second;
    }
    rows_dirty_ = false;
}

void PlateModel::plate_accel_range(long lo, long hi) {
    const double* w = w_.data();
    const int* off = offsets_;
    for (long k = lo; k < hi; ++k) {
        const double* g = &rows_[static_cast<size_t>(row_of_[static_cast<size_t>(k)]) * 13];
        const double* wp = w + nodes_[static_cast<size_t>(k)];
        // Independent partials keep the FP add chain short.
        double a0 = g[C] * wp[0] + g[XM1] * wp[off[1]] + g[XP1] * wp[off[2]];
        double a1 = g[XM2] * wp[off[3]] + g[XP2] * wp[off[4]] + g[YM1] * wp[off[5]];
        double a2 = g[YP1] * wp[off[6]] + g[YM2] * wp[off[7]] + g[YP2] * wp[off[8]];
        double a3 = g[PP] * wp[off[9]] + g[PM] * wp[off[10]];
        double a4 = g[MP] * wp[off[11]] + g[MM] * wp[off[12]];
        a_[static_cast<size_t>(k)] = -((a0 + a1) + (a2 + a3) + a4);
    }
    if (!static_accel_.empty()) {
        for (long k = lo; k < hi; ++k)
            a_[static_cast<size_t>(k)] += static_accel_[static_cast<size_t>(k)];
    }
}

void PlateModel::couple_and_force(DofRef dof, double force) {
    // Bars: free-free Euler-Bernoulli rows, then the penalty coupling. Runs
    // serially so shared plate nodes accumulate deterministically.
    for (Bar& bar : bars_) {
        const size_t m = bar.u.size();
        const double c = bar.accel_coef;
        if (c > 0.0) {
            bar.a[0] = -c * (bar.u[0] - 2.0 * bar.u[1] + bar.u[2]);
            bar.a[1] = -c * (-2.0 * bar.u[0] + 5.0 * bar.u[1] - 4.0 * bar.u[2] + bar.u[3]);
            for (size_t k = 2; k + 2 < m; ++k)
                bar.a[k] = -c * (bar.u[k - 2] - 4.0 * bar.u[k - 1] + 6.0 * bar.u[k] -
                                 4.0 * bar.u[k + 1] + bar.u[k + 2]);
            bar.a[m - 2] = -c * (bar.u[m - 4] - 4.0 * bar.u[m - 3] + 5.0 * bar.u[m - 2] -
                                 2.0 * bar.u[m - 1]);
            bar.a[m - 1] = -c * (bar.u[m - 3] - 2.0 * bar.u[m - 2] + bar.u[m - 1]);
        } else {
            std::fill(bar.a.begin(), bar.a.end(), 0.0);
        }

        for (size_t k = 0; k < m; ++k) {
            int p = bar.plate_node[k];
            double f = bar.spring_k[k] *
                       (bar.u[k] - w_[static_cast<size_t>(nodes_[static_cast<size_t>(p)])]);
            double f_plate = f;
            double f_bar = -f;
            assert(f_plate + f_bar == 0.0); // force-force coupling is reciprocal
            a_[static_cast<size_t>(p)] += f_plate * inv_mass_[static_cast<size_t>(p)];
            bar.a[k] += f_bar / bar.node_mass;
        }
    }

    if (force != 0.0) {
        if (dof.bar < 0)
            a_[static_cast<size_t>(dof.index)] +=
                force * inv_mass_[static_cast<size_t>(dof.index)];
        else
            bars_[static_cast<size_t>(dof.bar)].a[static_cast<size_t>(dof.index)] +=
                force / bars_[static_cast<size_t>(dof.bar)].node_mass;
    }
}

void PlateModel::update_state_range(long lo, long hi) {
    const double g = gamma_;
    const double dt = dt_;
    double* wd = w_.data();
    for (long k = lo; k < hi; ++k) {
        double vv = g * (v_[static_cast<size_t>(k)] + dt * a_[static_cast<size_t>(k)]);
        v_[static_cast<size_t>(k)] = vv;
        wd[nodes_[static_cast<size_t>(k)]] += dt * vv;
    }
}

void PlateModel::step_forced(DofRef dof, double force) {
    if (rows_dirty_) compact_rows();
    const long n = static_cast<long>(nodes_.size());

    if (opt_.parallel && n >= opt_.parallel_min_nodes) {
        // One fork-join per step; the serial coupling runs on one thread
        // between the two barriers. Chunk boundaries do not change any
        // node's arithmetic, so results stay bit-identical to the serial
        // path for any thread count.
        const long chunks = 8;
#pragma omp parallel
        {
#pragma omp for schedule(static)
            for (long chunk = 0; chunk < chunks; ++chunk)
                plate_accel_range(chunk * n / chunks, (chunk + 1) * n / chunks);
#pragma omp single
            couple_and_force(dof, force);
#pragma omp for schedule(static)
            for (long chunk = 0; chunk < chunks; ++chunk)
                update_state_range(chunk * n / chunks, (chunk + 1) * n / chunks);
        }
    } else {
        plate_accel_range(0, n);
        couple_and_force(dof, force);
        update_state_range(0, n);
    }

    for (Bar& bar : bars_) {
        for (size_t k = 0; k < bar.u.size(); ++k) {
            double vv = gamma_ * (bar.v[k] + dt_ * bar.a[k]);
            bar.v[k] = vv;
            bar.u[k] += dt_ * vv;
        }
    }
    ++steps_;
}

double PlateModel::sample(DofRef dof, ProbeField field) const {
    if (dof.bar < 0) {
        return field == ProbeField::displacement
                   ? w_[static_cast<size_t>(nodes_[static_cast<size_t>(dof.index)])]
                   : v_[static_cast<size_t>(dof.index)];
    }
    const Bar& bar = bars_[static_cast<size_t>(dof.bar)];
    return field == ProbeField::displacement ? bar.u[static_cast<size_t>(dof.index)]
                                             : bar.v[static_cast<size_t>(dof.index)];
}

double PlateModel::kinetic_energy() const {
    double e = 0.0;
    for (size_t k = 0; k < nodes_.size(); ++k)
        e += 0.5 * v_[k] * v_[k] / inv_mass_[k];
    for (const Bar& bar : bars_)
        for (double vv : bar.v) e += 0.5 * bar.node_mass * vv * vv;
    return e;
}

double PlateModel::energy() const {
    // Staggered discrete energy: 1/2 v'Mv + 1/2 <K w_new, w_old> with
    // w_old = w_new - dt v.
    double e = kinetic_energy();
    for (size_t k = 0; k < nodes_.size(); ++k) {
        const double* g = &wgt_[k * 13];
        const double* wp = w_.data() + nodes_[k];
        double kw = g[C] * wp[0];
        for (int t = 1; t < 13; ++t) kw += g[t] * wp[offsets_[t]];
        double w_new = wp[0];
        double w_old = w_new - dt_ * v_[k];
        e += 0.5 * (kw / inv_mass_[k]) * w_old;
    }
    for (const Bar& bar : bars_) {
        const size_t m = bar.u.size();
        const double ei_ds = bar.accel_coef * bar.node_mass; // EI/ds^4 * ds ...
        for (size_t k = 1; k + 1 < m; ++k) {
            double c_new = bar.u[k - 1] - 2.0 * bar.u[k] + bar.u[k + 1];
            double c_old = (bar.u[k - 1] - dt_ * bar.v[k - 1]) -
                           2.0 * (bar.u[k] - dt_ * bar.v[k]) +
                           (bar.u[k + 1] - dt_ * bar.v[k + 1]);
            e += 0.5 * ei_ds * c_new * c_old;
        }
        for (size_t k = 0; k < m; ++k) {
            double wp = w_[static_cast<size_t>(nodes_[static_cast<size_t>(bar.plate_node[k])])];
            double vp = v_[static_cast<size_t>(bar.plate_node[k])];
            double d_new = bar.u[k] - wp;
            double d_old = (bar.u[k] - dt_ * bar.v[k]) - (wp - dt_ * vp);
            e += 0.5 * bar.spring_k[k] * d_new * d_old;
        }
    }
    return e;
}

void PlateModel::check_finite() const {
    for (size_t k = 0; k < nodes_.size(); ++k) {
        double w = w_[static_cast<size_t>(nodes_[k])];
        if (!std::isfinite(w) || std::fabs(w) > 1.0e3) {
            int node = grid_node_[k];
            fail(errc::divergence, "state diverged at step " + std::to_string(steps_) +
                                       ", node (" + std::to_string(node % grid_.nx) + ", " +
                                       std::to_string(node / grid_.nx) + ")");
        }
    }
    for (const Bar& bar : bars_) {
        for (size_t k = 0; k < bar.u.size(); ++k) {
            if (!std::isfinite(bar.u[k]) || std::fabs(bar.u[k]) > 1.0e3)
                fail(errc::divergence, "state diverged at step " + std::to_string(steps_) +
                                           ", bar " + bar.id + " node " + std::to_string(k));
        }
    }
}

std::vector<double> PlateModel::displacement_grid() const {
    std::vector<double> out(static_cast<size_t>(grid_.count()), 0.0);
    for (size_t k = 0; k < nodes_.size(); ++k)
        out[static_cast<size_t>(grid_node_[k])] = w_[static_cast<size_t>(nodes_[k])];
    return out;
}

double PlateModel::node_mass(int node) const {
    int compact = compact_of_[static_cast<size_t>(node)];
    require(compact >= 0, errc::bad_argument, "node lies outside the mask");
    return 1.0 / inv_mass_[static_cast<size_t>(compact)];
}

double PlateModel::max_residual_force() const {
    double worst = 0.0;
    for (size_t k = 0; k < nodes_.size(); ++k)
        worst = std::max(worst, std::fabs(a_[k]) / inv_mass_[k]);
    for (const Bar& bar : bars_)
        for (double a : bar.a) worst = std::max(worst, std::fabs(a) * bar.node_mass);
    return worst;
}

ThicknessMap effective_thickness(const SoundboardLayout& layout, const ThicknessMap& map) {
    // Saturating at the clamp ceiling keeps the rail region inside the
    // explicit scheme's stability envelope at the default time step.
    ThicknessMap effective = map;
    for (const StiffenerPath& s : layout.stiffeners) {
        if (s.treatment != BarTreatment::thickness_add) continue;
        for (int node : rasterize_strip(s, layout.grid, layout.mask)) {
            double h = effective.h[static_cast<size_t>(node)] + s.cross_section.height;
            effective.h[static_cast<size_t>(node)] = std::min(h, effective.h_max);
        }
    }

    // Bevel hard steps: the stencil freezes coefficients at the node and
    // goes non-normal (and unstable) across order-one thickness jumps, so
    // limit the drop to 35% per cell. Real rails have beveled edges.
    const GridSpec& g = layout.grid;
    const double ratio = 1.35;
    for (int sweep = 0; sweep < 16; ++sweep) {
        bool changed = false;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                size_t k = static_cast<size_t>(g.index(i, j));
                if (!effective.mask[k]) continue;
                double tallest = 0.0;
                auto peek = [&](int ii, int jj) {
                    if (!g.in_range(ii, jj)) return;
                    size_t kk = static_cast<size_t>(g.index(ii, jj));
                    if (effective.mask[kk]) tallest = std::max(tallest, effective.h[kk]);
                };
                peek(i - 1, j);
                peek(i + 1, j);
                peek(i, j - 1);
                peek(i, j + 1);
                double floor_h = tallest / ratio;
                if (effective.h[k] < floor_h) {
                    effective.h[k] = floor_h;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }
    return effective;
}

} // namespace sblab
