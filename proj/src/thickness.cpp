#include "sblab/thickness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sblab {

namespace {

// Dense LU solve with partial pivoting, in place. a is n x n row major.
void lu_solve(std::vector<double>& a, std::vector<double>& b, int n) {
    std::vector<int> perm(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::fabs(a[static_cast<size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double v = std::fabs(a[static_cast<size_t>(r) * n + col]);
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        require(best > 0.0, errc::bad_argument, "singular spline system");
        if (pivot != col) {
            for (int c = 0; c < n; ++c)
                std::swap(a[static_cast<size_t>(col) * n + c], a[static_cast<size_t>(pivot) * n + c]);
            std::swap(b[static_cast<size_t>(col)], b[static_cast<size_t>(pivot)]);
        }
        double d = a[static_cast<size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            double f = a[static_cast<size_t>(r) * n + col] / d;
            if (f == 0.0) continue;
            a[static_cast<size_t>(r) * n + col] = 0.0;
            for (int c = col + 1; c < n; ++c)
                a[static_cast<size_t>(r) * n + c] -= f * a[static_cast<size_t>(col) * n + c];
            b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(col)];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[static_cast<size_t>(r)];
        for (int c = r + 1; c < n; ++c)
            s -= a[static_cast<size_t>(r) * n + c] * b[static_cast<size_t>(c)];
        b[static_cast<size_t>(r)] = s / a[static_cast<size_t>(r) * n + r];
    }
}

double tps_kernel(double r2) {
    if (r2 <= 0.0) return 0.0;
    return 0.5 * r2 * std::log(r2); // r^2 log r
}

// Solve the smoothing spline system (K + n*lambda*I) w + P a = h, P^T w = 0
// for one smoothing weight. Returns weights (n kernel + 3 affine).
std::vector<double> fit_once(const std::vector<ThicknessSample>& s, double lambda) {
    const int n = static_cast<int>(s.size());
    const int m = n + 3;
    std::vector<double> a(static_cast<size_t>(m) * m, 0.0);
    std::vector<double> rhs(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double dx = s[static_cast<size_t>(i)].x - s[static_cast<size_t>(j)].x;
            double dy = s[static_cast<size_t>(i)].y - s[static_cast<size_t>(j)].y;
            a[static_cast<size_t>(i) * m + j] = tps_kernel(dx * dx + dy * dy);
        }
        a[static_cast<size_t>(i) * m + i] += n * lambda;
        a[static_cast<size_t>(i) * m + n + 0] = 1.0;
        a[static_cast<size_t>(i) * m + n + 1] = s[static_cast<size_t>(i)].x;
        a[static_cast<size_t>(i) * m + n + 2] = s[static_cast<size_t>(i)].y;
        a[static_cast<size_t>(n + 0) * m + i] = 1.0;
        a[static_cast<size_t>(n + 1) * m + i] = s[static_cast<size_t>(i)].x;
        a[static_cast<size_t>(n + 2) * m + i] = s[static_cast<size_t>(i)].y;
        rhs[static_cast<size_t>(i)] = s[static_cast<size_t>(i)].h;
    }
    lu_solve(a, rhs, m);
    return rhs;
}

double eval_spline(const std::vector<ThicknessSample>& s, const std::vector<double>& w,
                   double x, double y) {
    const size_t n = s.size();
    double v = w[n] + w[n + 1] * x + w[n + 2] * y;
    for (size_t i = 0; i < n; ++i) {
        double dx = x - s[i].x;
        double dy = y - s[i].y;
        v += w[i] * tps_kernel(dx * dx + dy * dy);
    }
    return v;
}

struct Normalizer {
    double x0, y0, sx, sy;
};

// Map sample coordinates to the unit box; keeps the kernel system conditioned
// for meter-scale boards and millimeter-scale test layouts alike.
Normalizer normalize(std::vector<ThicknessSample>& s) {
    double xlo = s[0].x, xhi = s[0].x, ylo = s[0].y, yhi = s[0].y;
    for (const ThicknessSample& p : s) {
        xlo = std::min(xlo, p.x);
        xhi = std::max(xhi, p.x);
        ylo = std::min(ylo, p.y);
        yhi = std::max(yhi, p.y);
    }
    double span = std::max({xhi - xlo, yhi - ylo, 1e-9});
    for (ThicknessSample& p : s) {
        p.x = (p.x - xlo) / span;
        p.y = (p.y - ylo) / span;
    }
    return {xlo, ylo, span, span};
}

std::vector<double> fit_smoothing(const std::vector<ThicknessSample>& s) {
    double mean = 0.0;
    for (const ThicknessSample& p : s) mean += p.h;
    mean /= static_cast<double>(s.size());

    double lambda = 1e-4;
    std::vector<double> w;
    for (;;) {
        w = fit_once(s, lambda);
        double rms = 0.0, worst = 0.0;
        for (const ThicknessSample& p : s) {
            double e = std::fabs(eval_spline(s, w, p.x, p.y) - p.h);
            rms += e * e;
            worst = std::max(worst, e);
        }
        rms = std::sqrt(rms / static_cast<double>(s.size()));
        if ((rms <= 0.02 * mean && worst <= 0.045 * mean) || lambda < 1e-12) break;
        lambda *= 0.25;
    }
    return w;
}

} // namespace

ThicknessField::ThicknessField(const std::vector<ThicknessSample>& samples,
                               const Polygon& boundary, double tolerance_dx) {
    require(samples.size() >= 4, errc::too_few_samples,
            "thickness interpolation needs at least 4 samples, got " +
                std::to_string(samples.size()));
    for (const ThicknessSample& p : samples) {
        require(p.h > 0.0, errc::bad_argument, "thickness sample must be positive");
        if (!boundary.contains(p.x, p.y)) {
            double d = std::sqrt(boundary.outline_dist2(p.x, p.y));
            require(d <= tolerance_dx, errc::sample_outside_boundary,
                    "thickness sample outside the boundary");
        }
    }
    samples_ = samples;
    Normalizer norm = normalize(samples_);
    x0_ = norm.x0;
    y0_ = norm.y0;
    sx_ = norm.sx;
    sy_ = norm.sy;
    weights_ = fit_smoothing(samples_);
}

double ThicknessField::operator()(double x, double y) const {
    return eval_spline(samples_, weights_, (x - x0_) / sx_, (y - y0_) / sy_);
}

ThicknessMap interpolate_thickness(const std::vector<ThicknessSample>& samples,
                                   const GridSpec& grid, const Polygon& boundary,
                                   ClampBounds clamp) {
    grid.validate();
    require(clamp.h_min > 0.0 && clamp.h_max > clamp.h_min, errc::bad_argument,
            "clamp bounds must be positive and ordered");

    ThicknessField field(samples, boundary, grid.dx);

    ThicknessMap map;
    map.grid = grid;
    map.mask = build_mask(boundary, grid);
    map.h_min = clamp.h_min;
    map.h_max = clamp.h_max;
    map.h.assign(static_cast<size_t>(grid.count()), 0.0);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            size_t k = static_cast<size_t>(grid.index(i, j));
            if (!map.mask[k]) continue;
            double v = field(grid.node_x(i), grid.node_y(j));
            require(std::isfinite(v), errc::bad_argument, "non-finite interpolated thickness");
            map.h[k] = std::clamp(v, clamp.h_min, clamp.h_max);
        }
    }
    return map;
}

} // namespace sblab
