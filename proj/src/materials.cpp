#include "sblab/materials.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sblab {

double MaterialSpec::shear_modulus() const {
    double nu_gm = std::sqrt(poisson_major * poisson_minor());
    return std::sqrt(e_long * e_cross()) / (2.0 * (1.0 + nu_gm));
}

void MaterialSpec::validate() const {
    require(e_long > 0.0, errc::nonphysical_material, "e_long must be positive");
    require(anisotropy_ratio >= 1.0, errc::nonphysical_material,
            "anisotropy ratio must be >= 1");
    require(density > 0.0, errc::nonphysical_material, "density must be positive");
    require(poisson_major > 0.0 && poisson_major < 0.5, errc::nonphysical_material,
            "poisson ratio must lie in (0, 0.5)");
    require(1.0 - poisson_major * poisson_minor() > 0.0, errc::nonphysical_material,
            "poisson combination is not positive definite");
    require(decrement > 0.0 && decrement <= 1.0, errc::nonphysical_material,
            "decrement must lie in (0, 1]");
}

void TimeSpec::validate() const {
    require(dt > 0.0, errc::bad_argument, "time step must be positive");
}

BendingStiffness bending_stiffness(const MaterialSpec& material, double h) {
    material.validate();
    require(h > 0.0, errc::bad_argument, "plate thickness must be positive");
    double nu_denom = 1.0 - material.poisson_major * material.poisson_minor();
    double h3 = h * h * h;
    BendingStiffness d;
    d.along_grain = material.e_long * h3 / (12.0 * nu_denom);
    d.cross_grain = material.e_cross() * h3 / (12.0 * nu_denom);
    d.coupling = material.poisson_minor() * d.along_grain;
    d.twisting = material.shear_modulus() * h3 / 12.0;
    return d;
}

double plate_node_rate2(const MaterialSpec& material, double h, double dx) {
    BendingStiffness d = bending_stiffness(material, h);
    double dx4 = dx * dx * dx * dx;
    return 16.0 * d.stability_sum() / (material.density * h * dx4);
}

StabilityReport check_stability(const MaterialSpec& material, const ThicknessMap& map,
                                const GridSpec& grid, const TimeSpec& time) {
    material.validate();
    grid.validate();
    time.validate();

    double worst = 0.0;
    double softest = std::numeric_limits<double>::max();
    int worst_node = -1;
    for (int k = 0; k < grid.count(); ++k) {
        if (!map.mask[static_cast<size_t>(k)]) continue;
        double r2 = plate_node_rate2(material, map.h[static_cast<size_t>(k)], grid.dx);
        if (r2 > worst) {
            worst = r2;
            worst_node = k;
        }
        softest = std::min(softest, r2);
    }
    require(worst_node >= 0, errc::bad_argument, "thickness map has no in-mask nodes");

    StabilityReport report;
    report.worst_node = worst_node;
    report.stability_number = 0.5 * time.dt * std::sqrt(worst);
    report.bandwidth_hz =
        std::min(std::sqrt(softest) / (2.0 * M_PI), 0.5 / time.dt);
    if (report.stability_number > 1.0) {
        int i = worst_node % grid.nx;
        int j = worst_node / grid.nx;
        fail(errc::unstable_configuration,
             "explicit scheme unstable at node (" + std::to_string(i) + ", " +
                 std::to_string(j) + "): stability number " +
                 std::to_string(report.stability_number) + " > 1; reduce dt or thickness");
    }
    return report;
}

} // namespace sblab
