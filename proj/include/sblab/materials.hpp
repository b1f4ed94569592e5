#ifndef SBLAB_MATERIALS_HPP
#define SBLAB_MATERIALS_HPP

#include "sblab/geometry.hpp"

namespace sblab {

/// Orthotropic wood parameters. The grain axis runs along the strings
/// (grid y); the cross-grain axis along the keyboard (grid x).
struct MaterialSpec {
    double e_long = 11.0e9;        // Pa, Young's modulus along grain
    double anisotropy_ratio = 8.0; // e_long / e_cross
    double density = 430.0;        // kg/m^3
    double poisson_major = 0.3;    // nu, grain-to-cross
    double decrement = 1.0;        // per-step velocity factor, (0, 1]

    double e_cross() const { return e_long / anisotropy_ratio; }
    double poisson_minor() const { return poisson_major / anisotropy_ratio; }
    /// Huber's estimate; the parameter set carries no measured shear modulus.
    double shear_modulus() const;
    void validate() const;
};

inline MaterialSpec spruce() { return MaterialSpec{}; }

struct TimeSpec {
    double dt = 1.0 / 480000.0; // s
    long n_steps = 0;
    double sample_rate() const { return 1.0 / dt; }
    void validate() const;
};

/// Plate bending stiffnesses, N*m. along_grain/cross_grain are the two
/// principal rigidities, coupling the Poisson cross term, twisting the
/// shear rigidity.
struct BendingStiffness {
    double along_grain = 0.0;
    double cross_grain = 0.0;
    double coupling = 0.0;
    double twisting = 0.0;

    /// D_1 + 2 D_eff for the mixed-derivative term of the plate operator.
    double mixed() const { return coupling + 2.0 * twisting; }
    /// Worst-case operator magnitude per node, used by the stability bound.
    double stability_sum() const { return along_grain + cross_grain + 2.0 * mixed(); }
};

BendingStiffness bending_stiffness(const MaterialSpec& material, double h);

struct StabilityReport {
    double stability_number = 0.0; // <= 1 means the explicit scheme is stable
    double bandwidth_hz = 0.0;     // lowest grid-limit frequency over the mask
    int worst_node = -1;           // node with the largest stiffness-to-mass ratio
};

/// Explicit-scheme stability estimate for the bare plate. The stability
/// number is dt/2 times the square root of the largest per-node
/// stiffness-to-mass ratio (Gershgorin bound of the 13-point stencil); the
/// bandwidth is the lowest per-node grid-limit frequency, i.e. the highest
/// frequency representable everywhere on the board. Throws
/// errc::unstable_configuration when the stability number exceeds 1.
StabilityReport check_stability(const MaterialSpec& material, const ThicknessMap& map,
                                const GridSpec& grid, const TimeSpec& time);

/// Largest stiffness-to-mass ratio (1/s^2) of one plate node, matching the
/// stencil's Gershgorin row sum.
double plate_node_rate2(const MaterialSpec& material, double h, double dx);

} // namespace sblab

#endif
