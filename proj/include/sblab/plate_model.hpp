#ifndef SBLAB_PLATE_MODEL_HPP
#define SBLAB_PLATE_MODEL_HPP

#include <vector>

#include "sblab/geometry.hpp"
#include "sblab/materials.hpp"

namespace sblab {

enum class PlateBc { clamped, simply_supported };
enum class ProbeField { displacement, velocity };

/// Degree of freedom handle: a plate node (bar < 0) or a node on one of the
/// coupled stiffener bars.
struct DofRef {
    int bar = -1;
    int index = 0;
};

/// Explicit time-stepped orthotropic plate with coupled stiffener bars.
///
/// The plate update is a 13-point biharmonic stencil with per-node
/// coefficients (thickness frozen at the node); boundary conditions enter
/// through arm folding at the rim (clamped mirrors, simply-supported
/// anti-mirrors). Bridges, cutoff bar, and ribs run as free-free
/// Euler-Bernoulli chains tied to their plate nodes by stiff penalty
/// springs; the 4' rail enters as added plate thickness, saturated at the
/// thickness clamp. The velocity state is scaled by the material decrement
/// once per step, so decrement 1 integrates without loss.
///
/// step() runs the stencil loop through OpenMP when parallel is set; the
/// serial path computes bit-identical states and is kept as the reference
/// for tests and benchmarks.
class PlateModel {
public:
    struct Options {
        PlateBc bc = PlateBc::clamped;
        bool parallel = true;
        // Per-step threading only pays off once the per-step work dwarfs the
        // fork-join cost; below this node count the serial path runs even
        // when parallel is set. Batch-level parallelism covers small grids.
        int parallel_min_nodes = 20000;
        double stability_target = 0.95; // cap for penalty spring budgets
    };

    PlateModel(const SoundboardLayout& layout, const ThicknessMap& thickness,
               const MaterialSpec& plate_material, const MaterialSpec& bar_material,
               double dt, Options options);

    /// Constant transverse load (N per node, full-grid indexing), applied
    /// every step. Used by the static relaxation solver.
    void set_static_load(const std::vector<double>& fz);

    /// In-plane tension along the string axis (N/m, full-grid indexing),
    /// folded into the stencil as a linearized geometric-stiffness term.
    /// Must be called before the first step.
    void set_membrane_tension(const std::vector<double>& ny);

    void set_gamma(double gamma);
    double gamma() const { return gamma_; }
    double dt() const { return dt_; }
    long steps_taken() const { return steps_; }

    DofRef plate_dof(int node) const;
    /// Dof a string station excites: the bridge-bar node collocated with the
    /// station when that bridge is a coupled bar, else the plate node.
    DofRef station_dof(const StringStation& station) const;

    void kick(DofRef dof, double dv);
    void step() { step_forced({}, 0.0); }
    void step_forced(DofRef dof, double force);

    double sample(DofRef dof, ProbeField field) const;

    /// Discrete energy (kinetic plus staggered potential); exactly conserved
    /// by the undamped scheme up to coefficient asymmetry and roundoff.
    double energy() const;
    double kinetic_energy() const;

    /// Throws errc::divergence when any state value is non-finite or absurd.
    void check_finite() const;

    /// Displacement on the nx*ny grid (zero outside the mask).
    std::vector<double> displacement_grid() const;

    double stability_number() const { return stability_number_; }
    int dof_count() const { return static_cast<int>(nodes_.size()); }

    /// Mass of one plate node (kg); force / node_mass gives acceleration.
    double node_mass(int node) const;

    /// Largest nodal force imbalance (N) after the most recent step.
    double max_residual_force() const;

private:
    struct Bar {
        std::string id;
        double ds = 0.0;
        double node_mass = 0.0;
        double accel_coef = 0.0; // EI / (rho A ds^4)
        std::vector<int> plate_node;   // compact plate index per bar node
        std::vector<double> spring_k;  // N/m per bar node
        std::vector<double> u, v, a;
        std::vector<Vec2> pos;
    };

    void assemble(const SoundboardLayout& layout, const ThicknessMap& thickness);
    void accumulate_energy_rows(const ThicknessMap& thickness);
    void build_bars(const SoundboardLayout& layout, const ThicknessMap& thickness);
    void audit_stability();
    void compact_rows();
    void plate_accel_range(long lo, long hi);
    void couple_and_force(DofRef dof, double force);
    void update_state_range(long lo, long hi);
    double bar_row_rate2(const Bar& bar, size_t k) const;

    MaterialSpec plate_mat_;
    MaterialSpec bar_mat_;
    GridSpec grid_;
    Options opt_;
    double dt_ = 0.0;
    double gamma_ = 1.0;
    long steps_ = 0;
    double stability_number_ = 0.0;

    int padded_w_ = 0;
    std::vector<double> w_;       // padded grid displacement, zero outside mask
    std::vector<int> nodes_;      // compact -> padded index
    std::vector<int> grid_node_;  // compact -> full-grid index
    std::vector<int> compact_of_; // full-grid index -> compact (-1 outside)
    std::vector<double> v_, a_;
    std::vector<double> wgt_;     // 13 weights per compact node
    std::vector<double> rows_;    // deduplicated weight rows (13 each)
    std::vector<int> row_of_;     // compact node -> row index
    bool rows_dirty_ = true;      // uniform boards share a handful of rows
    std::vector<double> inv_mass_;
    std::vector<double> static_accel_;
    std::vector<double> row_rate2_; // Gershgorin stiffness-to-mass per node
    int offsets_[13] = {};
    std::vector<Bar> bars_;
    bool membrane_set_ = false;
};

/// Thickness map with thickness_add stiffeners (the 4' rail) applied,
/// saturated at the map's clamp ceiling. This is the field the solvers run
/// on; exposed so stress post-processing sees the same thickness.
ThicknessMap effective_thickness(const SoundboardLayout& layout, const ThicknessMap& map);

} // namespace sblab

#endif
