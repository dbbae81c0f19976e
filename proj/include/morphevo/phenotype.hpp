#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "morphevo/genotype.hpp"

namespace morphevo {

// Phenotype slots of the head; the genotype side slot expands into left and right.
namespace phenotype_slots {
inline constexpr Slot kHeadFront = 0;
inline constexpr Slot kHeadBack = 1;
inline constexpr Slot kHeadLeft = 2;
inline constexpr Slot kHeadRight = 3;
}  // namespace phenotype_slots

enum class Side : std::uint8_t { Center, Left, Right };

struct PhenotypeModule {
    ModuleKind kind = ModuleKind::Head;
    int parent = -1;  // index into Phenotype::modules, -1 for the head
    Slot slot = 0;    // slot on the parent (phenotype numbering for the head)
    Side side = Side::Center;
    int joint = -1;   // index into Phenotype::joints when kind == Joint
};

struct PhenotypeJoint {
    std::size_t module = 0;
    /// Shared parameter-set identity: index of the genotype joint in canonical order.
    std::size_t params_index = 0;
    /// True for the right-hand copy of a side-subtree joint.
    bool mirrored = false;
};

/// Symmetry-expanded robot. Modules are listed parent-before-child.
struct Phenotype {
    std::vector<PhenotypeModule> modules;
    std::vector<PhenotypeJoint> joints;
    std::size_t distinct_joints = 0;
    bool alternating_phase = false;

    std::size_t param_dimension() const { return 2 * distinct_joints; }
};

Phenotype expand_phenotype(const Genotype& g);

/// Effective sine parameters of every phenotype joint for a unit-box parameter
/// vector (layout of encode_params). Mirrored joints go through mirrored_params.
std::vector<ControllerParams> phenotype_joint_params(const Phenotype& ph,
                                                     std::span<const double> unit_params);

}  // namespace morphevo
