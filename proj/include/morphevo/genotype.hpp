#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "morphevo/random.hpp"

namespace morphevo {

enum class ModuleKind : std::uint8_t { Head, Block, Joint };

std::string_view to_string(ModuleKind kind);
ModuleKind module_kind_from_string(std::string_view name);

using Slot = std::uint8_t;

// Genotype slot layout. The head's mirrored left/right pair shares one slot.
namespace slots {
inline constexpr Slot kHeadFront = 0;
inline constexpr Slot kHeadBack = 1;
inline constexpr Slot kHeadSide = 2;

inline constexpr Slot kBlockFront = 0;
inline constexpr Slot kBlockLeft = 1;
inline constexpr Slot kBlockRight = 2;
inline constexpr Slot kBlockUp = 3;
inline constexpr Slot kBlockDown = 4;

inline constexpr Slot kJointFront = 0;
}  // namespace slots

/// Number of child slots a module of this kind exposes in the genotype.
constexpr std::size_t slot_count(ModuleKind kind) {
    switch (kind) {
        case ModuleKind::Head: return 3;
        case ModuleKind::Block: return 5;
        case ModuleKind::Joint: return 1;
    }
    return 0;
}

/// Sine-controller parameters of one joint: amplitude in [0, 1] (fraction of
/// the maximum deflection) and phase offset in [0, 2pi).
struct ControllerParams {
    double amplitude = 0.0;
    double phase_offset = 0.0;

    friend bool operator==(const ControllerParams&, const ControllerParams&) = default;
};

double wrap_phase(double radians);
ControllerParams random_controller(Random& rng);

struct Attachment;

struct GenotypeNode {
    ModuleKind kind = ModuleKind::Head;
    std::optional<ControllerParams> controller;
    /// Sorted by slot, at most one entry per slot.
    std::vector<Attachment> children;

    static GenotypeNode head();
    static GenotypeNode block();
    static GenotypeNode joint(ControllerParams params);

    const GenotypeNode* child(Slot slot) const;
    GenotypeNode* child(Slot slot);
    /// Attaches (or replaces) the child at `slot`; returns a reference to it.
    GenotypeNode& attach(Slot slot, GenotypeNode node);
    std::optional<GenotypeNode> detach(Slot slot);

    /// Genotype nodes in this subtree, counting each node once.
    std::size_t subtree_size() const;

    friend bool operator==(const GenotypeNode&, const GenotypeNode&);
};

struct Attachment {
    Slot slot = 0;
    GenotypeNode node;

    friend bool operator==(const Attachment&, const Attachment&) = default;
};

/// Path from the root to a node: the slot taken at every level.
using NodePath = std::vector<Slot>;

struct Genotype {
    GenotypeNode root = GenotypeNode::head();
    bool alternating_phase = false;

    const GenotypeNode* find(std::span<const Slot> path) const;
    GenotypeNode* find(std::span<const Slot> path);

    friend bool operator==(const Genotype&, const Genotype&) = default;
};

inline constexpr std::size_t kMaxModules = 20;

/// Phenotype module count: the head's side subtree is mirrored and counts twice.
std::size_t module_count(const Genotype& g);

/// Controllers in canonical order (pre-order walk, ascending slot).
std::vector<ControllerParams> joint_controllers(const Genotype& g);
std::size_t distinct_joint_count(const Genotype& g);

/// Parameter vector in the unit box: [A_0, P_0 / 2pi, A_1, P_1 / 2pi, ...].
std::vector<double> encode_params(const Genotype& g);
/// Inverse of encode_params; writes the controllers back in canonical order.
Genotype with_params(Genotype g, std::span<const double> unit_params);
ControllerParams decode_controller(double unit_amplitude, double unit_phase);

// Errors -------------------------------------------------------------------

class GenotypeError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ViolationCode {
    RootNotHead,
    NestedHead,
    SlotOutOfRange,
    DuplicateSlot,
    SizeCap,
    MissingController,
    UnexpectedController,
    AmplitudeRange,
    PhaseRange,
};

struct Violation {
    ViolationCode code;
    std::string message;
};

std::vector<Violation> validate(const Genotype& g, std::size_t max_modules = kMaxModules);

// Construction and variation ---------------------------------------------------

Genotype random_genotype(Random& rng, std::size_t min_modules, std::size_t max_modules);

/// A place where a module can be inserted: an empty slot, or an occupied slot
/// whose current child gets spliced below the new module.
struct InsertionSite {
    NodePath parent;
    Slot slot = 0;
    bool occupied = false;

    friend bool operator==(const InsertionSite&, const InsertionSite&) = default;
};

std::vector<InsertionSite> insertion_sites(const Genotype& g);
/// Paths of all non-head nodes, pre-order.
std::vector<NodePath> removable_nodes(const Genotype& g);

/// Inserts a single Block or Joint at `site`. On an occupied slot the existing
/// child moves to the new module's front slot.
Genotype insert_module(const Genotype& g, const InsertionSite& site, GenotypeNode module);

/// Removes the node at `path`. Its lowest-slot child takes its place; any
/// further children are dropped together with their subtrees.
Genotype remove_node(const Genotype& g, std::span<const Slot> path);

Genotype flip_phase(const Genotype& g);

struct EditResult {
    Genotype genotype;
    /// Edits actually applied; fewer than requested signals exhaustion.
    std::size_t applied = 0;
};

EditResult add_modules(const Genotype& g, Random& rng, std::size_t n);
EditResult remove_modules(const Genotype& g, Random& rng, std::size_t n);

struct MutationConfig {
    double p_add = 1.0 / 3.0;
    double p_remove = 1.0 / 3.0;
    double p_flip = 1.0 / 3.0;
    /// Gaussian noise on (A, P / 2pi) of every controller.
    double sigma = 0.1;
    std::size_t max_retries = 100;
    std::size_t max_modules = kMaxModules;
    std::size_t max_change = 3;
};

enum class StructuralMutation { Add, Remove, Flip, None };

struct MutationOutcome {
    Genotype genotype;
    StructuralMutation applied = StructuralMutation::None;
};

MutationOutcome mutate_detailed(const Genotype& g, Random& rng, const MutationConfig& cfg = {});
Genotype mutate(const Genotype& g, Random& rng, const MutationConfig& cfg = {});

/// Adds independent N(0, sigma) noise to every controller (phase noise is
/// sigma * 2pi radians); amplitude is clamped and phase wrapped.
Genotype perturb_controllers(const Genotype& g, Random& rng, double sigma);

}  // namespace morphevo
