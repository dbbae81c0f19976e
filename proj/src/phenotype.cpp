#include "morphevo/phenotype.hpp"

#include <stdexcept>

#include "morphevo/controller.hpp"

namespace morphevo {

namespace {

struct Expander {
    Phenotype& ph;

    // `ordinal` is the joint counter state when this subtree was first entered,
    // so the right-hand copy re-uses the left-hand identities.
    void expand(const GenotypeNode& node, int parent, Slot slot, Side side, std::size_t& ordinal) {
        const auto index = static_cast<int>(ph.modules.size());
        ph.modules.push_back({node.kind, parent, slot, side, -1});
        if (node.kind == ModuleKind::Joint) {
            const std::size_t identity = ordinal++;
            ph.modules.back().joint = static_cast<int>(ph.joints.size());
            ph.joints.push_back({static_cast<std::size_t>(index), identity, side == Side::Right});
        }
        for (const auto& a : node.children) {
            expand(a.node, index, a.slot, side, ordinal);
        }
    }
};

}  // namespace

Phenotype expand_phenotype(const Genotype& g) {
    Phenotype ph;
    ph.alternating_phase = g.alternating_phase;
    ph.distinct_joints = distinct_joint_count(g);
    ph.modules.push_back({ModuleKind::Head, -1, 0, Side::Center, -1});

    Expander ex{ph};
    std::size_t ordinal = 0;
    for (const auto& a : g.root.children) {
        if (a.slot == slots::kHeadSide) {
            const std::size_t start = ordinal;
            ex.expand(a.node, 0, phenotype_slots::kHeadLeft, Side::Left, ordinal);
            std::size_t mirror_ordinal = start;
            ex.expand(a.node, 0, phenotype_slots::kHeadRight, Side::Right, mirror_ordinal);
        } else {
            ex.expand(a.node, 0, a.slot, Side::Center, ordinal);
        }
    }
    return ph;
}

std::vector<ControllerParams> phenotype_joint_params(const Phenotype& ph,
                                                     std::span<const double> unit_params) {
    if (unit_params.size() != ph.param_dimension()) {
        throw std::invalid_argument("parameter vector length does not match joint count");
    }
    std::vector<ControllerParams> out;
    out.reserve(ph.joints.size());
    for (const auto& j : ph.joints) {
        const auto p = decode_controller(unit_params[2 * j.params_index],
                                         unit_params[2 * j.params_index + 1]);
        out.push_back(j.mirrored ? mirrored_params(p, ph.alternating_phase) : p);
    }
    return out;
}

}  // namespace morphevo
