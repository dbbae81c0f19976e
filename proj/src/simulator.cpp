#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "morphevo/controller.hpp"
#include "morphevo/fitness.hpp"

namespace morphevo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;

struct SlotFrame {
    Vec2 attach;
    double heading;
};

// Where a child in `slot` attaches to `parent` and its heading before any
// hinge rotation. `mirror` is -1 inside the right-hand copy of the side subtree.
SlotFrame slot_frame(ModuleKind parent_kind, const ModulePose& parent, Slot slot, double mirror) {
    const Vec2 mid = parent.midpoint();
    switch (parent_kind) {
        case ModuleKind::Head:
            switch (slot) {
                case phenotype_slots::kHeadFront: return {parent.distal, parent.heading};
                case phenotype_slots::kHeadBack: return {parent.proximal, parent.heading + kPi};
                // Both lateral legs hang below the head centre.
                default: return {mid, parent.heading - kHalfPi};
            }
        case ModuleKind::Block:
            switch (slot) {
                case slots::kBlockFront: return {parent.distal, parent.heading};
                case slots::kBlockLeft: return {mid, parent.heading + mirror * kHalfPi};
                case slots::kBlockRight: return {mid, parent.heading - mirror * kHalfPi};
                case slots::kBlockUp: return {parent.distal, parent.heading + mirror * kHalfPi};
                default: return {parent.distal, parent.heading - mirror * kHalfPi};
            }
        case ModuleKind::Joint:
            return {parent.distal, parent.heading};
    }
    return {parent.distal, parent.heading};
}

void pose_into(const Phenotype& ph, std::span<const double> joint_angles, double length,
               double root_heading, std::vector<ModulePose>& out) {
    out.resize(ph.modules.size());
    const Vec2 axis{std::cos(root_heading) * length / 2, std::sin(root_heading) * length / 2};
    out[0] = {{-axis.x, -axis.z}, {axis.x, axis.z}, root_heading};
    for (std::size_t m = 1; m < ph.modules.size(); ++m) {
        const auto& mod = ph.modules[m];
        const auto parent = static_cast<std::size_t>(mod.parent);
        const double mirror = mod.side == Side::Right ? -1.0 : 1.0;
        SlotFrame f = slot_frame(ph.modules[parent].kind, out[parent], mod.slot, mirror);
        if (mod.kind == ModuleKind::Joint) {
            f.heading += joint_angles[static_cast<std::size_t>(mod.joint)];
        }
        out[m] = {f.attach,
                  {f.attach.x + length * std::cos(f.heading), f.attach.z + length * std::sin(f.heading)},
                  f.heading};
    }
}

double com_x(const std::vector<ModulePose>& poses) {
    double s = 0.0;
    for (const auto& p : poses) {
        s += p.midpoint().x;
    }
    return s / static_cast<double>(poses.size());
}

const Vec2& endpoint(const std::vector<ModulePose>& poses, std::size_t point) {
    const auto& p = poses[point / 2];
    return (point % 2 == 0) ? p.proximal : p.distal;
}

}  // namespace

std::vector<ModulePose> forward_kinematics(const Phenotype& ph, std::span<const double> joint_angles,
                                           double module_length, double root_heading) {
    if (joint_angles.size() != ph.joints.size()) {
        throw InvalidParams("forward_kinematics: one angle per phenotype joint required");
    }
    std::vector<ModulePose> out;
    pose_into(ph, joint_angles, module_length, root_heading, out);
    return out;
}

std::size_t SimConfig::steps() const {
    const double n = duration / dt;
    const double rounded = std::round(n);
    if (!(dt > 0.0) || std::abs(n - rounded) > 1e-9 || rounded < 0.0) {
        throw std::invalid_argument("SimConfig: duration must be a whole number of steps");
    }
    return static_cast<std::size_t>(rounded);
}

double simulate(const Phenotype& ph, std::span<const double> unit_params, const Heightmap& terrain,
                const SimConfig& cfg, std::vector<double>* com_trace) {
    if (unit_params.size() != ph.param_dimension()) {
        throw InvalidParams("simulate: expected " + std::to_string(ph.param_dimension()) +
                            " parameters, got " + std::to_string(unit_params.size()));
    }
    for (double v : unit_params) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidParams("simulate: parameter outside [0, 1]");
        }
    }
    const std::size_t steps = cfg.steps();
    const auto params = phenotype_joint_params(ph, unit_params);

    std::vector<double> angles(ph.joints.size());
    std::vector<ModulePose> current;
    std::vector<ModulePose> next;

    double phi = 0.0;
    const auto set_angles = [&](double phase) {
        for (std::size_t j = 0; j < params.size(); ++j) {
            angles[j] = cfg.max_deflection *
                        joint_target(SineState{phase, params[j], cfg.offset, cfg.frequency});
        }
    };

    set_angles(phi);
    pose_into(ph, angles, cfg.module_length, cfg.root_heading, current);

    double body_x = cfg.start_x;
    const double com_start = body_x + com_x(current);
    if (com_trace) {
        com_trace->assign(1, com_start);
        com_trace->reserve(steps + 1);
    }

    const std::size_t points = 2 * current.size();
    for (std::size_t k = 0; k < steps; ++k) {
        // Anchor: deepest endpoint relative to the local ground, first wins ties.
        std::size_t anchor = 0;
        double deepest = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < points; ++p) {
            const Vec2& v = endpoint(current, p);
            const double clearance = v.z - terrain.height(body_x + v.x);
            if (clearance < deepest) {
                deepest = clearance;
                anchor = p;
            }
        }

        phi = step_phase(phi, cfg.dt, cfg.frequency);
        set_angles(phi);
        pose_into(ph, angles, cfg.module_length, cfg.root_heading, next);

        const Vec2& before = endpoint(current, anchor);
        const Vec2& after = endpoint(next, anchor);
        const double slope = terrain.slope_x(body_x + before.x);
        const double grip = 1.0 / (1.0 + slope * slope);
        body_x -= (after.x - before.x) * grip;

        std::swap(current, next);
        if (com_trace) {
            com_trace->push_back(body_x + com_x(current));
        }
    }
    return (body_x + com_x(current)) - com_start;
}

ProxyEvaluator::ProxyEvaluator(const TerrainConfig& terrain, SimConfig sim)
    : terrain_(generate_terrain(terrain)), sim_(sim) {}

ProxyEvaluator::ProxyEvaluator(Heightmap terrain, SimConfig sim)
    : terrain_(std::move(terrain)), sim_(sim) {}

double ProxyEvaluator::do_evaluate(const Phenotype& ph, std::span<const double> unit_params) const {
    return simulate(ph, unit_params, terrain_, sim_);
}

}  // namespace morphevo
