#include "morphevo/controller.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace morphevo {

double step_phase(double phi_prev, double delta_phi, double frequency) {
    if (delta_phi < 0.0) {
        throw std::invalid_argument("step_phase: delta_phi must be non-negative");
    }
    return phi_prev + delta_phi * frequency;
}

double joint_target(const SineState& state) {
    return state.params.amplitude * std::sin(state.phi + state.params.phase_offset) + state.offset;
}

ControllerParams mirrored_params(ControllerParams p, bool alternating) {
    if (alternating) {
        p.phase_offset = wrap_phase(p.phase_offset + std::numbers::pi);
    }
    return p;
}

}  // namespace morphevo
