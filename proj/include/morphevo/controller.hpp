#pragma once

#include "morphevo/genotype.hpp"

namespace morphevo {

inline constexpr double kDefaultFrequency = 4.0;

/// Open-loop sine oscillator of one joint.
struct SineState {
    double phi = 0.0;  // accumulated phase, radians, never wrapped
    ControllerParams params;
    double offset = 0.0;
    double frequency = kDefaultFrequency;
};

/// phi_i = phi_{i-1} + delta_phi * F
double step_phase(double phi_prev, double delta_phi, double frequency);

/// A * sin(phi + P) + O, in units of the maximum deflection.
double joint_target(const SineState& state);

/// Parameters used by the right-hand copy of a mirrored joint: unchanged when
/// in phase, phase shifted by pi when alternating.
ControllerParams mirrored_params(ControllerParams p, bool alternating);

}  // namespace morphevo
