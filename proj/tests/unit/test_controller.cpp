#include <doctest.h>

#include <cmath>
#include <numbers>

#include "morphevo/controller.hpp"

using namespace morphevo;
constexpr double kPi = std::numbers::pi;

TEST_CASE("sine target follows A sin(phi + P) + O") {
    CHECK(joint_target({kPi / 2, {1.0, 0.0}, 0.0, 4.0}) == doctest::Approx(1.0));
    CHECK(joint_target({0.0, {0.5, kPi / 2}, 0.0, 4.0}) == doctest::Approx(0.5));
    CHECK(joint_target({0.3, {0.0, 1.0}, 0.25, 4.0}) == doctest::Approx(0.25));
    for (double phi = 0.0; phi < 10.0; phi += 0.37) {
        const double t = joint_target({phi, {0.7, 1.1}, 0.0, 4.0});
        CHECK(t == doctest::Approx(0.7 * std::sin(phi + 1.1)));
        CHECK(std::abs(t) <= 0.7 + 1e-12);
    }
}

TEST_CASE("phase advances by delta times frequency") {
    CHECK(step_phase(0.0, 0.05, 4.0) == doctest::Approx(0.2));
    double phi = 0.0;
    for (int i = 0; i < 600; ++i) phi = step_phase(phi, 0.05, 4.0);
    CHECK(phi == doctest::Approx(120.0));
    CHECK(step_phase(1.0, 0.0, 4.0) == 1.0);
    CHECK_THROWS_AS(step_phase(0.0, -0.1, 4.0), std::invalid_argument);
}

TEST_CASE("alternating phase shifts the mirror by pi") {
    const ControllerParams p{0.6, 0.5};
    CHECK(mirrored_params(p, false) == p);
    const auto m = mirrored_params(p, true);
    CHECK(m.amplitude == p.amplitude);
    CHECK(m.phase_offset == doctest::Approx(0.5 + kPi));
    const auto wrap = mirrored_params({0.6, 4.0}, true);
    CHECK(wrap.phase_offset == doctest::Approx(4.0 + kPi - 2 * kPi));
    for (double phi = 0.0; phi < 6.0; phi += 0.5) {
        CHECK(joint_target({phi, m, 0.0, 4.0}) == doctest::Approx(-joint_target({phi, p, 0.0, 4.0})));
    }
}
