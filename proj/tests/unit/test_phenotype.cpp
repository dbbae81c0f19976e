#include <doctest.h>

#include <functional>
#include <map>

#include "morphevo/genotype.hpp"
#include "morphevo/phenotype.hpp"

using namespace morphevo;

namespace {

struct JointTally {
    std::size_t side = 0;
    std::size_t other = 0;
};

JointTally tally(const Genotype& g) {
    JointTally t;
    std::function<void(const GenotypeNode&, bool)> walk = [&](const GenotypeNode& n, bool side) {
        if (n.kind == ModuleKind::Joint) ++(side ? t.side : t.other);
        for (const auto& a : n.children) {
            walk(a.node, side || (n.kind == ModuleKind::Head && a.slot == slots::kHeadSide));
        }
    };
    walk(g.root, false);
    return t;
}

// Subtree shape below module m, as a string of kinds and slots.
std::string shape(const Phenotype& ph, std::size_t m) {
    std::string s = std::string(to_string(ph.modules[m].kind)) + "(";
    for (std::size_t c = 0; c < ph.modules.size(); ++c) {
        if (ph.modules[c].parent == static_cast<int>(m)) {
            s += std::to_string(ph.modules[c].slot) + ":" + shape(ph, c) + ",";
        }
    }
    return s + ")";
}

}  // namespace

TEST_CASE("lone head") {
    const Phenotype ph = expand_phenotype(Genotype{});
    CHECK(ph.modules.size() == 1);
    CHECK(ph.joints.empty());
    CHECK(ph.param_dimension() == 0);
}

TEST_CASE("side joint becomes a mirrored pair with one parameter set") {
    Genotype g;
    g.root.attach(slots::kHeadSide, GenotypeNode::joint({0.4, 1.0}));
    const Phenotype ph = expand_phenotype(g);
    CHECK(ph.modules.size() == 3);
    REQUIRE(ph.joints.size() == 2);
    CHECK(ph.distinct_joints == 1);
    CHECK(ph.joints[0].params_index == ph.joints[1].params_index);
    CHECK(ph.joints[0].mirrored != ph.joints[1].mirrored);
}

TEST_CASE("joint counts follow 2j + k with j + k parameter sets") {
    Random rng(21);
    for (int i = 0; i < 500; ++i) {
        const Genotype g = random_genotype(rng, 1, 20);
        const Phenotype ph = expand_phenotype(g);
        const JointTally t = tally(g);
        CHECK(ph.joints.size() == 2 * t.side + t.other);
        CHECK(ph.distinct_joints == t.side + t.other);
        CHECK(ph.modules.size() == module_count(g));
        for (std::size_t m = 1; m < ph.modules.size(); ++m) {
            CHECK(ph.modules[m].parent < static_cast<int>(m));
        }
    }
}

TEST_CASE("left and right copies are isomorphic and share parameter identities") {
    Random rng(22);
    for (int i = 0; i < 300; ++i) {
        const Genotype g = random_genotype(rng, 15, 20);
        const Phenotype ph = expand_phenotype(g);
        int left = -1, right = -1;
        for (std::size_t m = 1; m < ph.modules.size(); ++m) {
            if (ph.modules[m].parent != 0) continue;
            if (ph.modules[m].slot == phenotype_slots::kHeadLeft) left = static_cast<int>(m);
            if (ph.modules[m].slot == phenotype_slots::kHeadRight) right = static_cast<int>(m);
        }
        CHECK((left < 0) == (right < 0));
        if (left < 0) continue;
        CHECK(shape(ph, static_cast<std::size_t>(left)) == shape(ph, static_cast<std::size_t>(right)));

        std::map<std::size_t, int> left_ids, right_ids;
        for (const auto& j : ph.joints) {
            const Side s = ph.modules[j.module].side;
            if (s == Side::Left) {
                ++left_ids[j.params_index];
                CHECK_FALSE(j.mirrored);
            }
            if (s == Side::Right) {
                ++right_ids[j.params_index];
                CHECK(j.mirrored);
            }
        }
        CHECK(left_ids == right_ids);
    }
}

TEST_CASE("mirrored joints get phase-shifted parameters only when alternating") {
    Genotype g;
    g.root.attach(slots::kHeadSide, GenotypeNode::joint({0.4, 1.0}));
    const std::vector<double> unit = {0.4, 0.25};
    for (bool alternating : {false, true}) {
        g.alternating_phase = alternating;
        const Phenotype ph = expand_phenotype(g);
        const auto params = phenotype_joint_params(ph, unit);
        REQUIRE(params.size() == 2);
        const auto& l = ph.joints[0].mirrored ? params[1] : params[0];
        const auto& r = ph.joints[0].mirrored ? params[0] : params[1];
        CHECK(l.amplitude == doctest::Approx(0.4));
        CHECK(r.amplitude == doctest::Approx(0.4));
        CHECK(l.phase_offset == doctest::Approx(std::numbers::pi / 2));
        CHECK(r.phase_offset == doctest::Approx(alternating ? 1.5 * std::numbers::pi : std::numbers::pi / 2));
    }
}
