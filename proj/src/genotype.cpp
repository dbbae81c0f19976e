#include "morphevo/genotype.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace morphevo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Phenotype copies of a genotype node: two inside the head's side subtree.
std::size_t multiplicity(std::span<const Slot> path) {
    return (!path.empty() && path.front() == slots::kHeadSide) ? 2 : 1;
}

void count_modules(const GenotypeNode& node, std::size_t weight, std::size_t& total) {
    total += weight;
    for (const auto& a : node.children) {
        count_modules(a.node, weight, total);
    }
}

template <typename Fn>
void walk(const GenotypeNode& node, NodePath& path, Fn&& fn) {
    fn(node, path);
    for (const auto& a : node.children) {
        path.push_back(a.slot);
        walk(a.node, path, fn);
        path.pop_back();
    }
}

template <typename Fn>
void walk_mut(GenotypeNode& node, Fn&& fn) {
    fn(node);
    for (auto& a : node.children) {
        walk_mut(a.node, fn);
    }
}

}  // namespace

std::string_view to_string(ModuleKind kind) {
    switch (kind) {
        case ModuleKind::Head: return "head";
        case ModuleKind::Block: return "block";
        case ModuleKind::Joint: return "joint";
    }
    return "?";
}

ModuleKind module_kind_from_string(std::string_view name) {
    if (name == "head") return ModuleKind::Head;
    if (name == "block") return ModuleKind::Block;
    if (name == "joint") return ModuleKind::Joint;
    throw GenotypeError("unknown module kind '" + std::string(name) + "'");
}

double wrap_phase(double radians) {
    double w = std::fmod(radians, kTwoPi);
    if (w < 0.0) {
        w += kTwoPi;
    }
    // fmod of a tiny negative value can round up to exactly 2pi.
    if (w >= kTwoPi) {
        w = 0.0;
    }
    return w;
}

ControllerParams random_controller(Random& rng) {
    const double amplitude = rng.uniform();
    const double phase = rng.uniform() * kTwoPi;
    return {amplitude, wrap_phase(phase)};
}

ControllerParams decode_controller(double unit_amplitude, double unit_phase) {
    return {std::clamp(unit_amplitude, 0.0, 1.0), wrap_phase(unit_phase * kTwoPi)};
}

// GenotypeNode ---------------------------------------------------------------

GenotypeNode GenotypeNode::head() { return GenotypeNode{ModuleKind::Head, std::nullopt, {}}; }

GenotypeNode GenotypeNode::block() { return GenotypeNode{ModuleKind::Block, std::nullopt, {}}; }

GenotypeNode GenotypeNode::joint(ControllerParams params) {
    return GenotypeNode{ModuleKind::Joint, params, {}};
}

const GenotypeNode* GenotypeNode::child(Slot slot) const {
    for (const auto& a : children) {
        if (a.slot == slot) return &a.node;
    }
    return nullptr;
}

GenotypeNode* GenotypeNode::child(Slot slot) {
    return const_cast<GenotypeNode*>(std::as_const(*this).child(slot));
}

GenotypeNode& GenotypeNode::attach(Slot slot, GenotypeNode node) {
    auto it = std::lower_bound(children.begin(), children.end(), slot,
                               [](const Attachment& a, Slot s) { return a.slot < s; });
    if (it != children.end() && it->slot == slot) {
        it->node = std::move(node);
        return it->node;
    }
    it = children.insert(it, Attachment{slot, std::move(node)});
    return it->node;
}

std::optional<GenotypeNode> GenotypeNode::detach(Slot slot) {
    for (auto it = children.begin(); it != children.end(); ++it) {
        if (it->slot == slot) {
            GenotypeNode node = std::move(it->node);
            children.erase(it);
            return node;
        }
    }
    return std::nullopt;
}

std::size_t GenotypeNode::subtree_size() const {
    std::size_t n = 0;
    count_modules(*this, 1, n);
    return n;
}

bool operator==(const GenotypeNode& a, const GenotypeNode& b) {
    return a.kind == b.kind && a.controller == b.controller && a.children == b.children;
}

// Genotype -------------------------------------------------------------------

const GenotypeNode* Genotype::find(std::span<const Slot> path) const {
    const GenotypeNode* node = &root;
    for (Slot s : path) {
        node = node->child(s);
        if (node == nullptr) return nullptr;
    }
    return node;
}

GenotypeNode* Genotype::find(std::span<const Slot> path) {
    return const_cast<GenotypeNode*>(std::as_const(*this).find(path));
}

std::size_t module_count(const Genotype& g) {
    std::size_t total = 1;
    for (const auto& a : g.root.children) {
        count_modules(a.node, a.slot == slots::kHeadSide ? 2 : 1, total);
    }
    return total;
}

std::vector<ControllerParams> joint_controllers(const Genotype& g) {
    std::vector<ControllerParams> out;
    NodePath path;
    walk(g.root, path, [&](const GenotypeNode& n, const NodePath&) {
        if (n.kind == ModuleKind::Joint && n.controller) {
            out.push_back(*n.controller);
        }
    });
    return out;
}

std::size_t distinct_joint_count(const Genotype& g) { return joint_controllers(g).size(); }

std::vector<double> encode_params(const Genotype& g) {
    std::vector<double> out;
    for (const auto& c : joint_controllers(g)) {
        out.push_back(c.amplitude);
        out.push_back(c.phase_offset / kTwoPi);
    }
    return out;
}

Genotype with_params(Genotype g, std::span<const double> unit_params) {
    std::size_t i = 0;
    walk_mut(g.root, [&](GenotypeNode& n) {
        if (n.kind != ModuleKind::Joint) return;
        if (i + 2 > unit_params.size()) {
            throw GenotypeError("parameter vector shorter than joint count");
        }
        n.controller = decode_controller(unit_params[i], unit_params[i + 1]);
        i += 2;
    });
    if (i != unit_params.size()) {
        throw GenotypeError("parameter vector length does not match joint count");
    }
    return g;
}

// Validation -----------------------------------------------------------------

std::vector<Violation> validate(const Genotype& g, std::size_t max_modules) {
    std::vector<Violation> out;
    if (g.root.kind != ModuleKind::Head) {
        out.push_back({ViolationCode::RootNotHead, "root module is not a head"});
    }
    NodePath path;
    walk(g.root, path, [&](const GenotypeNode& n, const NodePath& p) {
        if (!p.empty() && n.kind == ModuleKind::Head) {
            out.push_back({ViolationCode::NestedHead, "head module below the root"});
        }
        Slot previous = 0;
        bool first = true;
        for (const auto& a : n.children) {
            if (a.slot >= slot_count(n.kind)) {
                out.push_back({ViolationCode::SlotOutOfRange,
                               "slot " + std::to_string(a.slot) + " out of range for " +
                                   std::string(to_string(n.kind))});
            }
            if (!first && a.slot <= previous) {
                out.push_back({ViolationCode::DuplicateSlot, "children not strictly ordered by slot"});
            }
            previous = a.slot;
            first = false;
        }
        if (n.kind == ModuleKind::Joint) {
            if (!n.controller) {
                out.push_back({ViolationCode::MissingController, "joint without controller"});
            } else {
                const auto& c = *n.controller;
                if (!(c.amplitude >= 0.0 && c.amplitude <= 1.0)) {
                    out.push_back({ViolationCode::AmplitudeRange, "amplitude outside [0, 1]"});
                }
                if (!(c.phase_offset >= 0.0 && c.phase_offset < kTwoPi)) {
                    out.push_back({ViolationCode::PhaseRange, "phase offset outside [0, 2pi)"});
                }
            }
        } else if (n.controller) {
            out.push_back({ViolationCode::UnexpectedController,
                           std::string(to_string(n.kind)) + " carries a controller"});
        }
    });
    const std::size_t count = module_count(g);
    if (count > max_modules) {
        out.push_back({ViolationCode::SizeCap, "module count " + std::to_string(count) +
                                                   " exceeds cap " + std::to_string(max_modules)});
    }
    return out;
}

// Construction -----------------------------------------------------------------

namespace {

GenotypeNode random_module(Random& rng) {
    if (rng.coin()) {
        return GenotypeNode::block();
    }
    return GenotypeNode::joint(random_controller(rng));
}

}  // namespace

Genotype random_genotype(Random& rng, std::size_t min_modules, std::size_t max_modules) {
    if (min_modules < 1 || min_modules > max_modules) {
        throw GenotypeError("random_genotype requires 1 <= min_modules <= max_modules");
    }
    Genotype g;
    g.alternating_phase = rng.coin();
    const auto target = static_cast<std::size_t>(
        rng.between(static_cast<std::int64_t>(min_modules), static_cast<std::int64_t>(max_modules)));

    std::size_t count = 1;
    while (count < target) {
        const std::size_t remaining = target - count;
        std::vector<InsertionSite> open;
        for (auto& site : insertion_sites(g)) {
            if (site.occupied) continue;
            NodePath full = site.parent;
            full.push_back(site.slot);
            if (multiplicity(full) <= remaining) {
                open.push_back(std::move(site));
            }
        }
        if (open.empty()) break;
        const auto& site = open[rng.below(open.size())];
        g = insert_module(g, site, random_module(rng));
        count = module_count(g);
    }
    return g;
}

std::vector<InsertionSite> insertion_sites(const Genotype& g) {
    std::vector<InsertionSite> out;
    NodePath path;
    walk(g.root, path, [&](const GenotypeNode& n, const NodePath& p) {
        for (Slot s = 0; s < slot_count(n.kind); ++s) {
            out.push_back({p, s, n.child(s) != nullptr});
        }
    });
    return out;
}

std::vector<NodePath> removable_nodes(const Genotype& g) {
    std::vector<NodePath> out;
    NodePath path;
    walk(g.root, path, [&](const GenotypeNode&, const NodePath& p) {
        if (!p.empty()) out.push_back(p);
    });
    return out;
}

Genotype insert_module(const Genotype& g, const InsertionSite& site, GenotypeNode module) {
    if (module.kind == ModuleKind::Head) {
        throw GenotypeError("cannot insert a head module");
    }
    Genotype out = g;
    GenotypeNode* parent = out.find(site.parent);
    if (parent == nullptr || site.slot >= slot_count(parent->kind)) {
        throw GenotypeError("insertion site does not exist");
    }
    if (auto existing = parent->detach(site.slot)) {
        module.children.clear();
        module.attach(0, std::move(*existing));
    } else if (site.occupied) {
        throw GenotypeError("insertion site expected an occupied slot");
    }
    parent->attach(site.slot, std::move(module));
    return out;
}

Genotype remove_node(const Genotype& g, std::span<const Slot> path) {
    if (path.empty()) {
        throw GenotypeError("the head cannot be removed");
    }
    Genotype out = g;
    GenotypeNode* parent = out.find(path.first(path.size() - 1));
    if (parent == nullptr) {
        throw GenotypeError("node to remove does not exist");
    }
    auto removed = parent->detach(path.back());
    if (!removed) {
        throw GenotypeError("node to remove does not exist");
    }
    if (!removed->children.empty()) {
        parent->attach(path.back(), std::move(removed->children.front().node));
    }
    return out;
}

Genotype flip_phase(const Genotype& g) {
    Genotype out = g;
    out.alternating_phase = !out.alternating_phase;
    return out;
}

EditResult add_modules(const Genotype& g, Random& rng, std::size_t n) {
    EditResult r{g, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const auto sites = insertion_sites(r.genotype);
        if (sites.empty()) break;
        const auto& site = sites[rng.below(sites.size())];
        r.genotype = insert_module(r.genotype, site, random_module(rng));
        ++r.applied;
    }
    return r;
}

EditResult remove_modules(const Genotype& g, Random& rng, std::size_t n) {
    EditResult r{g, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const auto candidates = removable_nodes(r.genotype);
        if (candidates.empty()) break;
        r.genotype = remove_node(r.genotype, candidates[rng.below(candidates.size())]);
        ++r.applied;
    }
    return r;
}

Genotype perturb_controllers(const Genotype& g, Random& rng, double sigma) {
    Genotype out = g;
    if (sigma <= 0.0) return out;
    walk_mut(out.root, [&](GenotypeNode& n) {
        if (!n.controller) return;
        auto& c = *n.controller;
        c.amplitude = std::clamp(c.amplitude + rng.normal(0.0, sigma), 0.0, 1.0);
        c.phase_offset = wrap_phase(c.phase_offset + rng.normal(0.0, sigma) * kTwoPi);
    });
    return out;
}

MutationOutcome mutate_detailed(const Genotype& g, Random& rng, const MutationConfig& cfg) {
    const double total = cfg.p_add + cfg.p_remove + cfg.p_flip;
    if (!(total > 0.0)) {
        throw GenotypeError("mutation probabilities must sum to a positive value");
    }
    const auto draw = [&] {
        const double u = rng.uniform() * total;
        if (u < cfg.p_add) return StructuralMutation::Add;
        if (u < cfg.p_add + cfg.p_remove) return StructuralMutation::Remove;
        return StructuralMutation::Flip;
    };
    const auto draw_count = [&] {
        return static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(cfg.max_change)));
    };

    MutationOutcome out{g, StructuralMutation::None};
    for (std::size_t attempt = 0; attempt < cfg.max_retries; ++attempt) {
        const StructuralMutation op = draw();
        Genotype candidate;
        switch (op) {
            case StructuralMutation::Add: {
                auto r = add_modules(g, rng, draw_count());
                if (r.applied == 0) continue;
                candidate = std::move(r.genotype);
                break;
            }
            case StructuralMutation::Remove: {
                if (removable_nodes(g).empty()) continue;
                candidate = remove_modules(g, rng, draw_count()).genotype;
                break;
            }
            case StructuralMutation::Flip:
            case StructuralMutation::None:
                candidate = flip_phase(g);
                break;
        }
        if (module_count(candidate) <= cfg.max_modules) {
            out = {std::move(candidate), op};
            break;
        }
    }
    out.genotype = perturb_controllers(out.genotype, rng, cfg.sigma);
    return out;
}

Genotype mutate(const Genotype& g, Random& rng, const MutationConfig& cfg) {
    return mutate_detailed(g, rng, cfg).genotype;
}

}  // namespace morphevo
