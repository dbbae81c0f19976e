#include "morphevo/genotype_json.hpp"

#include <string>

namespace morphevo {

namespace {

nlohmann::json node_to_json(const GenotypeNode& n) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(n.kind));
    nlohmann::json children = nlohmann::json::object();
    for (const auto& a : n.children) {
        children[std::to_string(a.slot)] = node_to_json(a.node);
    }
    j["children"] = std::move(children);
    if (n.controller) {
        j["controller"] = {{"amplitude", n.controller->amplitude},
                           {"phase_offset", n.controller->phase_offset}};
    }
    return j;
}

GenotypeNode node_from_json(const nlohmann::json& j) {
    GenotypeNode n;
    n.kind = module_kind_from_string(j.at("kind").get<std::string>());
    if (auto it = j.find("controller"); it != j.end() && !it->is_null()) {
        n.controller = ControllerParams{it->at("amplitude").get<double>(), it->at("phase_offset").get<double>()};
    }
    if (auto it = j.find("children"); it != j.end()) {
        for (const auto& [key, child] : it->items()) {
            const int slot = std::stoi(key);
            if (slot < 0 || slot > 255) {
                throw GenotypeError("slot index out of range: " + key);
            }
            n.attach(static_cast<Slot>(slot), node_from_json(child));
        }
    }
    return n;
}

}  // namespace

nlohmann::json genotype_to_json(const Genotype& g) {
    return {{"format_version", kGenotypeFormatVersion},
            {"alternating_phase", g.alternating_phase},
            {"root", node_to_json(g.root)}};
}

Genotype genotype_from_json(const nlohmann::json& j) {
    if (j.value("format_version", 0) != kGenotypeFormatVersion) {
        throw GenotypeError("unsupported genotype format_version");
    }
    Genotype g;
    g.alternating_phase = j.at("alternating_phase").get<bool>();
    g.root = node_from_json(j.at("root"));
    return g;
}

}  // namespace morphevo
