#pragma once

#include <nlohmann/json.hpp>

#include "morphevo/genotype.hpp"

namespace morphevo {

inline constexpr int kGenotypeFormatVersion = 1;

/// {"format_version", "alternating_phase", "root": node}; a node is
/// {"kind", "children": {"<slot>": node}, "controller"?: {"amplitude", "phase_offset"}}.
nlohmann::json genotype_to_json(const Genotype& g);
/// Structural parse only; run validate() for semantic checks.
Genotype genotype_from_json(const nlohmann::json& j);

}  // namespace morphevo
