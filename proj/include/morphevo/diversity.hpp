#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "morphevo/genotype.hpp"

namespace morphevo {

/// Ordered, labelled tree used for morphological distances.
struct LabeledTree {
    char label = '?';
    std::vector<LabeledTree> children;

    std::size_t size() const;
    friend bool operator==(const LabeledTree&, const LabeledTree&);
};

/// Module kinds only ('H', 'B', 'J'); children in slot order, empty slots
/// omitted. Phase flag and controller parameters are ignored.
LabeledTree to_labeled_tree(const Genotype& g);

/// Bracket notation, e.g. "H(B(J)B)". Injective on labelled trees.
std::string to_bracket(const LabeledTree& t);

/// Unit-cost ordered tree edit distance (Zhang-Shasha).
std::size_t tree_edit_distance(const LabeledTree& a, const LabeledTree& b);

class TooFewGenotypes : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Mean tree edit distance over all unordered pairs. Identical trees are
/// deduplicated before the pairwise pass.
double population_diversity(std::span<const Genotype> genotypes);
double population_diversity(std::span<const LabeledTree> trees);

}  // namespace morphevo
