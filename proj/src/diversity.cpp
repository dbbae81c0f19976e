#include "morphevo/diversity.hpp"

#include <algorithm>
#include <map>

namespace morphevo {

namespace {

char label_of(ModuleKind kind) {
    switch (kind) {
        case ModuleKind::Head: return 'H';
        case ModuleKind::Block: return 'B';
        case ModuleKind::Joint: return 'J';
    }
    return '?';
}

LabeledTree convert(const GenotypeNode& node) {
    LabeledTree t{label_of(node.kind), {}};
    t.children.reserve(node.children.size());
    for (const auto& a : node.children) {
        t.children.push_back(convert(a.node));
    }
    return t;
}

void bracket(const LabeledTree& t, std::string& out) {
    out.push_back(t.label);
    if (t.children.empty()) return;
    out.push_back('(');
    for (const auto& c : t.children) bracket(c, out);
    out.push_back(')');
}

// Post-order arrays used by the Zhang-Shasha recurrence.
struct Annotated {
    std::vector<char> labels;         // post-order labels, 0-based
    std::vector<std::size_t> lmd;     // leftmost leaf descendant of each node
    std::vector<std::size_t> keyroots;

    explicit Annotated(const LabeledTree& root) {
        visit(root);
        // A keyroot is the highest node for each distinct leftmost descendant.
        std::map<std::size_t, std::size_t> highest;
        for (std::size_t i = 0; i < lmd.size(); ++i) highest[lmd[i]] = i;
        for (const auto& [leaf, node] : highest) keyroots.push_back(node);
        std::sort(keyroots.begin(), keyroots.end());
    }

    std::size_t visit(const LabeledTree& t) {
        std::size_t leftmost = labels.size();
        bool first = true;
        for (const auto& c : t.children) {
            const std::size_t child_lmd = visit(c);
            if (first) leftmost = child_lmd;
            first = false;
        }
        labels.push_back(t.label);
        lmd.push_back(leftmost);
        return leftmost;
    }
};

}  // namespace

std::size_t LabeledTree::size() const {
    std::size_t n = 1;
    for (const auto& c : children) n += c.size();
    return n;
}

bool operator==(const LabeledTree& a, const LabeledTree& b) {
    return a.label == b.label && a.children == b.children;
}

LabeledTree to_labeled_tree(const Genotype& g) { return convert(g.root); }

std::string to_bracket(const LabeledTree& t) {
    std::string out;
    bracket(t, out);
    return out;
}

std::size_t tree_edit_distance(const LabeledTree& a, const LabeledTree& b) {
    const Annotated A(a);
    const Annotated B(b);
    const std::size_t na = A.labels.size();
    const std::size_t nb = B.labels.size();
    std::vector<std::size_t> tree_dist(na * nb, 0);
    std::vector<std::size_t> forest((na + 1) * (nb + 1), 0);
    const auto fd = [&](std::size_t i, std::size_t j) -> std::size_t& { return forest[i * (nb + 1) + j]; };

    for (std::size_t ka : A.keyroots) {
        for (std::size_t kb : B.keyroots) {
            const std::size_t la = A.lmd[ka];
            const std::size_t lb = B.lmd[kb];
            // Forest indices are offset by the leftmost descendant; 0 = empty forest.
            const std::size_t ma = ka - la + 1;
            const std::size_t mb = kb - lb + 1;
            fd(0, 0) = 0;
            for (std::size_t i = 1; i <= ma; ++i) fd(i, 0) = fd(i - 1, 0) + 1;
            for (std::size_t j = 1; j <= mb; ++j) fd(0, j) = fd(0, j - 1) + 1;
            for (std::size_t i = 1; i <= ma; ++i) {
                const std::size_t x = la + i - 1;
                for (std::size_t j = 1; j <= mb; ++j) {
                    const std::size_t y = lb + j - 1;
                    const std::size_t del = fd(i - 1, j) + 1;
                    const std::size_t ins = fd(i, j - 1) + 1;
                    if (A.lmd[x] == la && B.lmd[y] == lb) {
                        const std::size_t rel = fd(i - 1, j - 1) + (A.labels[x] != B.labels[y] ? 1 : 0);
                        fd(i, j) = std::min({del, ins, rel});
                        tree_dist[x * nb + y] = fd(i, j);
                    } else {
                        const std::size_t pi = A.lmd[x] - la;
                        const std::size_t pj = B.lmd[y] - lb;
                        fd(i, j) = std::min({del, ins, fd(pi, pj) + tree_dist[x * nb + y]});
                    }
                }
            }
        }
    }
    return tree_dist[(na - 1) * nb + (nb - 1)];
}

double population_diversity(std::span<const LabeledTree> trees) {
    if (trees.size() < 2) {
        throw TooFewGenotypes("population_diversity needs at least two genotypes");
    }
    std::map<std::string, std::size_t> index;
    std::vector<const LabeledTree*> distinct;
    std::vector<std::size_t> multiplicity;
    for (const auto& t : trees) {
        auto [it, inserted] = index.try_emplace(to_bracket(t), distinct.size());
        if (inserted) {
            distinct.push_back(&t);
            multiplicity.push_back(0);
        }
        ++multiplicity[it->second];
    }
    double total = 0.0;
    for (std::size_t i = 0; i < distinct.size(); ++i) {
        for (std::size_t j = i + 1; j < distinct.size(); ++j) {
            total += static_cast<double>(multiplicity[i] * multiplicity[j]) *
                     static_cast<double>(tree_edit_distance(*distinct[i], *distinct[j]));
        }
    }
    const auto n = static_cast<double>(trees.size());
    return total / (n * (n - 1.0) / 2.0);
}

double population_diversity(std::span<const Genotype> genotypes) {
    std::vector<LabeledTree> trees;
    trees.reserve(genotypes.size());
    for (const auto& g : genotypes) trees.push_back(to_labeled_tree(g));
    return population_diversity(trees);
}

}  // namespace morphevo
