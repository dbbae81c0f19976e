#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "morphevo/fitness.hpp"
#include "morphevo/genotype.hpp"
#include "morphevo/learner.hpp"
#include "morphevo/random.hpp"

namespace morphevo {

enum class SurvivorMode { Elitist, Generational };

std::string_view to_string(SurvivorMode mode);
SurvivorMode survivor_mode_from_string(std::string_view name);

struct Individual {
    std::uint64_t id = 0;
    Genotype genotype;
    /// Best fitness observed across this individual's evaluations.
    double fitness = 0.0;
    std::optional<std::vector<double>> learned_params;
    std::size_t evaluations_consumed = 0;
    std::size_t birth_generation = 0;
    /// Filled only when EvolutionConfig::keep_learning_history is set.
    std::vector<Sample> learning_history;
};

struct EvolutionConfig {
    std::size_t population_size = 200;
    std::size_t offspring_count = 200;
    std::size_t tournament_size = 20;
    SurvivorMode survivor_mode = SurvivorMode::Elitist;
    /// 0 disables learning; otherwise the per-robot Bayesian-optimization budget.
    std::size_t learning_budget = 0;
    std::size_t generations = 166;
    std::uint64_t master_seed = 0;
    std::optional<std::uint64_t> evaluation_ceiling;
    std::size_t min_initial_modules = 15;
    std::size_t max_initial_modules = kMaxModules;
    MutationConfig mutation;
    LearnerOptions learner;
    bool keep_learning_history = false;
    /// Evaluation threads. Never changes results.
    std::size_t jobs = 1;
};

/// Throws std::invalid_argument describing the first broken constraint.
void validate_config(const EvolutionConfig& cfg);

struct GenerationRecord {
    std::size_t generation = 0;
    std::uint64_t cumulative_evaluations = 0;
    double best_so_far = 0.0;
    double best_in_population = 0.0;
    double mean_fitness = 0.0;
    double diversity = 0.0;
};

struct RunLog {
    std::vector<GenerationRecord> rows;
    std::vector<Individual> final_population;
    Individual best_ever;
};

/// Thrown by evolve() when an evaluation fails; holds the rows recorded so far.
class EvolutionAborted : public std::runtime_error {
public:
    EvolutionAborted(const std::string& what, RunLog partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const RunLog& partial() const { return partial_; }

private:
    RunLog partial_;
};

struct GenerationSnapshot {
    std::size_t generation = 0;
    std::span<const Individual> parents;
    std::span<const Individual> offspring;
    std::span<const Individual> survivors;
};

using GenerationObserver = std::function<void(const GenerationSnapshot&)>;

/// k distinct individuals drawn without replacement; the fittest wins, ties
/// to the smaller id.
const Individual& tournament_select(std::span<const Individual> pop, std::size_t k, Random& rng);

/// Asexual reproduction: each child is a mutated copy of a tournament winner's
/// genotype. Learned parameters are never inherited.
std::vector<Genotype> produce_offspring(std::span<const Individual> pop, std::size_t n, Random& rng,
                                        const EvolutionConfig& cfg);

std::vector<Individual> survivor_select(std::span<const Individual> parents,
                                        std::span<const Individual> offspring, const EvolutionConfig& cfg);

/// One simulation without learning; a warm-started optimize() run otherwise.
Individual evaluate_individual(Genotype g, std::uint64_t id, std::size_t birth_generation,
                               const EvolutionConfig& cfg, const Evaluator& evaluator, Random& rng);

/// Stream used to evaluate individual `id` of a run.
Random evaluation_stream(std::uint64_t master_seed, std::uint64_t id);

RunLog evolve(const EvolutionConfig& cfg, const Evaluator& evaluator, const GenerationObserver& observer = {});

/// Evaluations after `generation` generations when every robot spends the same
/// cost (1, or the learning budget).
std::uint64_t closed_form_evaluations(std::size_t generation, const EvolutionConfig& cfg);

/// Sum of evaluations_consumed over the population.
std::uint64_t total_evaluations(std::span<const Individual> individuals);

/// Extra learning on a finished population, warm-started from each
/// individual's best parameters. Individual i uses a stream derived from
/// (seed, id), so `jobs` does not affect the result.
std::vector<Individual> posthoc_learning_phase(std::span<const Individual> pop, std::size_t budget,
                                               const Evaluator& evaluator, std::uint64_t seed,
                                               const LearnerOptions& options = {}, std::size_t jobs = 1);

}  // namespace morphevo
