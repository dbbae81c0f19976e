#include "morphevo/evolution.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "morphevo/diversity.hpp"
#include "morphevo/parallel.hpp"
#include "morphevo/phenotype.hpp"

namespace morphevo {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kSelectionStream = 0;
constexpr std::uint64_t kEvaluationStream = 1;
constexpr std::uint64_t kPosthocStream = 2;

bool fitter(const Individual& a, const Individual& b) {
    if (a.fitness != b.fitness) return a.fitness > b.fitness;
    return a.id < b.id;
}

GenerationRecord summarize(std::size_t generation, std::uint64_t evaluations, double best_so_far,
                           std::span<const Individual> pop) {
    GenerationRecord r;
    r.generation = generation;
    r.cumulative_evaluations = evaluations;
    r.best_so_far = best_so_far;
    r.best_in_population = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    std::vector<Genotype> genotypes;
    genotypes.reserve(pop.size());
    for (const auto& ind : pop) {
        r.best_in_population = std::max(r.best_in_population, ind.fitness);
        sum += ind.fitness;
        genotypes.push_back(ind.genotype);
    }
    r.mean_fitness = sum / static_cast<double>(pop.size());
    r.diversity = genotypes.size() >= 2 ? population_diversity(genotypes) : 0.0;
    return r;
}

}  // namespace

std::string_view to_string(SurvivorMode mode) {
    return mode == SurvivorMode::Elitist ? "elitist" : "generational";
}

SurvivorMode survivor_mode_from_string(std::string_view name) {
    if (name == "elitist") return SurvivorMode::Elitist;
    if (name == "generational") return SurvivorMode::Generational;
    throw std::invalid_argument("unknown survivor mode '" + std::string(name) + "'");
}

void validate_config(const EvolutionConfig& cfg) {
    if (cfg.population_size < 1 || cfg.offspring_count < 1 || cfg.tournament_size < 1) {
        throw std::invalid_argument("population, offspring and tournament sizes must be >= 1");
    }
    if (cfg.tournament_size > cfg.population_size) {
        throw std::invalid_argument("tournament_size must not exceed population_size");
    }
    if (cfg.survivor_mode == SurvivorMode::Generational && cfg.offspring_count != cfg.population_size) {
        throw std::invalid_argument("generational replacement needs offspring_count == population_size");
    }
    if (cfg.min_initial_modules < 1 || cfg.min_initial_modules > cfg.max_initial_modules ||
        cfg.max_initial_modules > cfg.mutation.max_modules) {
        throw std::invalid_argument("initial module range must satisfy 1 <= min <= max <= cap");
    }
}

const Individual& tournament_select(std::span<const Individual> pop, std::size_t k, Random& rng) {
    if (k < 1 || k > pop.size()) {
        throw std::invalid_argument("tournament_select: need 1 <= k <= population size");
    }
    std::vector<std::size_t> index(pop.size());
    std::iota(index.begin(), index.end(), 0);
    std::size_t winner = pop.size();
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(index.size() - i));
        std::swap(index[i], index[j]);
        if (winner == pop.size() || fitter(pop[index[i]], pop[winner])) {
            winner = index[i];
        }
    }
    return pop[winner];
}

std::vector<Genotype> produce_offspring(std::span<const Individual> pop, std::size_t n, Random& rng,
                                        const EvolutionConfig& cfg) {
    if (pop.empty()) {
        throw std::invalid_argument("produce_offspring: empty population");
    }
    std::vector<Genotype> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Individual& parent = tournament_select(pop, cfg.tournament_size, rng);
        out.push_back(mutate(parent.genotype, rng, cfg.mutation));
    }
    return out;
}

std::vector<Individual> survivor_select(std::span<const Individual> parents,
                                        std::span<const Individual> offspring, const EvolutionConfig& cfg) {
    if (cfg.survivor_mode == SurvivorMode::Generational) {
        return {offspring.begin(), offspring.end()};
    }
    std::vector<Individual> pool(parents.begin(), parents.end());
    pool.insert(pool.end(), offspring.begin(), offspring.end());
    const std::size_t keep = std::min(cfg.population_size, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), fitter);
    pool.resize(keep);
    return pool;
}

Random evaluation_stream(std::uint64_t master_seed, std::uint64_t id) {
    return Random(derive_seed(master_seed, kEvaluationStream, id));
}

Individual evaluate_individual(Genotype g, std::uint64_t id, std::size_t birth_generation,
                               const EvolutionConfig& cfg, const Evaluator& evaluator, Random& rng) {
    Individual ind;
    ind.id = id;
    ind.birth_generation = birth_generation;
    const Phenotype ph = expand_phenotype(g);
    const std::vector<double> params = encode_params(g);
    ind.genotype = std::move(g);
    try {
        if (cfg.learning_budget == 0) {
            ind.fitness = evaluator.evaluate(ph, params);
            ind.evaluations_consumed = 1;
            if (cfg.keep_learning_history) ind.learning_history.push_back({params, ind.fitness});
        } else {
            const auto objective = [&](std::span<const double> x) { return evaluator.evaluate(ph, x); };
            LearnResult r = optimize(objective, params, cfg.learning_budget, params.size(), rng, cfg.learner);
            ind.fitness = r.best_fitness;
            ind.learned_params = std::move(r.best_params);
            ind.evaluations_consumed = r.evaluations_used;
            if (cfg.keep_learning_history) ind.learning_history = std::move(r.history);
        }
    } catch (const std::exception& e) {
        throw std::runtime_error("individual " + std::to_string(id) + ": " + e.what());
    }
    return ind;
}

std::uint64_t total_evaluations(std::span<const Individual> individuals) {
    std::uint64_t total = 0;
    for (const auto& ind : individuals) {
        total += ind.evaluations_consumed;
    }
    return total;
}

std::uint64_t closed_form_evaluations(std::size_t generation, const EvolutionConfig& cfg) {
    const std::uint64_t cost = cfg.learning_budget == 0 ? 1 : cfg.learning_budget;
    return cfg.population_size * cost + static_cast<std::uint64_t>(generation) * cfg.offspring_count * cost;
}

RunLog evolve(const EvolutionConfig& cfg, const Evaluator& evaluator, const GenerationObserver& observer) {
    validate_config(cfg);
    Random rng(derive_seed(cfg.master_seed, kSelectionStream));
    RunLog log;
    std::uint64_t next_id = 0;
    std::uint64_t evaluations = 0;
    bool have_best = false;

    const auto evaluate_all = [&](std::vector<Genotype> genotypes, std::size_t generation) {
        std::vector<Individual> out(genotypes.size());
        const std::uint64_t first_id = next_id;
        next_id += genotypes.size();
        try {
            parallel_for(genotypes.size(), cfg.jobs, [&](std::size_t i) {
                const std::uint64_t id = first_id + i;
                Random stream = evaluation_stream(cfg.master_seed, id);
                out[i] = evaluate_individual(std::move(genotypes[i]), id, generation, cfg, evaluator, stream);
            });
        } catch (const std::exception& e) {
            throw EvolutionAborted(e.what(), log);
        }
        // Accounting and best-so-far happen at the barrier, in id order.
        for (const auto& ind : out) {
            evaluations += ind.evaluations_consumed;
            if (!have_best || fitter(ind, log.best_ever)) {
                log.best_ever = ind;
                have_best = true;
            }
        }
        return out;
    };

    std::vector<Genotype> initial;
    initial.reserve(cfg.population_size);
    for (std::size_t i = 0; i < cfg.population_size; ++i) {
        initial.push_back(random_genotype(rng, cfg.min_initial_modules, cfg.max_initial_modules));
    }
    std::vector<Individual> population = evaluate_all(std::move(initial), 0);
    log.rows.push_back(summarize(0, evaluations, log.best_ever.fitness, population));
    if (observer) observer({0, {}, {}, population});

    for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
        if (cfg.evaluation_ceiling && evaluations >= *cfg.evaluation_ceiling) break;
        auto children = produce_offspring(population, cfg.offspring_count, rng, cfg);
        std::vector<Individual> offspring = evaluate_all(std::move(children), gen);
        std::vector<Individual> survivors = survivor_select(population, offspring, cfg);
        if (observer) observer({gen, population, offspring, survivors});
        population = std::move(survivors);
        log.rows.push_back(summarize(gen, evaluations, log.best_ever.fitness, population));
    }
    log.final_population = std::move(population);
    return log;
}

std::vector<Individual> posthoc_learning_phase(std::span<const Individual> pop, std::size_t budget,
                                               const Evaluator& evaluator, std::uint64_t seed,
                                               const LearnerOptions& options, std::size_t jobs) {
    if (budget < 1) {
        throw std::invalid_argument("posthoc_learning_phase: budget must be >= 1");
    }
    std::vector<Individual> out(pop.begin(), pop.end());
    parallel_for(out.size(), jobs, [&](std::size_t i) {
        Individual& ind = out[i];
        const Phenotype ph = expand_phenotype(ind.genotype);
        const std::vector<double> start = ind.learned_params ? *ind.learned_params : encode_params(ind.genotype);
        Random rng(derive_seed(seed, kPosthocStream, ind.id));
        const auto objective = [&](std::span<const double> x) { return evaluator.evaluate(ph, x); };
        LearnResult r = optimize(objective, start, budget, start.size(), rng, options);
        ind.fitness = r.best_fitness;
        ind.learned_params = std::move(r.best_params);
        ind.evaluations_consumed += r.evaluations_used;
    });
    return out;
}

}  // namespace morphevo
