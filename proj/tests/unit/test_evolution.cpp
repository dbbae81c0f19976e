#include <doctest.h>

#include <algorithm>
#include <set>

#include "morphevo/evolution.hpp"
#include "morphevo/phenotype.hpp"
#include "oracles.hpp"

using namespace morphevo;

namespace {

// Cheap deterministic fitness: depends on structure and parameters, no simulation.
class StubEvaluator final : public Evaluator {
protected:
    double do_evaluate(const Phenotype& ph, std::span<const double> x) const override {
        double s = 0.1 * static_cast<double>(ph.modules.size());
        for (std::size_t i = 0; i < x.size(); ++i) s += (i % 2 == 0 ? 1.0 : -0.5) * x[i];
        return s;
    }
};

// The first `good` calls score by StubEvaluator's rule; every later call scores 0.
class FadingEvaluator final : public Evaluator {
public:
    explicit FadingEvaluator(std::uint64_t good) : good_(good) {}

protected:
    double do_evaluate(const Phenotype& ph, std::span<const double> x) const override {
        if (calls() > good_) return 0.0;
        return 1.0 + 0.1 * static_cast<double>(ph.modules.size()) + (x.empty() ? 0.0 : x[0]);
    }

private:
    std::uint64_t good_;
};

class FailingEvaluator final : public Evaluator {
protected:
    double do_evaluate(const Phenotype&, std::span<const double>) const override {
        if (calls() > 25) throw std::runtime_error("sim crashed");
        return 1.0;
    }
};

EvolutionConfig small(SurvivorMode mode, std::size_t budget = 0) {
    EvolutionConfig c;
    c.population_size = 12;
    c.offspring_count = 12;
    c.tournament_size = 3;
    c.generations = 6;
    c.survivor_mode = mode;
    c.learning_budget = budget;
    c.master_seed = 99;
    c.learner.n_candidates = 64;
    return c;
}

std::vector<Individual> ranked_population(std::size_t n) {
    std::vector<Individual> pop(n);
    for (std::size_t i = 0; i < n; ++i) {
        pop[i].id = i;
        pop[i].fitness = static_cast<double>((i * 7) % n);  // a permutation of 0..n-1
    }
    return pop;
}

}  // namespace

TEST_CASE("tournament edge cases") {
    auto pop = ranked_population(10);
    Random rng(81);
    const auto best = std::max_element(pop.begin(), pop.end(),
                                       [](const auto& a, const auto& b) { return a.fitness < b.fitness; });
    for (int i = 0; i < 20; ++i) CHECK(tournament_select(pop, 10, rng).id == best->id);

    std::vector<int> hits(10, 0);
    for (int i = 0; i < 20000; ++i) ++hits[tournament_select(pop, 1, rng).id];
    for (int h : hits) CHECK(std::abs(h - 2000) < 200);

    pop[3].fitness = pop[8].fitness = 100.0;
    for (int i = 0; i < 20; ++i) CHECK(tournament_select(pop, 10, rng).id == 3);
    CHECK_THROWS(tournament_select(pop, 11, rng));
    CHECK_THROWS(tournament_select(pop, 0, rng));
}

TEST_CASE("tournament frequencies match the rank formula") {
    const std::size_t n = 10, k = 3;
    const auto pop = ranked_population(n);
    Random rng(82);
    std::vector<double> freq(n, 0.0);
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) freq[tournament_select(pop, k, rng).id] += 1.0 / trials;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return pop[a].fitness > pop[b].fitness; });
    for (std::size_t r = 0; r < n; ++r) {
        const double want = oracle::tournament_win_probability(n, k, r + 1);
        CHECK(std::abs(freq[order[r]] - want) < 0.006);
        if (r > 0) CHECK(freq[order[r]] <= freq[order[r - 1]] + 0.006);
    }
}

TEST_CASE("offspring are valid mutants and deterministic") {
    Random init(83);
    std::vector<Individual> pop(20);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        pop[i].id = i;
        pop[i].genotype = random_genotype(init, 15, 20);
        pop[i].fitness = init.uniform();
        pop[i].learned_params = std::vector<double>(encode_params(pop[i].genotype).size(), 0.123);
    }
    EvolutionConfig cfg = small(SurvivorMode::Elitist);
    Random a(84), b(84);
    const auto kids = produce_offspring(pop, 20, a, cfg);
    CHECK(kids == produce_offspring(pop, 20, b, cfg));
    CHECK(kids.size() == 20);
    for (const auto& k : kids) {
        CHECK(validate(k).empty());
        const bool copy = std::any_of(pop.begin(), pop.end(), [&](const auto& p) { return p.genotype == k; });
        CHECK_FALSE(copy);
        // Learned parameters are never written back.
        for (double v : encode_params(k)) CHECK(v != 0.123);
    }
}

TEST_CASE("survivor selection") {
    auto parents = ranked_population(5);
    std::vector<Individual> kids(5);
    for (std::size_t i = 0; i < 5; ++i) {
        kids[i].id = 10 + i;
        kids[i].fitness = -1.0;
    }
    EvolutionConfig cfg;
    cfg.population_size = cfg.offspring_count = 5;

    cfg.survivor_mode = SurvivorMode::Generational;
    auto gen = survivor_select(parents, kids, cfg);
    REQUIRE(gen.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(gen[i].id == kids[i].id);

    cfg.survivor_mode = SurvivorMode::Elitist;
    auto eli = survivor_select(parents, kids, cfg);
    std::set<std::uint64_t> ids;
    for (const auto& s : eli) ids.insert(s.id);
    CHECK(ids == std::set<std::uint64_t>{0, 1, 2, 3, 4});

    kids[2].fitness = 100.0;
    kids[4].fitness = parents[3].fitness;  // tie for the last place: smaller id wins
    eli = survivor_select(parents, kids, cfg);
    REQUIRE(parents[3].fitness == 1.0);
    CHECK(eli.front().id == 12);
    CHECK(std::none_of(eli.begin(), eli.end(), [](const auto& s) { return s.id == 14; }));
    CHECK(std::any_of(eli.begin(), eli.end(), [](const auto& s) { return s.id == 3; }));
    CHECK(std::none_of(eli.begin(), eli.end(), [](const auto& s) { return s.id == 0; }));
}

TEST_CASE("evaluate_individual accounting") {
    StubEvaluator ev;
    Random rng(85);
    const Genotype g = random_genotype(rng, 15, 20);
    REQUIRE(distinct_joint_count(g) > 0);

    EvolutionConfig none = small(SurvivorMode::Elitist, 0);
    auto ind = evaluate_individual(g, 7, 0, none, ev, rng);
    CHECK(ind.evaluations_consumed == 1);
    CHECK(ind.id == 7);
    CHECK_FALSE(ind.learned_params.has_value());

    EvolutionConfig learn = small(SurvivorMode::Elitist, 30);
    ev.reset_calls();
    ind = evaluate_individual(g, 8, 0, learn, ev, rng);
    CHECK(ind.evaluations_consumed == 30);
    CHECK(ev.calls() == 30);
    REQUIRE(ind.learned_params.has_value());

    Genotype blocks;
    blocks.root.attach(0, GenotypeNode::block());
    ev.reset_calls();
    ind = evaluate_individual(blocks, 9, 0, learn, ev, rng);
    CHECK(ind.evaluations_consumed == 1);
    CHECK(ev.calls() == 1);

    FailingEvaluator bad;
    for (int i = 0; i < 25; ++i) bad.evaluate(expand_phenotype(g), encode_params(g));
    try {
        evaluate_individual(g, 42, 0, none, bad, rng);
        FAIL("expected failure");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("individual 42") != std::string::npos);
    }
}

TEST_CASE("zero generations record only the initial population") {
    StubEvaluator ev;
    auto cfg = small(SurvivorMode::Elitist);
    cfg.generations = 0;
    const RunLog log = evolve(cfg, ev);
    REQUIRE(log.rows.size() == 1);
    CHECK(log.rows[0].generation == 0);
    CHECK(log.rows[0].cumulative_evaluations == cfg.population_size);
    CHECK(log.final_population.size() == cfg.population_size);
}

TEST_CASE("selection invariants over a run") {
    for (auto mode : {SurvivorMode::Elitist, SurvivorMode::Generational}) {
        for (std::size_t budget : {std::size_t{0}, std::size_t{4}}) {
            StubEvaluator ev;
            auto cfg = small(mode, budget);
            bool generational_ok = true;
            const RunLog log = evolve(cfg, ev, [&](const GenerationSnapshot& s) {
                if (s.generation == 0 || mode != SurvivorMode::Generational) return;
                std::set<std::uint64_t> a, b;
                for (const auto& o : s.offspring) a.insert(o.id);
                for (const auto& o : s.survivors) b.insert(o.id);
                generational_ok &= a == b;
            });
            CHECK(generational_ok);
            REQUIRE(log.rows.size() == cfg.generations + 1);
            for (std::size_t g = 1; g < log.rows.size(); ++g) {
                const auto& prev = log.rows[g - 1];
                const auto& cur = log.rows[g];
                CHECK(cur.best_so_far >= prev.best_so_far);
                CHECK(cur.cumulative_evaluations > prev.cumulative_evaluations);
                if (mode == SurvivorMode::Elitist) CHECK(cur.best_in_population >= prev.best_in_population);
            }
            CHECK(log.rows.back().cumulative_evaluations == ev.calls());
            CHECK(log.final_population.size() == cfg.population_size);
            CHECK(log.best_ever.fitness == log.rows.back().best_so_far);
        }
    }
}

TEST_CASE("best_so_far keeps discarded individuals") {
    auto cfg = small(SurvivorMode::Generational);
    cfg.tournament_size = 2;
    FadingEvaluator ev(cfg.population_size);
    const RunLog log = evolve(cfg, ev);
    const double initial_best = log.rows[0].best_in_population;
    CHECK(initial_best > 0.0);
    for (std::size_t g = 1; g < log.rows.size(); ++g) {
        CHECK(log.rows[g].best_so_far == initial_best);
        CHECK(log.rows[g].best_in_population == 0.0);
    }
}

TEST_CASE("closed-form evaluation counts") {
    EvolutionConfig full_scale;
    full_scale.population_size = full_scale.offspring_count = 200;
    CHECK(closed_form_evaluations(2500, full_scale) == 500200);
    full_scale.learning_budget = 30;
    CHECK(closed_form_evaluations(1, full_scale) == 12000);

    StubEvaluator ev;
    auto cfg = small(SurvivorMode::Elitist, 5);
    const RunLog log = evolve(cfg, ev);
    for (const auto& row : log.rows) CHECK(row.cumulative_evaluations <= closed_form_evaluations(row.generation, cfg));
    CHECK(log.rows.back().cumulative_evaluations == ev.calls());
}

TEST_CASE("evaluation ceiling stops the run") {
    StubEvaluator ev;
    auto cfg = small(SurvivorMode::Elitist);
    cfg.generations = 100;
    cfg.evaluation_ceiling = 50;
    const RunLog log = evolve(cfg, ev);
    CHECK(log.rows.back().cumulative_evaluations >= 50);
    CHECK(log.rows[log.rows.size() - 2].cumulative_evaluations < 50);
}

TEST_CASE("runs are identical regardless of thread count") {
    for (std::size_t budget : {std::size_t{0}, std::size_t{3}}) {
        StubEvaluator e1, e4;
        auto cfg = small(SurvivorMode::Elitist, budget);
        const RunLog a = evolve(cfg, e1);
        cfg.jobs = 4;
        const RunLog b = evolve(cfg, e4);
        REQUIRE(a.rows.size() == b.rows.size());
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            CHECK(a.rows[i].best_so_far == b.rows[i].best_so_far);
            CHECK(a.rows[i].mean_fitness == b.rows[i].mean_fitness);
            CHECK(a.rows[i].diversity == b.rows[i].diversity);
            CHECK(a.rows[i].cumulative_evaluations == b.rows[i].cumulative_evaluations);
        }
        for (std::size_t i = 0; i < a.final_population.size(); ++i) {
            CHECK(a.final_population[i].genotype == b.final_population[i].genotype);
        }
    }
}

TEST_CASE("evaluator failure aborts with the rows so far") {
    FailingEvaluator ev;
    auto cfg = small(SurvivorMode::Elitist);
    try {
        evolve(cfg, ev);
        FAIL("expected abort");
    } catch (const EvolutionAborted& e) {
        CHECK(e.partial().rows.size() == 2);
    }
}

TEST_CASE("config validation") {
    auto cfg = small(SurvivorMode::Generational);
    cfg.offspring_count = 5;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg = small(SurvivorMode::Elitist);
    cfg.tournament_size = 13;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg.tournament_size = 0;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    CHECK(survivor_mode_from_string("generational") == SurvivorMode::Generational);
    CHECK_THROWS(survivor_mode_from_string("steady"));
}

TEST_CASE("post-hoc learning never lowers fitness") {
    StubEvaluator ev;
    const RunLog log = evolve(small(SurvivorMode::Elitist), ev);
    const auto one = posthoc_learning_phase(log.final_population, 1, ev, 5);
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].fitness == log.final_population[i].fitness);
        CHECK(one[i].evaluations_consumed == log.final_population[i].evaluations_consumed + 1);
    }
    LearnerOptions opt;
    opt.n_candidates = 64;
    const auto more = posthoc_learning_phase(log.final_population, 10, ev, 5, opt, 1);
    const auto threaded = posthoc_learning_phase(log.final_population, 10, ev, 5, opt, 3);
    for (std::size_t i = 0; i < more.size(); ++i) {
        CHECK(more[i].fitness >= log.final_population[i].fitness);
        CHECK(more[i].fitness == threaded[i].fitness);
    }
    CHECK_THROWS(posthoc_learning_phase(log.final_population, 0, ev, 5));
}
