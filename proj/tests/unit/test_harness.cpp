#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "morphevo/genotype_json.hpp"
#include "morphevo/harness.hpp"

using namespace morphevo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("morphevo_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

ExperimentConfig desk(const fs::path& out) {
    ExperimentConfig cfg;
    apply_desk_scale(cfg);
    cfg.output_dir = out;
    return cfg;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(MORPHEVO_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
    std::istringstream in(R"(# comment
[evolution]
population_size = 40
offspring_count = 40
tournament_size = 4
generations = 3
survivor_modes = ["generational"]
learning_budgets = 0, 12
repetitions = 2
seed_base = 77
output_dir = "out # here"
evaluation_ceiling = 1000
length_scale = 0.3
terrain_amplitude = 0.01
write_learning_history = true
)");
    const ExperimentConfig cfg = parse_config(in);
    CHECK(cfg.evolution.population_size == 40);
    CHECK(cfg.evolution.tournament_size == 4);
    CHECK(cfg.repetitions == 2);
    CHECK(cfg.seed_base == 77);
    CHECK(cfg.output_dir == "out # here");
    CHECK(cfg.evaluation_ceiling == 1000u);
    CHECK(cfg.evolution.learner.kernel.length_scale == 0.3);
    CHECK(cfg.terrain.amplitude == 0.01);
    CHECK(cfg.write_learning_history);
    REQUIRE(cfg.grid.size() == 2);
    CHECK(cfg.grid[0] == Variant{SurvivorMode::Generational, 0});
    CHECK(cfg.grid[1] == Variant{SurvivorMode::Generational, 12});
}

TEST_CASE("defaults are the 2x2 grid with 12 repetitions") {
    std::istringstream empty("");
    const ExperimentConfig cfg = parse_config(empty);
    CHECK(cfg.grid.size() == 4);
    CHECK(cfg.repetitions == 12);
    CHECK(cfg.evolution.population_size == 200);
    CHECK(cfg.evolution.tournament_size == 20);
}

TEST_CASE("config errors") {
    std::istringstream unknown("populaton_size = 3\n");
    CHECK_THROWS_AS(parse_config(unknown), ConfigError);
    std::istringstream bad_number("generations = ten\n");
    CHECK_THROWS_AS(parse_config(bad_number), ConfigError);
    std::istringstream bad_mode("survivor_modes = steady\n");
    CHECK_THROWS_AS(parse_config(bad_mode), ConfigError);
    std::istringstream no_equals("generations 3\n");
    CHECK_THROWS_AS(parse_config(no_equals), ConfigError);
}

TEST_CASE("desk scale preset") {
    std::istringstream in("desk_scale = true\n");
    const ExperimentConfig cfg = parse_config(in);
    CHECK(cfg.evolution.population_size == 20);
    CHECK(cfg.evolution.offspring_count == 20);
    CHECK(cfg.evolution.generations == 10);
    CHECK(cfg.repetitions == 5);
    for (const auto& v : cfg.grid) CHECK((v.learning_budget == 0 || v.learning_budget == 10));
}

TEST_CASE("config JSON round-trips exactly") {
    std::istringstream in("length_scale = 0.1234567890123\nevaluation_ceiling = 99\nsim_dt = 0.025\n");
    const ExperimentConfig cfg = parse_config(in);
    const auto j = config_to_json(cfg);
    const auto back = config_from_json(nlohmann::json::parse(j.dump()));
    CHECK(config_to_json(back) == j);
    CHECK(back.evolution.learner.kernel.length_scale == 0.1234567890123);
    CHECK(back.evaluation_ceiling == 99u);
}

TEST_CASE("pair seeds are unique") {
    std::set<std::uint64_t> seeds;
    for (std::size_t v = 0; v < 4; ++v) {
        for (std::size_t r = 0; r < 12; ++r) seeds.insert(pair_seed(1, v, r));
    }
    CHECK(seeds.size() == 48);
    CHECK(run_id({SurvivorMode::Elitist, 30}, 3) == "elitist_learn30_rep03");
}

TEST_CASE("runlog CSV round-trip") {
    std::vector<GenerationRecord> rows = {{0, 20, 1.5, 1.5, 0.25, 3.0}, {1, 40, 2.0 / 3.0, 0.1, -0.2, 1e-17}};
    std::ostringstream out;
    write_runlog_csv(out, "x_rep00", {SurvivorMode::Generational, 10}, 42, rows);
    std::istringstream in(out.str());
    const auto back = read_runlog_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[1].record.best_so_far == 2.0 / 3.0);
    CHECK(back[1].record.diversity == 1e-17);
    CHECK(back[1].survivor_mode == "generational");
    CHECK(back[1].learning_budget == 10);
    CHECK(back[1].seed == 42);
    std::istringstream wrong("a,b\n");
    CHECK_THROWS(read_runlog_csv(wrong));
}

TEST_CASE("desk-scale experiment, resume, learn-phase, stats, export") {
    const fs::path out = scratch("desk");
    const ExperimentConfig cfg = desk(out);
    std::ostringstream progress;
    RunOptions opt;
    opt.progress = &progress;
    REQUIRE(run_experiment(cfg, opt) == 0);

    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(out / "runs")) {
        ++files;
        CHECK(line_count(e.path()) == 12);  // header + generations 0..10
    }
    CHECK(files == 20);
    CHECK(fs::exists(out / "terrain.txt"));

    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest.at("completed_pairs").size() == 20);
    CHECK(manifest.at("seeds").size() == 20);
    CHECK(manifest.at("tool_version") == std::string(kToolVersion));
    CHECK(config_to_json(config_from_json(manifest.at("config"))) == config_to_json(cfg));

    SUBCASE("resume re-runs only the missing pair") {
        const fs::path victim = out / "runs" / "elitist_learn10_rep02.csv";
        const std::string before = slurp(victim);
        const auto untouched = fs::last_write_time(out / "runs" / "elitist_learn0_rep00.csv");
        fs::remove(victim);
        std::ostringstream again;
        RunOptions o2;
        o2.progress = &again;
        REQUIRE(run_experiment(cfg, o2) == 0);
        CHECK(again.str().find("1 of 20 runs pending") != std::string::npos);
        CHECK(again.str().find("done elitist_learn10_rep02") != std::string::npos);
        CHECK(slurp(victim) == before);
        CHECK(fs::last_write_time(out / "runs" / "elitist_learn0_rep00.csv") == untouched);
    }

    SUBCASE("a different config is refused") {
        ExperimentConfig other = cfg;
        other.seed_base = 5;
        CHECK(run_experiment(other) != 0);
    }

    SUBCASE("learn-phase with budget 1 changes nothing") {
        const auto summaries = learn_phase(out, 1, 3, out / "learned1");
        CHECK(summaries.size() == 20);
        for (const auto& s : summaries) {
            CHECK(s.best_after == s.best_before);
            CHECK(s.mean_after == s.mean_before);
            CHECK(s.decreased == 0);
        }
        CHECK(fs::exists(out / "learned1" / "learn_phase_summary.csv"));
        CHECK(fs::exists(out / "learned1" / "elitist_learn0_rep00.learned.jsonl"));
    }

    SUBCASE("stats on two identical sets") {
        const fs::path copy = scratch("desk_copy");
        fs::create_directories(copy);
        fs::copy(out / "runs", copy / "runs");
        const std::vector<fs::path> inputs = {out, copy};
        for (auto metric : {Metric::BestSoFar, Metric::Diversity}) {
            const auto cmp = compare_runs(inputs, metric);
            std::size_t same = 0;
            for (const auto& c : cmp) {
                const auto va = c.group_a.substr(c.group_a.find(':'));
                const auto vb = c.group_b.substr(c.group_b.find(':'));
                if (va != vb) continue;
                ++same;
                CHECK(c.test.p_value >= 0.99);
                CHECK(c.n_a == 5);
            }
            CHECK(same == 4);
        }
        const std::vector<fs::path> one = {out};
        const auto at5 = compare_runs(one, Metric::BestSoFar, {5, std::nullopt});
        CHECK(at5.size() == 6);
        std::ostringstream table;
        write_comparisons_csv(table, at5);
        CHECK(table.str().rfind("metric,group_a,group_b", 0) == 0);
    }

    SUBCASE("tidy export") {
        const std::vector<fs::path> inputs = {out};
        export_tidy(inputs, out / "tidy");
        CHECK(line_count(out / "tidy" / "tidy_runlogs.csv") == 1 + 20 * 11 * 4);
    }
}

TEST_CASE("zero generations give initial-population-only logs") {
    const fs::path out = scratch("zero");
    ExperimentConfig cfg = desk(out);
    cfg.evolution.generations = 0;
    cfg.repetitions = 1;
    cfg.write_learning_history = true;
    REQUIRE(run_experiment(cfg) == 0);
    for (const auto& e : fs::directory_iterator(out / "runs")) CHECK(line_count(e.path()) == 2);
    // learning history: header plus one row per evaluation of the initial population
    CHECK(line_count(out / "learning" / "elitist_learn0_rep00.csv") == 1 + 20);
    CHECK(line_count(out / "learning" / "elitist_learn10_rep00.csv") <= 1 + 20 * 10);
    CHECK(read_archive(out / "archives" / "elitist_learn10_rep00.jsonl").size() == 20);
}

TEST_CASE("archive round-trip") {
    Random rng(91);
    Individual ind;
    ind.id = 17;
    ind.genotype = random_genotype(rng, 15, 20);
    ind.fitness = 1.0 / 3.0;
    ind.learned_params = encode_params(ind.genotype);
    ind.birth_generation = 4;
    ind.evaluations_consumed = 10;
    const Individual back = individual_from_json(nlohmann::json::parse(individual_to_json(ind).dump()));
    CHECK(back.id == ind.id);
    CHECK(back.genotype == ind.genotype);
    CHECK(back.fitness == ind.fitness);
    CHECK(back.learned_params == ind.learned_params);
    CHECK(back.birth_generation == 4);
    CHECK(back.evaluations_consumed == 10);
}

TEST_CASE("command line") {
    CHECK(cli("") == 2);
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("stats") == 2);
    CHECK(cli("stats --inputs x --metric speed") == 2);
    CHECK(cli("--help") == 0);

    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    {
        std::ofstream g(dir / "g.json");
        Random rng(92);
        g << genotype_to_json(random_genotype(rng, 15, 20)).dump();
        std::ofstream bad(dir / "bad.json");
        Genotype big;
        GenotypeNode* at = &big.root;
        for (int i = 0; i < 25; ++i) at = &at->attach(0, GenotypeNode::block());
        bad << genotype_to_json(big).dump();
        std::ofstream cfg(dir / "bad.cfg");
        cfg << "no_such_key = 1\n";
    }
    CHECK(cli("validate --genotype " + (dir / "g.json").string()) == 0);
    CHECK(cli("validate --genotype " + (dir / "bad.json").string()) == 1);
    CHECK(cli("run --config " + (dir / "bad.cfg").string()) == 2);
}
