#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "morphevo/evolution.hpp"
#include "morphevo/fitness.hpp"
#include "morphevo/stats.hpp"

namespace morphevo {

inline constexpr std::string_view kToolVersion = "0.3.0";

// Configuration ----------------------------------------------------------------

struct Variant {
    SurvivorMode mode = SurvivorMode::Elitist;
    std::size_t learning_budget = 0;

    /// e.g. "elitist_learn0", "generational_learn30"
    std::string name() const;
    friend bool operator==(const Variant&, const Variant&) = default;
};

struct ExperimentConfig {
    std::vector<Variant> grid = {{SurvivorMode::Elitist, 0},
                                 {SurvivorMode::Generational, 0},
                                 {SurvivorMode::Elitist, 30},
                                 {SurvivorMode::Generational, 30}};
    std::size_t repetitions = 12;
    std::uint64_t seed_base = 1;
    std::filesystem::path output_dir = "results";
    std::optional<std::uint64_t> evaluation_ceiling;
    /// Population sizes, generations, mutation and learner settings shared by
    /// every variant. Survivor mode, learning budget and seed come from the grid.
    EvolutionConfig evolution;
    TerrainConfig terrain;
    SimConfig sim;
    bool write_learning_history = false;
};

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Line-oriented "key = value" text; '#' starts a comment. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Small preset: population 20, 20 offspring, 10 generations, learning budget
/// 10 where learning is on, 5 repetitions, tournament size 2.
void apply_desk_scale(ExperimentConfig& cfg);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Seed of one (variant, repetition) pair.
std::uint64_t pair_seed(std::uint64_t seed_base, std::size_t variant_index, std::size_t repetition);
std::string run_id(const Variant& v, std::size_t repetition);

EvolutionConfig pair_config(const ExperimentConfig& cfg, std::size_t variant_index, std::size_t repetition);

// Persistence ------------------------------------------------------------------

/// One RunLog CSV row, as written by run_experiment.
struct RunLogRow {
    std::string run_id;
    std::string survivor_mode;
    std::size_t learning_budget = 0;
    std::uint64_t seed = 0;
    GenerationRecord record;
};

inline constexpr std::string_view kRunLogHeader =
    "run_id,survivor_mode,learning_budget,seed,generation,cumulative_evaluations,"
    "best_so_far,best_in_population,mean_fitness,diversity_mean_ted";

/// Shortest round-trip decimal form.
std::string format_double(double v);

void write_runlog_csv(std::ostream& out, std::string_view run, const Variant& v, std::uint64_t seed,
                      std::span<const GenerationRecord> rows);
std::vector<RunLogRow> read_runlog_csv(std::istream& in);
std::vector<RunLogRow> read_runlog_csv(const std::filesystem::path& path);

nlohmann::json individual_to_json(const Individual& ind);
Individual individual_from_json(const nlohmann::json& j);
void write_archive(std::ostream& out, std::span<const Individual> individuals);
std::vector<Individual> read_archive(const std::filesystem::path& path);

/// Rows "robot_id,eval_index,<params...>,fitness"; the parameter count varies per robot.
void write_learning_history(std::ostream& out, std::uint64_t robot_id, std::span<const Sample> history);

// Commands ---------------------------------------------------------------------

struct RunOptions {
    std::size_t jobs = 1;
    std::ostream* progress = nullptr;
};

/// Runs every pending (variant, repetition) pair of the grid and returns 0 on
/// success. Layout under output_dir: manifest.json, terrain.txt,
/// runs/<run_id>.csv, archives/<run_id>.jsonl, learning/<run_id>.csv.
/// Pairs listed in the manifest whose files still exist are skipped.
int run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

struct LearnPhaseSummary {
    std::string run_id;
    std::size_t individuals = 0;
    double best_before = 0.0;
    double best_after = 0.0;
    double mean_before = 0.0;
    double mean_after = 0.0;
    std::size_t decreased = 0;  // individuals whose fitness went down
};

/// Post-hoc learning on every archive found in `archive_dir` (or its
/// archives/ subdirectory). Writes <out>/<run_id>.learned.jsonl and
/// <out>/learn_phase_summary.csv. Terrain and simulator settings come from a
/// manifest.json next to the archives when one exists.
std::vector<LearnPhaseSummary> learn_phase(const std::filesystem::path& archive_dir, std::size_t budget,
                                           std::uint64_t seed, const std::filesystem::path& out_dir,
                                           std::size_t jobs = 1);

struct CalibrationReport {
    CalibrationResult result;
    std::size_t robots = 0;
};

/// Budget calibration on `robots` random genotypes with 15-20 modules.
CalibrationReport calibrate(std::size_t robots, std::size_t max_budget, std::uint64_t seed,
                            const Evaluator& evaluator, const LearnerOptions& options = {},
                            std::size_t jobs = 1);
void write_calibration_csv(std::ostream& out, const CalibrationResult& result);

enum class Metric { BestSoFar, Diversity };
Metric metric_from_string(std::string_view name);

struct ComparisonAxis {
    std::optional<std::size_t> generation;          // value at this generation
    std::optional<std::uint64_t> evaluations;       // last row within this many evaluations
};

struct Comparison {
    std::string metric;
    std::string group_a;
    std::string group_b;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    double median_a = 0.0;
    double median_b = 0.0;
    TestResult test;
};

/// Collects RunLog CSVs from files or directories. Each input path is its own
/// set; groups are "<set>:<variant>" when several sets are given, else the
/// variant name. Every pair of groups is compared with Mann-Whitney U.
std::vector<Comparison> compare_runs(std::span<const std::filesystem::path> inputs, Metric metric,
                                     const ComparisonAxis& axis = {});
void write_comparisons_csv(std::ostream& out, std::span<const Comparison> comparisons);

/// Long-format table (one row per run, generation and metric) for plotting.
void export_tidy(std::span<const std::filesystem::path> inputs, const std::filesystem::path& out_dir);

/// RunLog CSV files named by `inputs`, expanding directories (runs/ subfolders
/// included) in sorted order.
std::vector<std::filesystem::path> collect_runlogs(std::span<const std::filesystem::path> inputs);

}  // namespace morphevo
