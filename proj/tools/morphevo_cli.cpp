// morphevo: command-line front end for running and analysing experiments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "morphevo/genotype_json.hpp"
#include "morphevo/harness.hpp"
#include "morphevo/phenotype.hpp"

namespace fs = std::filesystem;
using namespace morphevo;

namespace {

struct RunArgs {
    std::string config;
    bool desk_scale = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::size_t jobs = 1;
};

struct LearnArgs {
    std::string archive;
    std::size_t budget = 500;
    std::uint64_t seed = 1;
    std::string out;
    std::size_t jobs = 1;
};

struct CalibrateArgs {
    std::size_t robots = 100;
    std::size_t max_budget = 500;
    std::uint64_t seed = 1;
    std::string out = "calibration";
    std::string config;
    std::size_t jobs = 1;
};

struct StatsArgs {
    std::vector<std::string> inputs;
    std::string metric = "best_so_far";
    std::optional<std::size_t> generation;
    std::optional<std::uint64_t> evaluations;
    std::string out;
};

struct ExportArgs {
    std::vector<std::string> inputs;
    std::string out = "tidy";
};

int cmd_run(const RunArgs& a) {
    ExperimentConfig cfg = a.config.empty() ? ExperimentConfig{} : load_config(a.config);
    if (a.desk_scale) apply_desk_scale(cfg);
    if (a.seed) cfg.seed_base = *a.seed;
    if (a.out) cfg.output_dir = *a.out;
    RunOptions options;
    options.jobs = a.jobs;
    options.progress = &std::cerr;
    return run_experiment(cfg, options);
}

int cmd_learn(const LearnArgs& a) {
    const fs::path out = a.out.empty() ? fs::path(a.archive) / "learned" : fs::path(a.out);
    const auto summaries = learn_phase(a.archive, a.budget, a.seed, out, a.jobs);
    std::cout << "run_id,best_before,best_after,decreased\n";
    for (const auto& s : summaries) {
        std::cout << s.run_id << ',' << format_double(s.best_before) << ',' << format_double(s.best_after) << ','
                  << s.decreased << '\n';
    }
    return 0;
}

int cmd_calibrate(const CalibrateArgs& a) {
    const ExperimentConfig cfg = a.config.empty() ? ExperimentConfig{} : load_config(a.config);
    const ProxyEvaluator evaluator(cfg.terrain, cfg.sim);
    const auto report = calibrate(a.robots, a.max_budget, a.seed, evaluator, cfg.evolution.learner, a.jobs);
    fs::create_directories(a.out);
    {
        std::ofstream out(fs::path(a.out) / "calibration.csv", std::ios::binary);
        write_calibration_csv(out, report.result);
    }
    std::ofstream history(fs::path(a.out) / "calibration_history.csv", std::ios::binary);
    history << "robot_id,eval_index,params...,fitness\n";
    for (std::size_t i = 0; i < report.result.runs.size(); ++i) {
        write_learning_history(history, i, report.result.runs[i].history);
    }
    const auto& f = report.result.mean_fraction;
    std::cerr << "robots used: " << report.result.robots_used << " of " << report.robots << '\n';
    if (f.size() >= 30) std::cerr << "fraction of potential at budget 30: " << format_double(f[29]) << '\n';
    return 0;
}

int cmd_stats(const StatsArgs& a) {
    const std::vector<fs::path> inputs(a.inputs.begin(), a.inputs.end());
    const ComparisonAxis axis{a.generation, a.evaluations};
    const auto comparisons = compare_runs(inputs, metric_from_string(a.metric), axis);
    if (a.out.empty()) {
        write_comparisons_csv(std::cout, comparisons);
    } else {
        std::ofstream out(a.out, std::ios::binary);
        write_comparisons_csv(out, comparisons);
    }
    return 0;
}

int cmd_export(const ExportArgs& a) {
    const std::vector<fs::path> inputs(a.inputs.begin(), a.inputs.end());
    export_tidy(inputs, a.out);
    return 0;
}

int cmd_validate(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "cannot open " << path << '\n';
        return 1;
    }
    const Genotype g = genotype_from_json(nlohmann::json::parse(in));
    const auto violations = validate(g);
    if (violations.empty()) {
        const Phenotype ph = expand_phenotype(g);
        std::cout << "valid: " << module_count(g) << " modules, " << ph.param_dimension() << " parameters\n";
        return 0;
    }
    for (const auto& v : violations) std::cout << "invalid: " << v.message << '\n';
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Morphology evolution with and without controller learning"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run the experiment grid");
    run_cmd->add_option("--config", run.config, "Config file (key = value lines)")->check(CLI::ExistingFile);
    run_cmd->add_flag("--desk-scale", run.desk_scale, "Small preset for quick runs");
    run_cmd->add_option("--seed", run.seed, "Override seed_base");
    run_cmd->add_option("--out", run.out, "Override output_dir");
    run_cmd->add_option("--jobs", run.jobs, "Worker threads")->check(CLI::PositiveNumber);

    LearnArgs learn;
    auto* learn_cmd = app.add_subcommand("learn-phase", "Extra learning on archived populations");
    learn_cmd->add_option("--archive", learn.archive, "Run directory or archive directory")->required();
    learn_cmd->add_option("--budget", learn.budget, "Evaluations per individual")->check(CLI::PositiveNumber);
    learn_cmd->add_option("--seed", learn.seed, "Seed");
    learn_cmd->add_option("--out", learn.out, "Output directory (default <archive>/learned)");
    learn_cmd->add_option("--jobs", learn.jobs, "Worker threads")->check(CLI::PositiveNumber);

    CalibrateArgs cal;
    auto* cal_cmd = app.add_subcommand("calibrate", "Learning-budget calibration on random robots");
    cal_cmd->add_option("--robots", cal.robots, "Number of random robots")->check(CLI::PositiveNumber);
    cal_cmd->add_option("--max-budget", cal.max_budget, "Evaluations per robot")->check(CLI::PositiveNumber);
    cal_cmd->add_option("--seed", cal.seed, "Seed");
    cal_cmd->add_option("--out", cal.out, "Output directory");
    cal_cmd->add_option("--config", cal.config, "Config file for terrain, simulator and learner")
        ->check(CLI::ExistingFile);
    cal_cmd->add_option("--jobs", cal.jobs, "Worker threads")->check(CLI::PositiveNumber);

    StatsArgs stats;
    auto* stats_cmd = app.add_subcommand("stats", "Mann-Whitney comparison of run groups");
    stats_cmd->add_option("--inputs", stats.inputs, "RunLog CSVs or directories")->required();
    stats_cmd->add_option("--metric", stats.metric, "best_so_far or diversity")
        ->check(CLI::IsMember({"best_so_far", "diversity"}));
    auto* gen_opt = stats_cmd->add_option("--generation", stats.generation, "Compare at this generation");
    stats_cmd->add_option("--evaluations", stats.evaluations, "Compare at this evaluation count")
        ->excludes(gen_opt);
    stats_cmd->add_option("--out", stats.out, "Output CSV (default stdout)");

    ExportArgs exp;
    auto* export_cmd = app.add_subcommand("export", "Tidy long-format CSV for plotting");
    export_cmd->add_option("--inputs", exp.inputs, "RunLog CSVs or directories")->required();
    export_cmd->add_option("--out", exp.out, "Output directory");

    std::string genotype_file;
    auto* validate_cmd = app.add_subcommand("validate", "Check a genotype JSON file");
    validate_cmd->add_option("--genotype", genotype_file, "Genotype JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*learn_cmd) return cmd_learn(learn);
        if (*cal_cmd) return cmd_calibrate(cal);
        if (*stats_cmd) return cmd_stats(stats);
        if (*export_cmd) return cmd_export(exp);
        if (*validate_cmd) return cmd_validate(genotype_file);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
