#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <set>

#include "morphevo/harness.hpp"
#include "morphevo/parallel.hpp"
#include "morphevo/phenotype.hpp"

namespace morphevo {

namespace fs = std::filesystem;

namespace {

struct Pair {
    std::size_t variant = 0;
    std::size_t repetition = 0;
    std::string id;
    std::uint64_t seed = 0;
};

fs::path runlog_path(const fs::path& dir, const std::string& id) { return dir / "runs" / (id + ".csv"); }
fs::path archive_path(const fs::path& dir, const std::string& id) { return dir / "archives" / (id + ".jsonl"); }
fs::path learning_path(const fs::path& dir, const std::string& id) { return dir / "learning" / (id + ".csv"); }

void write_file_atomically(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

// Manifest -------------------------------------------------------------------

struct Manifest {
    nlohmann::json config;
    std::set<std::string> completed;
};

std::optional<Manifest> load_manifest(const fs::path& path) {
    if (!fs::exists(path)) return std::nullopt;
    std::ifstream in(path);
    Manifest m;
    try {
        const auto j = nlohmann::json::parse(in);
        m.config = j.at("config");
        for (const auto& id : j.at("completed_pairs")) m.completed.insert(id.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("unreadable manifest " + path.string() + ": " + e.what());
    }
    return m;
}

std::string manifest_text(const nlohmann::json& config, const std::vector<Pair>& pairs,
                          const std::set<std::string>& completed, double wall_time) {
    nlohmann::json seeds = nlohmann::json::object();
    for (const auto& p : pairs) seeds[p.id] = p.seed;
    nlohmann::json j;
    j["config"] = config;
    j["seeds"] = seeds;
    j["completed_pairs"] = std::vector<std::string>(completed.begin(), completed.end());
    j["tool_version"] = std::string(kToolVersion);
    j["wall_time_seconds"] = wall_time;
    return j.dump(2) + "\n";
}

// Runs one pair and writes its files. Returns an error message on failure.
std::optional<std::string> run_pair(const ExperimentConfig& cfg, const Pair& pair, const Heightmap& terrain,
                                    std::size_t jobs) {
    const fs::path& dir = cfg.output_dir;
    EvolutionConfig evo = pair_config(cfg, pair.variant, pair.repetition);
    evo.jobs = jobs;
    const Variant& variant = cfg.grid[pair.variant];
    ProxyEvaluator evaluator(terrain, cfg.sim);

    std::optional<std::ofstream> history;
    if (cfg.write_learning_history) {
        history = open_output(learning_path(dir, pair.id));
        *history << "robot_id,eval_index,params...,fitness\n";
    }
    GenerationObserver observer;
    if (history) {
        observer = [&](const GenerationSnapshot& s) {
            const auto fresh = s.generation == 0 ? s.survivors : s.offspring;
            for (const auto& ind : fresh) write_learning_history(*history, ind.id, ind.learning_history);
        };
    }

    RunLog log;
    std::optional<std::string> error;
    try {
        log = evolve(evo, evaluator, observer);
    } catch (const EvolutionAborted& e) {
        log = e.partial();
        error = e.what();
    } catch (const std::exception& e) {
        error = e.what();
    }
    {
        auto out = open_output(runlog_path(dir, pair.id));
        write_runlog_csv(out, pair.id, variant, pair.seed, log.rows);
    }
    if (!error) {
        auto out = open_output(archive_path(dir, pair.id));
        write_archive(out, log.final_population);
    }
    return error;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    std::ostream* log = options.progress;
    const fs::path& dir = cfg.output_dir;
    for (std::size_t v = 0; v < cfg.grid.size(); ++v) {
        validate_config(pair_config(cfg, v, 0));
    }

    fs::create_directories(dir / "runs");
    fs::create_directories(dir / "archives");
    if (cfg.write_learning_history) fs::create_directories(dir / "learning");

    const nlohmann::json config_json = config_to_json(cfg);
    const fs::path manifest_path = dir / "manifest.json";
    std::set<std::string> completed;
    if (auto previous = load_manifest(manifest_path)) {
        if (previous->config != config_json) {
            if (log) *log << "error: " << manifest_path.string() << " was written for a different config\n";
            return 3;
        }
        completed = std::move(previous->completed);
    }

    std::vector<Pair> pairs;
    std::set<std::string> ids;
    for (std::size_t v = 0; v < cfg.grid.size(); ++v) {
        for (std::size_t r = 0; r < cfg.repetitions; ++r) {
            Pair p{v, r, run_id(cfg.grid[v], r), pair_seed(cfg.seed_base, v, r)};
            if (!ids.insert(p.id).second) {
                throw ConfigError("duplicate grid entry " + cfg.grid[v].name());
            }
            pairs.push_back(std::move(p));
        }
    }

    std::vector<Pair> pending;
    for (const auto& p : pairs) {
        const bool done = completed.contains(p.id) && fs::exists(runlog_path(dir, p.id)) &&
                          fs::exists(archive_path(dir, p.id)) &&
                          (!cfg.write_learning_history || fs::exists(learning_path(dir, p.id)));
        if (done) continue;
        completed.erase(p.id);
        pending.push_back(p);
    }
    if (log) *log << pending.size() << " of " << pairs.size() << " runs pending\n";

    const Heightmap terrain = generate_terrain(cfg.terrain);
    {
        auto out = open_output(dir / "terrain.txt");
        write_terrain(out, terrain);
    }
    const auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    };
    write_file_atomically(manifest_path, manifest_text(config_json, pairs, completed, elapsed()));

    const std::size_t jobs = std::max<std::size_t>(1, options.jobs);
    const std::size_t outer = std::min(jobs, std::max<std::size_t>(1, pending.size()));
    const std::size_t inner = std::max<std::size_t>(1, jobs / outer);
    std::mutex mutex;
    std::size_t failures = 0;
    parallel_for(pending.size(), outer, [&](std::size_t i) {
        const Pair& p = pending[i];
        std::optional<std::string> error;
        try {
            error = run_pair(cfg, p, terrain, inner);
        } catch (const std::exception& e) {
            error = e.what();
        }
        std::lock_guard lock(mutex);
        if (error) {
            ++failures;
            if (log) *log << "FAILED " << p.id << ": " << *error << '\n';
            return;
        }
        completed.insert(p.id);
        if (log) *log << "done " << p.id << '\n';
        write_file_atomically(manifest_path, manifest_text(config_json, pairs, completed, elapsed()));
    });
    write_file_atomically(manifest_path, manifest_text(config_json, pairs, completed, elapsed()));
    return failures == 0 ? 0 : 1;
}

// learn-phase ------------------------------------------------------------------

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::string_view kLearnedSuffix = ".learned.jsonl";

bool is_archive(const fs::path& p) {
    const std::string name = p.filename().string();
    return p.extension() == ".jsonl" && !name.ends_with(kLearnedSuffix);
}

}  // namespace

std::vector<LearnPhaseSummary> learn_phase(const fs::path& archive_dir, std::size_t budget, std::uint64_t seed,
                                           const fs::path& out_dir, std::size_t jobs) {
    if (budget < 1) throw std::invalid_argument("learn-phase: budget must be >= 1");
    fs::path dir = archive_dir;
    if (fs::is_directory(dir / "archives")) dir /= "archives";
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + archive_dir.string());

    ExperimentConfig cfg;
    for (const fs::path& candidate : {dir / "manifest.json", dir.parent_path() / "manifest.json"}) {
        if (auto m = load_manifest(candidate)) {
            cfg = config_from_json(m->config);
            break;
        }
    }
    const ProxyEvaluator evaluator(cfg.terrain, cfg.sim);

    std::vector<fs::path> archives;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_archive(entry.path())) archives.push_back(entry.path());
    }
    std::sort(archives.begin(), archives.end());
    if (archives.empty()) throw std::runtime_error("no archives in " + dir.string());

    fs::create_directories(out_dir);
    std::vector<LearnPhaseSummary> summaries;
    for (const auto& path : archives) {
        const std::string id = path.stem().string();
        const std::vector<Individual> before = read_archive(path);
        if (before.empty()) continue;
        const std::vector<Individual> after = posthoc_learning_phase(
            before, budget, evaluator, derive_seed(seed, fnv1a(id)), cfg.evolution.learner, jobs);

        LearnPhaseSummary s;
        s.run_id = id;
        s.individuals = before.size();
        s.best_before = s.best_after = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < before.size(); ++i) {
            s.best_before = std::max(s.best_before, before[i].fitness);
            s.best_after = std::max(s.best_after, after[i].fitness);
            s.mean_before += before[i].fitness;
            s.mean_after += after[i].fitness;
            if (after[i].fitness < before[i].fitness) ++s.decreased;
        }
        s.mean_before /= static_cast<double>(before.size());
        s.mean_after /= static_cast<double>(before.size());
        auto out = open_output(out_dir / (id + std::string(kLearnedSuffix)));
        write_archive(out, after);
        summaries.push_back(s);
    }

    auto out = open_output(out_dir / "learn_phase_summary.csv");
    out << "run_id,individuals,best_before,best_after,mean_before,mean_after,decreased\n";
    for (const auto& s : summaries) {
        out << s.run_id << ',' << s.individuals << ',' << format_double(s.best_before) << ','
            << format_double(s.best_after) << ',' << format_double(s.mean_before) << ','
            << format_double(s.mean_after) << ',' << s.decreased << '\n';
    }
    return summaries;
}

// calibrate --------------------------------------------------------------------

namespace {
constexpr std::uint64_t kCalibrationRobotStream = 0x726f626f74;
}

CalibrationReport calibrate(std::size_t robots, std::size_t max_budget, std::uint64_t seed,
                            const Evaluator& evaluator, const LearnerOptions& options, std::size_t jobs) {
    std::vector<Phenotype> bodies;
    std::vector<CalibrationTask> tasks;
    bodies.reserve(robots);
    tasks.reserve(robots);
    for (std::size_t i = 0; i < robots; ++i) {
        Random rng(derive_seed(seed, kCalibrationRobotStream, i));
        const Genotype g = random_genotype(rng, 15, kMaxModules);
        bodies.push_back(expand_phenotype(g));
        tasks.push_back({{}, encode_params(g)});
    }
    for (std::size_t i = 0; i < robots; ++i) {
        const Phenotype* body = &bodies[i];
        tasks[i].objective = [body, &evaluator](std::span<const double> x) { return evaluator.evaluate(*body, x); };
    }
    CalibrationReport report;
    report.robots = robots;
    report.result = calibrate_budget(tasks, max_budget, seed, options, jobs);
    return report;
}

void write_calibration_csv(std::ostream& out, const CalibrationResult& result) {
    out << "budget,mean_fraction_of_potential,robots_used\n";
    for (std::size_t b = 0; b < result.mean_fraction.size(); ++b) {
        out << (b + 1) << ',' << format_double(result.mean_fraction[b]) << ',' << result.robots_used << '\n';
    }
}

}  // namespace morphevo
