#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "morphevo/harness.hpp"

namespace morphevo {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string unquote(std::string s) {
    s = trim(s);
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

// Accepts "a, b" as well as ["a", "b"].
std::vector<std::string> split_list(std::string s) {
    s = trim(s);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') throw ConfigError("unterminated list: " + s);
        s = s.substr(1, s.size() - 2);
    }
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = unquote(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    const std::string s = unquote(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("key '" + key + "': cannot parse '" + s + "' as a number");
    }
    return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string s = unquote(text);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + s + "'");
}

std::vector<Variant> make_grid(const std::vector<SurvivorMode>& modes, const std::vector<std::size_t>& budgets) {
    std::vector<Variant> grid;
    for (std::size_t b : budgets) {
        for (SurvivorMode m : modes) grid.push_back({m, b});
    }
    return grid;
}

}  // namespace

std::string Variant::name() const {
    return std::string(to_string(mode)) + "_learn" + std::to_string(learning_budget);
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::vector<SurvivorMode> modes = {SurvivorMode::Elitist, SurvivorMode::Generational};
    std::vector<std::size_t> budgets = {0, 30};
    bool desk = false;

    using Setter = std::function<void(const std::string&, const std::string&)>;
    const auto size = [](std::size_t& field) -> Setter {
        return [&field](const std::string& k, const std::string& v) { field = parse_number<std::size_t>(k, v); };
    };
    const auto real = [](double& field) -> Setter {
        return [&field](const std::string& k, const std::string& v) { field = parse_number<double>(k, v); };
    };
    const auto seed = [](std::uint64_t& field) -> Setter {
        return [&field](const std::string& k, const std::string& v) { field = parse_number<std::uint64_t>(k, v); };
    };

    EvolutionConfig& evo = cfg.evolution;
    const std::map<std::string, Setter> setters = {
        {"population_size", size(evo.population_size)},
        {"offspring_count", size(evo.offspring_count)},
        {"tournament_size", size(evo.tournament_size)},
        {"generations", size(evo.generations)},
        {"min_initial_modules", size(evo.min_initial_modules)},
        {"max_initial_modules", size(evo.max_initial_modules)},
        {"repetitions", size(cfg.repetitions)},
        {"seed_base", seed(cfg.seed_base)},
        {"output_dir", [&](const std::string&, const std::string& v) { cfg.output_dir = unquote(v); }},
        {"evaluation_ceiling",
         [&](const std::string& k, const std::string& v) {
             const std::string s = unquote(v);
             if (s.empty() || s == "none") {
                 cfg.evaluation_ceiling.reset();
             } else {
                 cfg.evaluation_ceiling = parse_number<std::uint64_t>(k, s);
             }
         }},
        {"survivor_modes",
         [&](const std::string&, const std::string& v) {
             modes.clear();
             for (const auto& item : split_list(v)) {
                 try {
                     modes.push_back(survivor_mode_from_string(item));
                 } catch (const std::invalid_argument& e) {
                     throw ConfigError(std::string("key 'survivor_modes': ") + e.what());
                 }
             }
         }},
        {"learning_budgets",
         [&](const std::string& k, const std::string& v) {
             budgets.clear();
             for (const auto& item : split_list(v)) budgets.push_back(parse_number<std::size_t>(k, item));
         }},
        {"mutation_sigma", real(evo.mutation.sigma)},
        {"mutation_max_retries", size(evo.mutation.max_retries)},
        {"max_modules", size(evo.mutation.max_modules)},
        {"length_scale", real(evo.learner.kernel.length_scale)},
        {"signal_variance", real(evo.learner.kernel.signal_variance)},
        {"observation_noise", real(evo.learner.kernel.observation_noise)},
        {"beta", real(evo.learner.beta)},
        {"n_candidates", size(evo.learner.n_candidates)},
        {"terrain_seed", seed(cfg.terrain.seed)},
        {"terrain_cells", size(cfg.terrain.cells)},
        {"terrain_cell_size", real(cfg.terrain.cell_size)},
        {"terrain_amplitude", real(cfg.terrain.amplitude)},
        {"sim_duration", real(cfg.sim.duration)},
        {"sim_dt", real(cfg.sim.dt)},
        {"sim_frequency", real(cfg.sim.frequency)},
        {"sim_max_deflection", real(cfg.sim.max_deflection)},
        {"module_length", real(cfg.sim.module_length)},
        {"write_learning_history",
         [&](const std::string& k, const std::string& v) { cfg.write_learning_history = parse_bool(k, v); }},
        {"desk_scale", [&](const std::string& k, const std::string& v) { desk = parse_bool(k, v); }},
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // A '#' inside quotes is kept.
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        const std::string text = trim(line);
        if (text.empty() || text.front() == '[') continue;  // blank line or section header
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(text.substr(0, eq));
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        it->second(key, text.substr(eq + 1));
    }
    if (modes.empty() || budgets.empty()) {
        throw ConfigError("survivor_modes and learning_budgets must not be empty");
    }
    cfg.grid = make_grid(modes, budgets);
    if (desk) apply_desk_scale(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return parse_config(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void apply_desk_scale(ExperimentConfig& cfg) {
    cfg.evolution.population_size = 20;
    cfg.evolution.offspring_count = 20;
    cfg.evolution.generations = 10;
    cfg.evolution.tournament_size = 2;
    cfg.repetitions = 5;
    for (auto& v : cfg.grid) {
        if (v.learning_budget > 0) v.learning_budget = 10;
    }
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    using nlohmann::json;
    const EvolutionConfig& e = cfg.evolution;
    json grid = json::array();
    for (const auto& v : cfg.grid) {
        grid.push_back({{"survivor_mode", std::string(to_string(v.mode))}, {"learning_budget", v.learning_budget}});
    }
    json j;
    j["grid"] = grid;
    j["repetitions"] = cfg.repetitions;
    j["seed_base"] = cfg.seed_base;
    j["output_dir"] = cfg.output_dir.generic_string();
    j["evaluation_ceiling"] = cfg.evaluation_ceiling ? json(*cfg.evaluation_ceiling) : json(nullptr);
    j["write_learning_history"] = cfg.write_learning_history;
    j["evolution"] = {
        {"population_size", e.population_size},
        {"offspring_count", e.offspring_count},
        {"tournament_size", e.tournament_size},
        {"generations", e.generations},
        {"min_initial_modules", e.min_initial_modules},
        {"max_initial_modules", e.max_initial_modules},
        {"mutation",
         {{"p_add", e.mutation.p_add},
          {"p_remove", e.mutation.p_remove},
          {"p_flip", e.mutation.p_flip},
          {"sigma", e.mutation.sigma},
          {"max_retries", e.mutation.max_retries},
          {"max_modules", e.mutation.max_modules},
          {"max_change", e.mutation.max_change}}},
        {"learner",
         {{"length_scale", e.learner.kernel.length_scale},
          {"signal_variance", e.learner.kernel.signal_variance},
          {"observation_noise", e.learner.kernel.observation_noise},
          {"n_candidates", e.learner.n_candidates},
          {"beta", e.learner.beta}}},
    };
    j["terrain"] = {{"seed", cfg.terrain.seed},
                    {"cells", cfg.terrain.cells},
                    {"cell_size", cfg.terrain.cell_size},
                    {"amplitude", cfg.terrain.amplitude}};
    j["sim"] = {{"duration", cfg.sim.duration},
                {"dt", cfg.sim.dt},
                {"max_deflection", cfg.sim.max_deflection},
                {"module_length", cfg.sim.module_length},
                {"frequency", cfg.sim.frequency},
                {"offset", cfg.sim.offset},
                {"start_x", cfg.sim.start_x},
                {"root_heading", cfg.sim.root_heading}};
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        cfg.grid.clear();
        for (const auto& v : j.at("grid")) {
            cfg.grid.push_back({survivor_mode_from_string(v.at("survivor_mode").get<std::string>()),
                                v.at("learning_budget").get<std::size_t>()});
        }
        cfg.repetitions = j.at("repetitions").get<std::size_t>();
        cfg.seed_base = j.at("seed_base").get<std::uint64_t>();
        cfg.output_dir = j.at("output_dir").get<std::string>();
        if (!j.at("evaluation_ceiling").is_null()) {
            cfg.evaluation_ceiling = j.at("evaluation_ceiling").get<std::uint64_t>();
        }
        cfg.write_learning_history = j.at("write_learning_history").get<bool>();

        const auto& e = j.at("evolution");
        EvolutionConfig& evo = cfg.evolution;
        evo.population_size = e.at("population_size").get<std::size_t>();
        evo.offspring_count = e.at("offspring_count").get<std::size_t>();
        evo.tournament_size = e.at("tournament_size").get<std::size_t>();
        evo.generations = e.at("generations").get<std::size_t>();
        evo.min_initial_modules = e.at("min_initial_modules").get<std::size_t>();
        evo.max_initial_modules = e.at("max_initial_modules").get<std::size_t>();
        const auto& m = e.at("mutation");
        evo.mutation.p_add = m.at("p_add").get<double>();
        evo.mutation.p_remove = m.at("p_remove").get<double>();
        evo.mutation.p_flip = m.at("p_flip").get<double>();
        evo.mutation.sigma = m.at("sigma").get<double>();
        evo.mutation.max_retries = m.at("max_retries").get<std::size_t>();
        evo.mutation.max_modules = m.at("max_modules").get<std::size_t>();
        evo.mutation.max_change = m.at("max_change").get<std::size_t>();
        const auto& l = e.at("learner");
        evo.learner.kernel.length_scale = l.at("length_scale").get<double>();
        evo.learner.kernel.signal_variance = l.at("signal_variance").get<double>();
        evo.learner.kernel.observation_noise = l.at("observation_noise").get<double>();
        evo.learner.n_candidates = l.at("n_candidates").get<std::size_t>();
        evo.learner.beta = l.at("beta").get<double>();

        const auto& t = j.at("terrain");
        cfg.terrain.seed = t.at("seed").get<std::uint64_t>();
        cfg.terrain.cells = t.at("cells").get<std::size_t>();
        cfg.terrain.cell_size = t.at("cell_size").get<double>();
        cfg.terrain.amplitude = t.at("amplitude").get<double>();

        const auto& s = j.at("sim");
        cfg.sim.duration = s.at("duration").get<double>();
        cfg.sim.dt = s.at("dt").get<double>();
        cfg.sim.max_deflection = s.at("max_deflection").get<double>();
        cfg.sim.module_length = s.at("module_length").get<double>();
        cfg.sim.frequency = s.at("frequency").get<double>();
        cfg.sim.offset = s.at("offset").get<double>();
        cfg.sim.start_x = s.at("start_x").get<double>();
        cfg.sim.root_heading = s.at("root_heading").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("malformed config JSON: ") + e.what());
    }
    return cfg;
}

std::uint64_t pair_seed(std::uint64_t seed_base, std::size_t variant_index, std::size_t repetition) {
    return derive_seed(seed_base, variant_index, repetition);
}

std::string run_id(const Variant& v, std::size_t repetition) {
    std::string rep = std::to_string(repetition);
    if (rep.size() < 2) rep.insert(0, 2 - rep.size(), '0');
    return v.name() + "_rep" + rep;
}

EvolutionConfig pair_config(const ExperimentConfig& cfg, std::size_t variant_index, std::size_t repetition) {
    if (variant_index >= cfg.grid.size()) {
        throw std::out_of_range("pair_config: variant index out of range");
    }
    EvolutionConfig e = cfg.evolution;
    e.survivor_mode = cfg.grid[variant_index].mode;
    e.learning_budget = cfg.grid[variant_index].learning_budget;
    e.master_seed = pair_seed(cfg.seed_base, variant_index, repetition);
    e.evaluation_ceiling = cfg.evaluation_ceiling;
    e.keep_learning_history = cfg.write_learning_history;
    return e;
}

}  // namespace morphevo
