#include <algorithm>
#include <fstream>
#include <map>

#include "morphevo/harness.hpp"

namespace morphevo {

namespace fs = std::filesystem;

namespace {

bool has_runlog_header(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    return std::getline(in, line) && line == kRunLogHeader;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double metric_value(const GenerationRecord& r, Metric m) {
    return m == Metric::BestSoFar ? r.best_so_far : r.diversity;
}

std::string_view metric_name(Metric m) { return m == Metric::BestSoFar ? "best_so_far" : "diversity"; }

// Row of one run the comparison looks at.
const RunLogRow* pick_row(std::span<const RunLogRow> rows, const ComparisonAxis& axis) {
    const RunLogRow* chosen = nullptr;
    for (const auto& row : rows) {
        if (axis.generation) {
            if (row.record.generation == *axis.generation) return &row;
        } else if (axis.evaluations) {
            if (row.record.cumulative_evaluations <= *axis.evaluations &&
                (!chosen || row.record.generation > chosen->record.generation)) {
                chosen = &row;
            }
        } else if (!chosen || row.record.generation > chosen->record.generation) {
            chosen = &row;
        }
    }
    return chosen;
}

}  // namespace

std::vector<fs::path> collect_runlogs(std::span<const fs::path> inputs) {
    std::vector<fs::path> out;
    for (const auto& input : inputs) {
        if (fs::is_regular_file(input)) {
            out.push_back(input);
            continue;
        }
        if (!fs::is_directory(input)) throw std::runtime_error("no such file or directory: " + input.string());
        std::vector<fs::path> found;
        for (const fs::path& dir : {input, input / "runs"}) {
            if (!fs::is_directory(dir)) continue;
            for (const auto& entry : fs::directory_iterator(dir)) {
                if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
                    has_runlog_header(entry.path())) {
                    found.push_back(entry.path());
                }
            }
        }
        std::sort(found.begin(), found.end());
        out.insert(out.end(), found.begin(), found.end());
    }
    return out;
}

Metric metric_from_string(std::string_view name) {
    if (name == "best_so_far") return Metric::BestSoFar;
    if (name == "diversity" || name == "diversity_mean_ted") return Metric::Diversity;
    throw std::invalid_argument("unknown metric '" + std::string(name) + "' (best_so_far or diversity)");
}

std::vector<Comparison> compare_runs(std::span<const fs::path> inputs, Metric metric, const ComparisonAxis& axis) {
    if (axis.generation && axis.evaluations) {
        throw std::invalid_argument("compare_runs: choose either a generation or an evaluation count");
    }
    std::map<std::string, std::vector<double>> groups;
    std::map<std::string, std::size_t> label_uses;
    for (const auto& input : inputs) {
        std::string set = input.generic_string();
        const std::size_t uses = ++label_uses[set];
        if (uses > 1) set += "#" + std::to_string(uses);
        const fs::path one[] = {input};
        for (const auto& file : collect_runlogs(one)) {
            const auto rows = read_runlog_csv(file);
            std::map<std::string, std::vector<RunLogRow>> runs;
            for (const auto& r : rows) runs[r.run_id].push_back(r);
            for (const auto& [id, run] : runs) {
                const RunLogRow* row = pick_row(run, axis);
                if (!row) {
                    throw std::runtime_error(file.string() + ": run " + id + " has no row on the requested axis");
                }
                const std::string variant = row->survivor_mode + "_learn" + std::to_string(row->learning_budget);
                const std::string group = inputs.size() > 1 ? set + ":" + variant : variant;
                groups[group].push_back(metric_value(row->record, metric));
            }
        }
    }

    std::vector<Comparison> out;
    for (auto a = groups.begin(); a != groups.end(); ++a) {
        for (auto b = std::next(a); b != groups.end(); ++b) {
            Comparison c;
            c.metric = metric_name(metric);
            c.group_a = a->first;
            c.group_b = b->first;
            c.n_a = a->second.size();
            c.n_b = b->second.size();
            c.median_a = median(a->second);
            c.median_b = median(b->second);
            c.test = mann_whitney_u(a->second, b->second);
            out.push_back(std::move(c));
        }
    }
    return out;
}

void write_comparisons_csv(std::ostream& out, std::span<const Comparison> comparisons) {
    out << "metric,group_a,group_b,n_a,n_b,median_a,median_b,u_statistic,p_value,method,degenerate\n";
    for (const auto& c : comparisons) {
        out << c.metric << ',' << c.group_a << ',' << c.group_b << ',' << c.n_a << ',' << c.n_b << ','
            << format_double(c.median_a) << ',' << format_double(c.median_b) << ','
            << format_double(c.test.u_statistic) << ',' << format_double(c.test.p_value) << ','
            << (c.test.method == PValueMethod::Exact ? "exact" : "normal") << ',' << (c.test.degenerate ? 1 : 0)
            << '\n';
    }
}

void export_tidy(std::span<const fs::path> inputs, const fs::path& out_dir) {
    const auto files = collect_runlogs(inputs);
    if (files.empty()) throw std::runtime_error("export: no RunLog CSVs found");
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "tidy_runlogs.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (out_dir / "tidy_runlogs.csv").string());
    out << "run_id,survivor_mode,learning_budget,seed,generation,cumulative_evaluations,metric,value\n";
    for (const auto& file : files) {
        for (const auto& r : read_runlog_csv(file)) {
            const std::pair<std::string_view, double> metrics[] = {
                {"best_so_far", r.record.best_so_far},
                {"best_in_population", r.record.best_in_population},
                {"mean_fitness", r.record.mean_fitness},
                {"diversity_mean_ted", r.record.diversity},
            };
            for (const auto& [name, value] : metrics) {
                out << r.run_id << ',' << r.survivor_mode << ',' << r.learning_budget << ',' << r.seed << ','
                    << r.record.generation << ',' << r.record.cumulative_evaluations << ',' << name << ','
                    << format_double(value) << '\n';
            }
        }
    }
}

}  // namespace morphevo
