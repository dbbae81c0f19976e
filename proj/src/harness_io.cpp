#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include "morphevo/genotype_json.hpp"
#include "morphevo/harness.hpp"

namespace morphevo {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T field(const std::vector<std::string>& f, std::size_t i, std::size_t line_no) {
    T value{};
    const std::string& s = f[i];
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::runtime_error("runlog line " + std::to_string(line_no) + ": bad value '" + s + "'");
    }
    return value;
}

nlohmann::json number_or_string(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

double number_from(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        double v = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), v);
        return v;
    }
    return j.get<double>();
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
    return {buf, ptr};
}

void write_runlog_csv(std::ostream& out, std::string_view run, const Variant& v, std::uint64_t seed,
                      std::span<const GenerationRecord> rows) {
    out << kRunLogHeader << '\n';
    for (const auto& r : rows) {
        out << run << ',' << to_string(v.mode) << ',' << v.learning_budget << ',' << seed << ',' << r.generation
            << ',' << r.cumulative_evaluations << ',' << format_double(r.best_so_far) << ','
            << format_double(r.best_in_population) << ',' << format_double(r.mean_fitness) << ','
            << format_double(r.diversity) << '\n';
    }
}

std::vector<RunLogRow> read_runlog_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kRunLogHeader) {
        throw std::runtime_error("not a RunLog CSV (header mismatch)");
    }
    std::vector<RunLogRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 10) {
            throw std::runtime_error("runlog line " + std::to_string(line_no) + ": expected 10 fields");
        }
        RunLogRow row;
        row.run_id = f[0];
        row.survivor_mode = f[1];
        row.learning_budget = field<std::size_t>(f, 2, line_no);
        row.seed = field<std::uint64_t>(f, 3, line_no);
        row.record.generation = field<std::size_t>(f, 4, line_no);
        row.record.cumulative_evaluations = field<std::uint64_t>(f, 5, line_no);
        row.record.best_so_far = field<double>(f, 6, line_no);
        row.record.best_in_population = field<double>(f, 7, line_no);
        row.record.mean_fitness = field<double>(f, 8, line_no);
        row.record.diversity = field<double>(f, 9, line_no);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<RunLogRow> read_runlog_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return read_runlog_csv(in);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

nlohmann::json individual_to_json(const Individual& ind) {
    nlohmann::json j;
    j["id"] = ind.id;
    j["genotype"] = genotype_to_json(ind.genotype);
    j["fitness"] = number_or_string(ind.fitness);
    j["learned_params"] = ind.learned_params ? nlohmann::json(*ind.learned_params) : nlohmann::json(nullptr);
    j["birth_generation"] = ind.birth_generation;
    j["evaluations_consumed"] = ind.evaluations_consumed;
    return j;
}

Individual individual_from_json(const nlohmann::json& j) {
    Individual ind;
    ind.id = j.at("id").get<std::uint64_t>();
    ind.genotype = genotype_from_json(j.at("genotype"));
    ind.fitness = number_from(j.at("fitness"));
    if (!j.at("learned_params").is_null()) {
        ind.learned_params = j.at("learned_params").get<std::vector<double>>();
    }
    ind.birth_generation = j.at("birth_generation").get<std::size_t>();
    ind.evaluations_consumed = j.value("evaluations_consumed", std::size_t{0});
    return ind;
}

void write_archive(std::ostream& out, std::span<const Individual> individuals) {
    for (const auto& ind : individuals) {
        out << individual_to_json(ind).dump() << '\n';
    }
}

std::vector<Individual> read_archive(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<Individual> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(individual_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_learning_history(std::ostream& out, std::uint64_t robot_id, std::span<const Sample> history) {
    for (std::size_t i = 0; i < history.size(); ++i) {
        out << robot_id << ',' << i;
        for (double p : history[i].params) out << ',' << format_double(p);
        out << ',' << format_double(history[i].fitness) << '\n';
    }
}

}  // namespace morphevo
