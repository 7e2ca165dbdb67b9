#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ebic/bicluster.hpp"
#include "ebic/evolution.hpp"
#include "ebic/expansion.hpp"
#include "ebic/fitness.hpp"
#include "ebic/matrix.hpp"
#include "ebic/metrics.hpp"

namespace ebic {

// Every number written by the tools is rounded to six decimals first, so
// repeated runs diff cleanly.
inline double round6(double x) { return std::round(x * 1e6) / 1e6; }

inline const char* row_flag_name(RowFlag f) {
    switch (f) {
        case RowFlag::kExact: return "exact";
        case RowFlag::kNegative: return "negative";
        case RowFlag::kApproximate: return "approximate";
    }
    return "exact";
}

inline RowFlag row_flag_from_name(const std::string& name) {
    if (name == "exact") return RowFlag::kExact;
    if (name == "negative") return RowFlag::kNegative;
    if (name == "approximate") return RowFlag::kApproximate;
    throw std::runtime_error("unknown row flag: " + name);
}

inline nlohmann::json bicluster_to_json(const Bicluster& b) {
    nlohmann::json j;
    j["fitness"] = round6(b.fitness);
    j["rows"] = b.rows;
    nlohmann::json cols = nlohmann::json::array();
    for (ColumnIndex c : b.series) cols.push_back(static_cast<std::size_t>(c));
    j["columns"] = cols;
    nlohmann::json flags = nlohmann::json::array();
    for (RowFlag f : b.row_flags) flags.push_back(row_flag_name(f));
    j["row_flags"] = flags;
    return j;
}

struct RunSummary {
    std::size_t generations = 0;
    std::uint64_t series_evaluated = 0;
    std::uint64_t sigma = 0;
    bool tabu_terminated = false;
};

inline void write_biclusters_file(const std::string& path, std::span<const Bicluster> biclusters,
                                  const RunSummary* summary = nullptr) {
    nlohmann::json j;
    j["biclusters"] = nlohmann::json::array();
    for (const Bicluster& b : biclusters) j["biclusters"].push_back(bicluster_to_json(b));
    if (summary != nullptr) {
        j["run"] = {{"generations", summary->generations},
                    {"series_evaluated", summary->series_evaluated},
                    {"sigma", summary->sigma},
                    {"tabu_terminated", summary->tabu_terminated}};
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

inline void write_truth_file(const std::string& path, std::span<const CellRect> blocks) {
    nlohmann::json j;
    j["biclusters"] = nlohmann::json::array();
    for (const CellRect& b : blocks)
        j["biclusters"].push_back({{"rows", b.rows}, {"columns", b.cols}});
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

// Reads the row/column sets out of either a results file or a ground-truth
// file; both store a "biclusters" array of objects with "rows" and
// "columns" (a bare top-level array is accepted too).
inline std::vector<CellRect> read_rects_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    in >> j;
    const nlohmann::json& list = j.is_array() ? j : j.at("biclusters");
    if (!list.is_array()) throw std::runtime_error("no bicluster array in " + path);
    std::vector<CellRect> rects;
    rects.reserve(list.size());
    for (const nlohmann::json& item : list) {
        rects.push_back(make_rect(item.at("rows").get<std::vector<std::size_t>>(),
                                  item.at("columns").get<std::vector<std::size_t>>()));
    }
    return rects;
}

inline nlohmann::json score_to_json(const ScoreReport& report) {
    nlohmann::json j;
    j["recovery"] = round6(report.recovery);
    j["relevance"] = round6(report.relevance);
    nlohmann::json pe = nlohmann::json::array();
    for (double v : report.per_expected) pe.push_back(round6(v));
    nlohmann::json pf = nlohmann::json::array();
    for (double v : report.per_found) pf.push_back(round6(v));
    j["per_expected"] = pe;
    j["per_found"] = pf;
    return j;
}

inline void write_score_file(const std::string& path, const ScoreReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << score_to_json(report).dump(2) << '\n';
}

// The fitness a random background can sustain: on signal-free data a series
// of length m keeps roughly n_rows / m! rows, so the best such score over
// all lengths is the plateau that junk series settle on. Output filtering
// cuts safely above it.
inline double null_fitness_plateau(std::size_t n_rows, std::uint64_t sigma) {
    FitnessParams params{sigma};
    double best = 0.0;
    double factorial = 2.0;
    for (std::size_t m = 2; m <= 20; ++m) {
        const auto expected_rows =
            static_cast<std::uint64_t>(std::llround(static_cast<double>(n_rows) / factorial));
        best = std::max(best, fitness_score(expected_rows, m, params));
        factorial *= static_cast<double>(m + 1);
    }
    return best;
}

struct OutputOptions {
    enum class Threshold : std::uint8_t { kAuto, kNone, kValue };
    Threshold threshold = Threshold::kAuto;
    double min_fitness = 0.0;
    std::size_t max_biclusters = 100;
};

inline double resolve_min_fitness(const OutputOptions& opts, std::size_t n_rows,
                                  std::uint64_t sigma) {
    switch (opts.threshold) {
        case OutputOptions::Threshold::kAuto: return 2.0 * null_fitness_plateau(n_rows, sigma);
        case OutputOptions::Threshold::kNone: return 0.0;
        case OutputOptions::Threshold::kValue: return opts.min_fitness;
    }
    return 0.0;
}

// Turns the final top-rank entries into reportable biclusters: drops entries
// below the fitness threshold, caps the count, then assigns and expands rows.
inline std::vector<Bicluster> finalize_biclusters(std::span<const TopRankEntry> entries,
                                                  const ExpressionMatrix& matrix,
                                                  const ExpansionOptions& expansion,
                                                  double epsilon, const OutputOptions& output,
                                                  std::uint64_t sigma) {
    const double min_fitness = resolve_min_fitness(output, matrix.n_rows, sigma);
    std::vector<Bicluster> out;
    for (const TopRankEntry& entry : entries) {
        if (out.size() >= output.max_biclusters) break;
        if (entry.fitness < min_fitness) continue;
        Bicluster core = resolve_bicluster(matrix, entry.series, entry.fitness, epsilon);
        out.push_back(expand_bicluster(matrix, core, expansion, epsilon));
    }
    return out;
}

// Config files hold the same keys as the CLI flags, either as "key = value"
// lines ('#' starts a comment) or as a flat JSON object.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> values;
    std::string trimmed = text;
    std::size_t first = trimmed.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && trimmed[first] == '{') {
        const nlohmann::json j = nlohmann::json::parse(trimmed);
        if (!j.is_object()) throw std::runtime_error("config JSON must be an object");
        for (const auto& [key, value] : j.items()) {
            if (value.is_string())
                values[key] = value.get<std::string>();
            else
                values[key] = value.dump();
        }
        return values;
    }

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (std::size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::size_t begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        const std::size_t end = line.find_last_not_of(" \t\r");
        line = line.substr(begin, end - begin + 1);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key = value");
        auto trim = [](std::string s) {
            const std::size_t b = s.find_first_not_of(" \t");
            if (b == std::string::npos) return std::string();
            const std::size_t e = s.find_last_not_of(" \t");
            return s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
        values[key] = value;
    }
    return values;
}

inline std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

}  // namespace ebic
