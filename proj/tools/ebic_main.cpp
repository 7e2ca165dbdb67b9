#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ebic/ebic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct RunSettings {
    std::string matrix_path;
    std::string out_path = "biclusters.json";
    std::string config_path;
    ebic::EvolutionConfig evo;
    std::uint64_t sigma = 0;
    double epsilon = 0.0;
    int threads = -1;  // -1: use EBIC_THREADS if set, else all cores
    std::size_t max_biclusters = 100;
    std::string min_fitness = "auto";
    std::string negative_trends = "on";
    std::size_t approx_violations = 1;
    bool verbose = false;
};

unsigned resolve_threads(int flag_value) {
    if (flag_value >= 0) return static_cast<unsigned>(flag_value);
    if (const char* env = std::getenv("EBIC_THREADS")) {
        const long parsed = std::strtol(env, nullptr, 10);
        if (parsed > 0) return static_cast<unsigned>(parsed);
    }
    return 0;
}

ebic::OutputOptions parse_output_options(const std::string& min_fitness,
                                         std::size_t max_biclusters) {
    ebic::OutputOptions opts;
    opts.max_biclusters = max_biclusters;
    if (min_fitness == "auto") {
        opts.threshold = ebic::OutputOptions::Threshold::kAuto;
    } else if (min_fitness == "none") {
        opts.threshold = ebic::OutputOptions::Threshold::kNone;
    } else {
        opts.threshold = ebic::OutputOptions::Threshold::kValue;
        opts.min_fitness = std::stod(min_fitness);
    }
    return opts;
}

bool parse_on_off(const std::string& value, const std::string& flag) {
    if (value == "on") return true;
    if (value == "off") return false;
    throw CLI::ValidationError(flag, "expected on or off");
}

// Applies config-file values to the settings; CLI flags parsed afterwards
// overwrite them. Unknown keys are usage errors.
void apply_config(const std::map<std::string, std::string>& values, RunSettings& s) {
    for (const auto& [key, value] : values) {
        try {
            if (key == "population") {
                s.evo.population_size = std::stoull(value);
            } else if (key == "iterations") {
                s.evo.max_iterations = std::stoull(value);
            } else if (key == "elite_fraction") {
                s.evo.elite_fraction = std::stod(value);
            } else if (key == "tournament") {
                s.evo.tournament_size = std::stoull(value);
            } else if (key == "overlap") {
                s.evo.overlap_threshold = std::stod(value);
            } else if (key == "capacity") {
                s.evo.top_rank_capacity = std::stoull(value);
            } else if (key == "penalty_base") {
                s.evo.penalty_base = std::stod(value);
            } else if (key == "seed") {
                s.evo.rng_seed = std::stoull(value);
            } else if (key == "insertion") {
                s.evo.probabilities.insertion = std::stod(value);
            } else if (key == "deletion") {
                s.evo.probabilities.deletion = std::stod(value);
            } else if (key == "swap") {
                s.evo.probabilities.swap = std::stod(value);
            } else if (key == "substitution") {
                s.evo.probabilities.substitution = std::stod(value);
            } else if (key == "crossover") {
                s.evo.probabilities.crossover = std::stod(value);
            } else if (key == "sigma") {
                s.sigma = std::stoull(value);
            } else if (key == "epsilon") {
                s.epsilon = std::stod(value);
            } else if (key == "threads") {
                s.threads = std::stoi(value);
            } else if (key == "biclusters") {
                s.max_biclusters = std::stoull(value);
            } else if (key == "min_fitness") {
                s.min_fitness = value;
            } else if (key == "negative_trends") {
                s.negative_trends = value;
            } else if (key == "approx_violations") {
                s.approx_violations = std::stoull(value);
            } else {
                throw CLI::ValidationError("--config", "unknown key: " + key);
            }
        } catch (const std::invalid_argument&) {
            throw CLI::ValidationError("--config", "invalid value for " + key + ": " + value);
        } catch (const std::out_of_range&) {
            throw CLI::ValidationError("--config", "value out of range for " + key);
        }
    }
}

// The config file must be applied before CLI11 parses the flags, so the
// path is fished out of argv up front.
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

int cmd_generate(const std::string& suite, const std::string& out_dir,
                 const ebic::SuiteOptions& opts) {
    ebic::SuiteKind kind;
    try {
        kind = ebic::suite_from_name(suite);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what()
                  << " (expected patterns, overlap, narrow, or scaling)\n";
        return kExitUsage;
    }
    const ebic::SuiteManifest manifest = ebic::emit_suite(out_dir, kind, opts);
    std::cout << "wrote " << manifest.datasets.size() << " datasets for suite '" << suite
              << "' to " << out_dir << "\n";
    return kExitOk;
}

int cmd_run(const RunSettings& s) {
    ebic::MatrixLoadStats stats;
    const ebic::ExpressionMatrix matrix = ebic::load_matrix_tsv_file(s.matrix_path, &stats);
    if (stats.imputed_cells > 0)
        std::cerr << "note: imputed " << stats.imputed_cells << " missing cells\n";

    ebic::RunConfig cfg;
    cfg.evo = s.evo;
    cfg.sigma = s.sigma;
    cfg.epsilon = s.epsilon;
    cfg.threads = resolve_threads(s.threads);

    ebic::RunHooks hooks;
    if (s.verbose) {
        hooks.on_generation = [](std::size_t gen, const ebic::TopRankList& top_rank) {
            std::cout << "generation " << gen << " best " << ebic::round6(top_rank.best_fitness())
                      << "\n";
        };
    }

    const ebic::RunResult result = ebic::run(matrix, cfg, hooks);
    if (result.narrow_matrix_warning)
        std::cerr << "warning: matrices with fewer than 20 columns give unreliable results\n";
    if (result.tabu_terminated)
        std::cerr << "note: stopped early, candidate series exhausted\n";

    ebic::ExpansionOptions expansion;
    expansion.allow_negative = parse_on_off(s.negative_trends, "--negative-trends");
    expansion.approx_violations = s.approx_violations;
    const ebic::OutputOptions output = parse_output_options(s.min_fitness, s.max_biclusters);

    const std::vector<ebic::Bicluster> biclusters = ebic::finalize_biclusters(
        result.top_rank, matrix, expansion, s.epsilon, output, result.sigma_used);

    ebic::RunSummary summary;
    summary.generations = result.generations;
    summary.series_evaluated = result.series_evaluated;
    summary.sigma = result.sigma_used;
    summary.tabu_terminated = result.tabu_terminated;
    ebic::write_biclusters_file(s.out_path, biclusters, &summary);

    std::cout << "wrote " << biclusters.size() << " biclusters to " << s.out_path << " ("
              << result.generations << " generations, best fitness "
              << ebic::round6(result.top_rank.empty() ? 0.0 : result.top_rank.front().fitness)
              << ")\n";
    return kExitOk;
}

int cmd_score(const std::string& truth_path, const std::string& found_path,
              const std::string& out_path) {
    for (const std::string& path : {truth_path, found_path}) {
        if (!std::filesystem::exists(path)) {
            std::cerr << "error: no such file: " << path << "\n";
            return kExitUsage;
        }
    }
    const std::vector<ebic::CellRect> expected = ebic::read_rects_file(truth_path);
    const std::vector<ebic::CellRect> found = ebic::read_rects_file(found_path);
    if (found.empty()) std::cerr << "warning: no found biclusters, scores are zero\n";

    const ebic::ScoreReport report = ebic::score_biclusters(expected, found);
    const nlohmann::json j = ebic::score_to_json(report);
    std::cout << j.dump(2) << "\n";
    if (!out_path.empty()) ebic::write_score_file(out_path, report);
    return kExitOk;
}

std::vector<std::size_t> parse_row_list(const std::string& csv) {
    std::vector<std::size_t> rows;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        rows.push_back(std::stoull(item));
    }
    if (rows.empty()) throw CLI::ValidationError("--rows", "expected a comma-separated list");
    return rows;
}

int cmd_bench(const std::string& rows_csv, std::size_t repeats, std::size_t iterations,
              std::uint64_t seed, int threads, const std::string& out_path) {
    const std::vector<std::size_t> row_counts = parse_row_list(rows_csv);

    std::ostringstream csv;
    csv << "rows,mean_seconds,sd_seconds\n";
    double prev_mean = 0.0;
    for (std::size_t i = 0; i < row_counts.size(); ++i) {
        ebic::ScenarioSpec spec;
        spec.n_rows = row_counts[i];
        spec.n_cols = 100;
        spec.blocks.assign(3, {15, 15});
        spec.pattern = ebic::Pattern::kTrendPreserving;
        spec.seed = ebic::Rng::derive_seed(seed, i);
        const ebic::GeneratedScenario data = ebic::generate(spec);

        ebic::RunConfig cfg;
        cfg.evo.max_iterations = iterations;
        cfg.evo.rng_seed = seed;
        cfg.threads = resolve_threads(threads);

        std::vector<double> seconds;
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            const auto start = std::chrono::steady_clock::now();
            ebic::run(data.matrix, cfg);
            const auto stop = std::chrono::steady_clock::now();
            seconds.push_back(std::chrono::duration<double>(stop - start).count());
            std::cerr << "bench " << row_counts[i] << " rows, repeat " << rep + 1 << "/"
                      << repeats << ": " << ebic::round6(seconds.back()) << " s\n";
        }
        double mean = 0.0;
        for (double v : seconds) mean += v;
        mean /= static_cast<double>(seconds.size());
        double sd = 0.0;
        if (seconds.size() > 1) {
            for (double v : seconds) sd += (v - mean) * (v - mean);
            sd = std::sqrt(sd / static_cast<double>(seconds.size() - 1));
        }
        csv << row_counts[i] << "," << ebic::round6(mean) << "," << ebic::round6(sd) << "\n";

        if (i > 0 && mean < prev_mean)
            std::cerr << "warning: " << row_counts[i] << " rows ran faster than " << row_counts[i - 1]
                      << " rows\n";
        prev_mean = mean;
    }

    std::cout << csv.str();
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << csv.str();
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Order-preserving bicluster discovery by evolutionary search"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic benchmark suite");
    std::string gen_suite;
    std::string gen_out = "data";
    ebic::SuiteOptions gen_opts;
    gen->add_option("--suite", gen_suite, "patterns, overlap, narrow, or scaling")->required();
    gen->add_option("--out", gen_out, "Output directory");
    gen->add_option("--seed", gen_opts.master_seed, "Master seed");
    gen->add_option("--noise", gen_opts.noise_sd, "Noise standard deviation added to blocks");
    gen->add_option("--overlap-blocks", gen_opts.overlap_block_count,
                    "Blocks per overlap-suite dataset");

    // run
    auto* run = app.add_subcommand("run", "Search a matrix for biclusters");
    RunSettings rs;
    try {
        const std::string config_path =
            argc > 1 && std::string(argv[1]) == "run" ? find_config_arg(argc, argv) : "";
        if (!config_path.empty()) apply_config(ebic::load_config_file(config_path), rs);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    run->add_option("matrix", rs.matrix_path, "Input matrix (TSV)")->required();
    run->add_option("--out", rs.out_path, "Output bicluster JSON");
    run->add_option("--config", rs.config_path, "Config file (key = value or JSON)");
    run->add_option("--iterations", rs.evo.max_iterations, "Generations to run");
    run->add_option("--population", rs.evo.population_size, "Population size");
    run->add_option("--tournament", rs.evo.tournament_size, "Tournament size");
    run->add_option("--elite-fraction", rs.evo.elite_fraction, "Elite share of the top-rank list");
    run->add_option("--overlap", rs.evo.overlap_threshold, "Column overlap threshold");
    run->add_option("--capacity", rs.evo.top_rank_capacity, "Top-rank list capacity");
    run->add_option("--penalty-base", rs.evo.penalty_base, "Crowding penalty base");
    run->add_option("--seed", rs.evo.rng_seed, "RNG seed");
    run->add_option("--p-insertion", rs.evo.probabilities.insertion, "Insertion probability");
    run->add_option("--p-deletion", rs.evo.probabilities.deletion, "Deletion probability");
    run->add_option("--p-swap", rs.evo.probabilities.swap, "Swap probability");
    run->add_option("--p-substitution", rs.evo.probabilities.substitution,
                    "Substitution probability");
    run->add_option("--p-crossover", rs.evo.probabilities.crossover, "Crossover probability");
    run->add_option("--sigma", rs.sigma, "Row support knee (0 = from row count)");
    run->add_option("--epsilon", rs.epsilon, "Comparison slack for near-equal values");
    run->add_option("--threads", rs.threads, "Worker threads (0 = all cores)");
    run->add_option("--biclusters", rs.max_biclusters, "Output bicluster cap");
    run->add_option("--min-fitness", rs.min_fitness, "Output threshold: auto, none, or a value");
    run->add_option("--negative-trends", rs.negative_trends, "Expand with reversed rows: on|off");
    run->add_option("--approx-violations", rs.approx_violations,
                    "Max violated adjacencies for approximate rows");
    run->add_flag("--verbose", rs.verbose, "Print per-generation best fitness");

    // score
    auto* score = app.add_subcommand("score", "Score found biclusters against ground truth");
    std::string score_truth;
    std::string score_found;
    std::string score_out;
    score->add_option("--truth", score_truth, "Ground-truth JSON")->required();
    score->add_option("--found", score_found, "Found bicluster JSON")->required();
    score->add_option("--out", score_out, "Score JSON output path");

    // bench
    auto* bench = app.add_subcommand("bench", "Time full runs over growing row counts");
    std::string bench_rows = "5000,10000,15000,20000,25000";
    std::size_t bench_repeats = 5;
    std::size_t bench_iterations = 200;
    std::uint64_t bench_seed = 0;
    int bench_threads = -1;
    std::string bench_out = "bench.csv";
    bench->add_option("--rows", bench_rows, "Comma-separated row counts");
    bench->add_option("--repeats", bench_repeats, "Runs per row count");
    bench->add_option("--iterations", bench_iterations, "Generations per run");
    bench->add_option("--seed", bench_seed, "RNG seed");
    bench->add_option("--threads", bench_threads, "Worker threads (0 = all cores)");
    bench->add_option("--out", bench_out, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_suite, gen_out, gen_opts);
        if (run->parsed()) return cmd_run(rs);
        if (score->parsed()) return cmd_score(score_truth, score_found, score_out);
        if (bench->parsed())
            return cmd_bench(bench_rows, bench_repeats, bench_iterations, bench_seed,
                             bench_threads, bench_out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
