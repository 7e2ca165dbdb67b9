#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "ebic/cbf.hpp"
#include "ebic/fitness.hpp"
#include "ebic/matrix.hpp"
#include "ebic/rng.hpp"

namespace ebic {

struct OperatorProbabilities {
    double insertion = 0.30;
    double deletion = 0.15;
    double swap = 0.15;
    double substitution = 0.15;
    double crossover = 0.25;
};

struct EvolutionConfig {
    std::size_t population_size = 400;
    std::size_t max_iterations = 5000;
    double elite_fraction = 0.25;
    std::size_t tournament_size = 4;
    OperatorProbabilities probabilities;
    double overlap_threshold = 0.75;
    std::size_t top_rank_capacity = 100;
    double penalty_base = 1.2;
    std::uint64_t rng_seed = 0;
};

inline void validate_config(const EvolutionConfig& cfg) {
    if (cfg.population_size == 0) throw std::invalid_argument("population_size must be positive");
    if (cfg.tournament_size == 0) throw std::invalid_argument("tournament_size must be positive");
    if (cfg.top_rank_capacity == 0)
        throw std::invalid_argument("top_rank_capacity must be positive");
    if (!(cfg.elite_fraction > 0.0) || cfg.elite_fraction > 1.0)
        throw std::invalid_argument("elite_fraction must be in (0, 1]");
    if (!(cfg.overlap_threshold > 0.0) || cfg.overlap_threshold > 1.0)
        throw std::invalid_argument("overlap_threshold must be in (0, 1]");
    if (!(cfg.penalty_base > 1.0)) throw std::invalid_argument("penalty_base must exceed 1");
    const OperatorProbabilities& p = cfg.probabilities;
    const double probs[] = {p.insertion, p.deletion, p.swap, p.substitution, p.crossover};
    double sum = 0.0;
    for (double q : probs) {
        if (q < 0.0) throw std::invalid_argument("operator probabilities must be non-negative");
        sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("operator probabilities must sum to 1");
}

// Per-column usage counters for the crowding penalty. Reset at the start of
// each generation's build phase; every admission of an individual to the new
// population bumps the counter of each column it uses.
class ColumnPenaltyTable {
  public:
    explicit ColumnPenaltyTable(std::size_t n_cols) : usage_(n_cols, 0) {}

    void reset() { std::fill(usage_.begin(), usage_.end(), 0); }

    void add(std::span<const ColumnIndex> series) {
        for (ColumnIndex c : series) ++usage_[c];
    }

    // The crowding exponent: mean usage count over the series' columns.
    double mean_usage(std::span<const ColumnIndex> series) const {
        std::uint64_t total = 0;
        for (ColumnIndex c : series) total += usage_[c];
        return static_cast<double>(total) / static_cast<double>(series.size());
    }

    const std::vector<std::uint64_t>& usage() const { return usage_; }

  private:
    std::vector<std::uint64_t> usage_;
};

// Already-explored series, keyed by the exact ordered column sequence.
// Distinct orderings are distinct keys. Keys are never removed; the hit
// counter tracks duplicate insert attempts since the last reset.
class TabuList {
  public:
    explicit TabuList(std::size_t n_cols) : wide_(n_cols > 256) {}

    // False if the series was already present (a tabu hit).
    bool insert(std::span<const ColumnIndex> series) {
        if (keys_.insert(key_of(series)).second) return true;
        ++hits_;
        return false;
    }

    bool contains(std::span<const ColumnIndex> series) const {
        return keys_.count(key_of(series)) != 0;
    }

    std::size_t size() const { return keys_.size(); }
    std::uint64_t hits() const { return hits_; }
    void reset_hits() { hits_ = 0; }

  private:
    std::string key_of(std::span<const ColumnIndex> series) const {
        std::string key;
        if (wide_) {
            key.resize(series.size() * 2);
            for (std::size_t i = 0; i < series.size(); ++i) {
                key[2 * i] = static_cast<char>(series[i] & 0xff);
                key[2 * i + 1] = static_cast<char>(series[i] >> 8);
            }
        } else {
            key.resize(series.size());
            for (std::size_t i = 0; i < series.size(); ++i)
                key[i] = static_cast<char>(series[i]);
        }
        return key;
    }

    std::unordered_set<std::string> keys_;
    std::uint64_t hits_ = 0;
    bool wide_;
};

struct TopRankEntry {
    ColumnSeries series;
    double fitness = 0.0;
    std::vector<std::uint64_t> column_mask;
    std::uint64_t seq = 0;  // admission order, breaks fitness ties
};

// The running list of best biclusters found so far, kept sorted by fitness
// (descending, ties by earlier admission) with no two entries sharing more
// than overlap_threshold of their columns.
class TopRankList {
  public:
    explicit TopRankList(std::size_t n_cols)
        : n_cols_(n_cols), mask_words_((n_cols + 63) / 64) {}

    const std::vector<TopRankEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    double best_fitness() const { return entries_.empty() ? 0.0 : entries_.front().fitness; }

    // Column overlap between two sets, as a fraction of the smaller set.
    static double overlap(const TopRankEntry& a, const TopRankEntry& b) {
        std::uint64_t inter = 0;
        for (std::size_t w = 0; w < a.column_mask.size(); ++w)
            inter += std::popcount(a.column_mask[w] & b.column_mask[w]);
        return static_cast<double>(inter) /
               static_cast<double>(std::min(a.series.size(), b.series.size()));
    }

    // Offers a whole population. Candidates are visited in descending
    // fitness order; a candidate is admitted only if no present entry of
    // equal or higher fitness overlaps it above the threshold, and on
    // admission every overlapping lower-fitness entry is evicted. The list
    // is then truncated to capacity, dropping the lowest fitness first.
    // Candidates with non-positive fitness are ignored.
    void update(std::span<const ColumnSeries> population, std::span<const double> fitness,
                const EvolutionConfig& cfg) {
        std::vector<std::size_t> order;
        order.reserve(population.size());
        for (std::size_t i = 0; i < population.size(); ++i)
            if (fitness[i] > 0.0) order.push_back(i);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (fitness[a] != fitness[b]) return fitness[a] > fitness[b];
            return a < b;
        });

        TopRankEntry cand;
        for (std::size_t i : order) {
            cand.series.assign(population[i].begin(), population[i].end());
            cand.fitness = fitness[i];
            fill_mask(cand);

            bool blocked = false;
            for (const TopRankEntry& e : entries_) {
                if (e.fitness >= cand.fitness && overlap(e, cand) > cfg.overlap_threshold) {
                    blocked = true;
                    break;
                }
            }
            if (blocked) continue;

            std::erase_if(entries_, [&](const TopRankEntry& e) {
                return e.fitness < cand.fitness && overlap(e, cand) > cfg.overlap_threshold;
            });
            cand.seq = next_seq_++;
            entries_.push_back(cand);
        }

        std::sort(entries_.begin(), entries_.end(), [](const TopRankEntry& a, const TopRankEntry& b) {
            if (a.fitness != b.fitness) return a.fitness > b.fitness;
            return a.seq < b.seq;
        });
        if (entries_.size() > cfg.top_rank_capacity) entries_.resize(cfg.top_rank_capacity);
    }

  private:
    void fill_mask(TopRankEntry& e) const {
        e.column_mask.assign(mask_words_, 0);
        for (ColumnIndex c : e.series) e.column_mask[c / 64] |= std::uint64_t{1} << (c % 64);
    }

    std::vector<TopRankEntry> entries_;
    std::size_t n_cols_;
    std::size_t mask_words_;
    std::uint64_t next_seq_ = 0;
};

struct MutationResult {
    ColumnSeries series;
    bool changed = false;
};

namespace detail {

inline bool series_contains(std::span<const ColumnIndex> s, ColumnIndex col) {
    return std::find(s.begin(), s.end(), col) != s.end();
}

// The k-th column (0-based) not used by the series.
inline ColumnIndex nth_unused_column(std::span<const ColumnIndex> s, std::size_t n_cols,
                                     std::size_t k) {
    std::vector<bool> used(n_cols, false);
    for (ColumnIndex c : s) used[c] = true;
    for (std::size_t c = 0; c < n_cols; ++c) {
        if (used[c]) continue;
        if (k == 0) return static_cast<ColumnIndex>(c);
        --k;
    }
    throw std::logic_error("unused column index out of range");
}

}  // namespace detail

// Inserts a column not yet in the series at a random position. No-op when
// the series already uses every column.
inline MutationResult mutate_insertion(const ColumnSeries& s, std::size_t n_cols, Rng& rng) {
    if (s.size() >= n_cols) return {s, false};
    const std::size_t pos = rng.index(s.size() + 1);
    const ColumnIndex col = detail::nth_unused_column(s, n_cols, rng.index(n_cols - s.size()));
    MutationResult out{s, true};
    out.series.insert(out.series.begin() + static_cast<std::ptrdiff_t>(pos), col);
    return out;
}

// Removes a random column. No-op when the series is already at the minimum
// length.
inline MutationResult mutate_deletion(const ColumnSeries& s, Rng& rng) {
    if (s.size() <= kMinSeriesLength) return {s, false};
    MutationResult out{s, true};
    out.series.erase(out.series.begin() + static_cast<std::ptrdiff_t>(rng.index(s.size())));
    return out;
}

// Exchanges two distinct random positions.
inline MutationResult mutate_swap(const ColumnSeries& s, Rng& rng) {
    const std::size_t i = rng.index(s.size());
    std::size_t j = rng.index(s.size() - 1);
    if (j >= i) ++j;
    MutationResult out{s, true};
    std::swap(out.series[i], out.series[j]);
    return out;
}

// Replaces the column at a random position with one not in the series.
// No-op when no unused column exists.
inline MutationResult mutate_substitution(const ColumnSeries& s, std::size_t n_cols, Rng& rng) {
    if (s.size() >= n_cols) return {s, false};
    const std::size_t pos = rng.index(s.size());
    const ColumnIndex col = detail::nth_unused_column(s, n_cols, rng.index(n_cols - s.size()));
    MutationResult out{s, true};
    out.series[pos] = col;
    return out;
}

// Child = a random-length prefix of `a` followed by the columns of `b` (in
// b's order) that the prefix does not already contain. Falls back to a copy
// of the fitter parent if the child would be shorter than a valid series.
inline ColumnSeries crossover(const ColumnSeries& a, const ColumnSeries& b, double fitness_a,
                              double fitness_b, Rng& rng) {
    const std::size_t cut = 1 + rng.index(a.size());
    ColumnSeries child(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(cut));
    for (ColumnIndex c : b)
        if (!detail::series_contains(child, c)) child.push_back(c);
    if (child.size() < kMinSeriesLength) return fitness_a >= fitness_b ? a : b;
    return child;
}

// Tournament selection over penalty-adjusted scores. Each candidate's score
// is fitness / penalty_base^theta where theta is the mean usage count of its
// columns; ties keep the earlier draw.
inline std::size_t tournament_select(std::span<const ColumnSeries> population,
                                     std::span<const double> fitness,
                                     const ColumnPenaltyTable& penalties,
                                     const EvolutionConfig& cfg, Rng& rng) {
    std::size_t best = rng.index(population.size());
    double best_score =
        fitness[best] / std::pow(cfg.penalty_base, penalties.mean_usage(population[best]));
    for (std::size_t t = 1; t < cfg.tournament_size; ++t) {
        const std::size_t idx = rng.index(population.size());
        const double score =
            fitness[idx] / std::pow(cfg.penalty_base, penalties.mean_usage(population[idx]));
        if (score > best_score) {
            best = idx;
            best_score = score;
        }
    }
    return best;
}

// Random starting population: series of length 2 to 4 (clamped to the column
// count), columns sampled without replacement, deduplicated through the tabu
// list. Returns fewer than population_size series only if the search space
// is exhausted first.
inline std::vector<ColumnSeries> init_population(std::size_t n_cols, const EvolutionConfig& cfg,
                                                 Rng& rng, TabuList& tabu) {
    if (n_cols < 3) throw std::invalid_argument("matrix too narrow");
    std::vector<ColumnSeries> population;
    population.reserve(cfg.population_size);
    ColumnSeries s;
    std::size_t attempts_left = cfg.population_size * 64;
    while (population.size() < cfg.population_size && attempts_left-- > 0) {
        const std::size_t len = std::min<std::size_t>(2 + rng.index(3), n_cols);
        s.clear();
        while (s.size() < len) {
            const ColumnIndex col = static_cast<ColumnIndex>(rng.index(n_cols));
            if (!detail::series_contains(s, col)) s.push_back(col);
        }
        if (tabu.insert(s)) population.push_back(s);
    }
    return population;
}

enum class OperatorKind : std::uint8_t {
    kInsertion,
    kDeletion,
    kSwap,
    kSubstitution,
    kCrossover,
};

inline OperatorKind draw_operator(const OperatorProbabilities& p, Rng& rng) {
    double u = rng.real();
    if ((u -= p.insertion) < 0.0) return OperatorKind::kInsertion;
    if ((u -= p.deletion) < 0.0) return OperatorKind::kDeletion;
    if ((u -= p.swap) < 0.0) return OperatorKind::kSwap;
    if ((u -= p.substitution) < 0.0) return OperatorKind::kSubstitution;
    return OperatorKind::kCrossover;
}

struct GenerationResult {
    std::vector<ColumnSeries> individuals;
    // The first elite_count individuals are clones of top-rank entries and
    // carry their known fitness; the rest are novel and must be evaluated.
    std::size_t elite_count = 0;
    std::vector<double> elite_fitness;
    bool terminated = false;
    std::uint64_t tabu_hits = 0;
};

// One population-building phase: elite clones first, then children produced
// by tournament selection and a randomly drawn operator until the population
// is full. Children already in the tabu list are discarded and counted;
// when the count exceeds the population size the search space is considered
// exhausted and the run should stop.
inline GenerationResult build_generation(const std::vector<ColumnSeries>& prev,
                                         const std::vector<double>& prev_fitness,
                                         const TopRankList& top_rank, TabuList& tabu,
                                         ColumnPenaltyTable& penalties,
                                         const EvolutionConfig& cfg, std::size_t n_cols,
                                         Rng& rng) {
    penalties.reset();
    tabu.reset_hits();

    GenerationResult out;
    out.individuals.reserve(cfg.population_size);

    const std::size_t elite_target = static_cast<std::size_t>(
        std::ceil(cfg.elite_fraction * static_cast<double>(top_rank.size())));
    out.elite_count = std::min(elite_target, cfg.population_size);
    for (std::size_t e = 0; e < out.elite_count; ++e) {
        const TopRankEntry& entry = top_rank.entries()[e];
        out.individuals.push_back(entry.series);
        out.elite_fitness.push_back(entry.fitness);
        penalties.add(entry.series);
    }

    while (out.individuals.size() < cfg.population_size) {
        const OperatorKind op = draw_operator(cfg.probabilities, rng);
        const std::size_t pa = tournament_select(prev, prev_fitness, penalties, cfg, rng);
        ColumnSeries child;
        switch (op) {
            case OperatorKind::kInsertion:
                child = mutate_insertion(prev[pa], n_cols, rng).series;
                break;
            case OperatorKind::kDeletion:
                child = mutate_deletion(prev[pa], rng).series;
                break;
            case OperatorKind::kSwap:
                child = mutate_swap(prev[pa], rng).series;
                break;
            case OperatorKind::kSubstitution:
                child = mutate_substitution(prev[pa], n_cols, rng).series;
                break;
            case OperatorKind::kCrossover: {
                const std::size_t pb = tournament_select(prev, prev_fitness, penalties, cfg, rng);
                child = crossover(prev[pa], prev[pb], prev_fitness[pa], prev_fitness[pb], rng);
                break;
            }
        }
        if (!tabu.insert(child)) {
            out.tabu_hits = tabu.hits();
            if (out.tabu_hits > cfg.population_size) {
                out.terminated = true;
                break;
            }
            continue;
        }
        penalties.add(child);
        out.individuals.push_back(std::move(child));
    }
    out.tabu_hits = tabu.hits();
    return out;
}

struct RunConfig {
    EvolutionConfig evo;
    // 0 selects the row-count based default.
    std::uint64_t sigma = 0;
    // Slack added to the right side of each ordering comparison.
    double epsilon = 0.0;
    // Worker threads for fitness evaluation; 0 means one per hardware thread.
    unsigned threads = 1;
};

struct RunHooks {
    std::function<void(std::size_t generation, const TopRankList&)> on_generation;
    std::function<void(std::span<const ColumnSeries>)> on_evaluate;
};

struct RunResult {
    std::vector<TopRankEntry> top_rank;
    std::size_t generations = 0;
    bool tabu_terminated = false;
    std::uint64_t series_evaluated = 0;
    bool narrow_matrix_warning = false;
    std::uint64_t sigma_used = 0;
};

// The full evolutionary loop. Deterministic for a fixed (matrix, config)
// pair at any thread count: all random draws happen on the single generator
// owned by this function, and parallel fitness counts reduce exactly.
inline RunResult run(const ExpressionMatrix& matrix, const RunConfig& cfg,
                     const RunHooks& hooks = {}) {
    validate_config(cfg.evo);
    if (matrix.n_cols < 3) throw std::invalid_argument("matrix too narrow");

    RunResult result;
    result.narrow_matrix_warning = matrix.n_cols < 20;

    FitnessParams params;
    params.sigma = cfg.sigma != 0 ? cfg.sigma : default_sigma(matrix.n_rows);
    result.sigma_used = params.sigma;

    const ChunkPlan plan = make_chunk_plan(matrix.n_rows, cfg.threads);
    Rng rng(cfg.evo.rng_seed);
    TabuList tabu(matrix.n_cols);
    TopRankList top_rank(matrix.n_cols);
    ColumnPenaltyTable penalties(matrix.n_cols);

    std::vector<ColumnSeries> population = init_population(matrix.n_cols, cfg.evo, rng, tabu);
    if (hooks.on_evaluate) hooks.on_evaluate(population);
    std::vector<double> fitness = evaluate_population(
        matrix, encode_population(population), plan, params, cfg.epsilon);
    result.series_evaluated += population.size();
    top_rank.update(population, fitness, cfg.evo);
    if (hooks.on_generation) hooks.on_generation(0, top_rank);

    for (std::size_t gen = 1; gen <= cfg.evo.max_iterations; ++gen) {
        GenerationResult next = build_generation(population, fitness, top_rank, tabu, penalties,
                                                 cfg.evo, matrix.n_cols, rng);
        if (next.terminated) {
            result.tabu_terminated = true;
            break;
        }

        std::vector<double> next_fitness = next.elite_fitness;
        next_fitness.resize(next.individuals.size());
        if (next.individuals.size() > next.elite_count) {
            std::span<const ColumnSeries> novel(next.individuals.data() + next.elite_count,
                                                next.individuals.size() - next.elite_count);
            if (hooks.on_evaluate) hooks.on_evaluate(novel);
            const std::vector<double> novel_fitness =
                evaluate_population(matrix, encode_population(novel), plan, params, cfg.epsilon);
            result.series_evaluated += novel.size();
            std::copy(novel_fitness.begin(), novel_fitness.end(),
                      next_fitness.begin() + static_cast<std::ptrdiff_t>(next.elite_count));
        }

        population = std::move(next.individuals);
        fitness = std::move(next_fitness);
        top_rank.update(population, fitness, cfg.evo);
        result.generations = gen;
        if (hooks.on_generation) hooks.on_generation(gen, top_rank);
    }

    result.top_rank = top_rank.entries();
    return result;
}

}  // namespace ebic
