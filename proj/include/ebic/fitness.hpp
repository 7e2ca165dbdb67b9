#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ebic/cbf.hpp"
#include "ebic/matrix.hpp"
#include "ebic/parallel.hpp"

namespace ebic {

// Half-open row ranges that partition [0, n_rows). Each chunk is evaluated
// independently and the per-chunk counts are reduced by integer summation,
// so results are identical for any partition and any worker count.
struct RowRange {
    std::size_t lo = 0;
    std::size_t hi = 0;
};

struct ChunkPlan {
    std::vector<RowRange> chunks;
    unsigned worker_count = 1;
};

inline ChunkPlan make_chunk_plan(std::size_t n_rows, unsigned workers = 0) {
    if (n_rows == 0) throw std::invalid_argument("matrix has no rows");
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    ChunkPlan plan;
    plan.worker_count = workers;
    const std::size_t chunk = (n_rows + workers - 1) / workers;
    for (std::size_t lo = 0; lo < n_rows; lo += chunk)
        plan.chunks.push_back({lo, std::min(lo + chunk, n_rows)});
    return plan;
}

struct FitnessParams {
    // Minimum expected number of matching rows before the exponential
    // penalty applies. Must be at least 2.
    std::uint64_t sigma = 4;
};

// Default sigma scales with the data: 2% of the rows, but never below 4.
inline std::uint64_t default_sigma(std::size_t n_rows) {
    const std::uint64_t scaled =
        static_cast<std::uint64_t>((n_rows + 49) / 50);  // ceil(0.02 * n_rows)
    return scaled < 4 ? 4 : scaled;
}

// True iff the row's values strictly increase along the series. `epsilon`
// relaxes the comparison to v[prev] < v[next] + epsilon; at the default 0 an
// exact tie breaks the run.
inline bool row_matches(const ExpressionMatrix& m, std::size_t row,
                        std::span<const ColumnIndex> series, double epsilon = 0.0) {
    const double* v = m.row_ptr(row);
    double prev = v[series[0]];
    for (std::size_t i = 1; i < series.size(); ++i) {
        const double cur = v[series[i]];
        if (!(prev < cur + epsilon)) return false;
        prev = cur;
    }
    return true;
}

namespace detail {

inline void count_chunk(const ExpressionMatrix& m, const CbfPopulation& pop, RowRange range,
                        double epsilon, std::uint64_t* out) {
    const std::size_t n = pop.size();
    const std::size_t* off = pop.offsets.data();
    const ColumnIndex* cols = pop.col_indices.data();
    for (std::size_t r = range.lo; r < range.hi; ++r) {
        const double* v = m.row_ptr(r);
        for (std::size_t p = 0; p < n; ++p) {
            const std::size_t end = off[p + 1];
            double prev = v[cols[off[p]]];
            bool ok = true;
            for (std::size_t i = off[p] + 1; i < end; ++i) {
                const double cur = v[cols[i]];
                if (!(prev < cur + epsilon)) {
                    ok = false;
                    break;
                }
                prev = cur;
            }
            out[p] += ok;
        }
    }
}

}  // namespace detail

// Number of rows matching each individual of the population. The result does
// not depend on the chunking or on scheduling: disjoint chunks are counted by
// independent workers over shared immutable inputs and summed.
inline std::vector<std::uint64_t> count_matches(const ExpressionMatrix& m, const CbfPopulation& pop,
                                                const ChunkPlan& plan, double epsilon = 0.0) {
    const std::size_t n = pop.size();
    std::vector<std::uint64_t> counts(n, 0);
    if (n == 0) return counts;
    if (plan.worker_count <= 1 || plan.chunks.size() <= 1) {
        for (const RowRange& range : plan.chunks)
            detail::count_chunk(m, pop, range, epsilon, counts.data());
        return counts;
    }
    std::vector<std::vector<std::uint64_t>> partial(plan.chunks.size());
    ThreadPool::shared().run_indexed(plan.chunks.size(), [&](std::size_t k) {
        partial[k].assign(n, 0);
        detail::count_chunk(m, pop, plan.chunks[k], epsilon, partial[k].data());
    });
    for (const auto& part : partial)
        for (std::size_t p = 0; p < n; ++p) counts[p] += part[p];
    return counts;
}

// Bicluster quality: 2^min(|I|-sigma, 0) * |J| * ln(|I|-1) for |I| > 1, else
// 0, where |I| is the number of matching rows and |J| the series length.
// Zero up to two rows, then increasing in both dimensions, with an
// exponential penalty for row support below sigma.
inline double fitness_score(std::uint64_t match_count, std::size_t series_len,
                            const FitnessParams& params) {
    assert(series_len >= kMinSeriesLength);
    if (match_count <= 1) return 0.0;
    double f = static_cast<double>(series_len) *
               std::log(static_cast<double>(match_count - 1));
    if (match_count < params.sigma)
        f *= std::exp2(static_cast<double>(match_count) - static_cast<double>(params.sigma));
    return f > 0.0 ? f : 0.0;
}

inline std::vector<double> evaluate_population(const ExpressionMatrix& m, const CbfPopulation& pop,
                                               const ChunkPlan& plan, const FitnessParams& params,
                                               double epsilon = 0.0) {
    const std::vector<std::uint64_t> counts = count_matches(m, pop, plan, epsilon);
    std::vector<double> fitness(counts.size());
    for (std::size_t p = 0; p < counts.size(); ++p)
        fitness[p] = fitness_score(counts[p], pop.offsets[p + 1] - pop.offsets[p], params);
    return fitness;
}

}  // namespace ebic
