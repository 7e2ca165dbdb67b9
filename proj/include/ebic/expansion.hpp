#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ebic/bicluster.hpp"
#include "ebic/cbf.hpp"
#include "ebic/fitness.hpp"
#include "ebic/matrix.hpp"

namespace ebic {

// All rows whose values strictly increase along the series, in ascending
// row order. Agrees with count_matches on the same series and epsilon.
inline std::vector<std::size_t> assign_rows(const ExpressionMatrix& m,
                                            std::span<const ColumnIndex> series,
                                            double epsilon = 0.0) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < m.n_rows; ++r)
        if (row_matches(m, r, series, epsilon)) rows.push_back(r);
    return rows;
}

// Number of adjacent series pairs the row fails to order.
inline std::size_t trend_violations(const ExpressionMatrix& m, std::size_t row,
                                    std::span<const ColumnIndex> series, double epsilon = 0.0) {
    const double* v = m.row_ptr(row);
    std::size_t violations = 0;
    for (std::size_t i = 1; i < series.size(); ++i)
        if (!(v[series[i - 1]] < v[series[i]] + epsilon)) ++violations;
    return violations;
}

// A series plus its exact row support as a concrete bicluster.
inline Bicluster resolve_bicluster(const ExpressionMatrix& m, const ColumnSeries& series,
                                   double fitness, double epsilon = 0.0) {
    Bicluster b;
    b.series = series;
    b.fitness = fitness;
    b.rows = assign_rows(m, series, epsilon);
    b.row_flags.assign(b.rows.size(), RowFlag::kExact);
    return b;
}

struct ExpansionOptions {
    bool allow_negative = true;
    std::size_t approx_violations = 1;
};

// Grows a bicluster with rows matching the reversed series (negative trend)
// and rows violating at most approx_violations adjacencies of the forward
// series (approximate trend). Existing rows keep their flags; each new row
// gets exactly one flag, negative taking precedence over approximate.
// Fitness is left untouched: it scores the exact core.
inline Bicluster expand_bicluster(const ExpressionMatrix& m, const Bicluster& input,
                                  const ExpansionOptions& opts, double epsilon = 0.0) {
    ColumnSeries reversed(input.series.rbegin(), input.series.rend());

    Bicluster out = input;
    std::vector<std::pair<std::size_t, RowFlag>> added;
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        if (std::binary_search(input.rows.begin(), input.rows.end(), r)) continue;
        if (opts.allow_negative && row_matches(m, r, reversed, epsilon)) {
            added.emplace_back(r, RowFlag::kNegative);
        } else if (opts.approx_violations > 0 &&
                   trend_violations(m, r, input.series, epsilon) <= opts.approx_violations) {
            added.emplace_back(r, RowFlag::kApproximate);
        }
    }
    if (added.empty()) return out;

    std::vector<std::pair<std::size_t, RowFlag>> merged;
    merged.reserve(out.rows.size() + added.size());
    for (std::size_t i = 0; i < out.rows.size(); ++i) merged.emplace_back(out.rows[i], out.row_flags[i]);
    merged.insert(merged.end(), added.begin(), added.end());
    std::sort(merged.begin(), merged.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    out.rows.clear();
    out.row_flags.clear();
    for (const auto& [row, flag] : merged) {
        out.rows.push_back(row);
        out.row_flags.push_back(flag);
    }
    return out;
}

}  // namespace ebic
