#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

#include "ebic/bicluster.hpp"

namespace ebic {

// A bicluster viewed as a plain cell rectangle: the cross product of a row
// set and a column set, each stored sorted and deduplicated.
struct CellRect {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;

    std::size_t cell_count() const { return rows.size() * cols.size(); }
};

inline CellRect make_rect(std::vector<std::size_t> rows, std::vector<std::size_t> cols) {
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    return {std::move(rows), std::move(cols)};
}

inline CellRect rect_of(const Bicluster& b) {
    std::vector<std::size_t> cols(b.series.begin(), b.series.end());
    return make_rect(b.rows, std::move(cols));
}

namespace detail {

inline std::size_t count_common(const std::vector<std::size_t>& a,
                                const std::vector<std::size_t>& b) {
    std::size_t common = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++common;
            ++ia;
            ++ib;
        }
    }
    return common;
}

// Mean over `targets` of the best Jaccard score against `pool`.
inline double mean_best_jaccard(std::span<const CellRect> targets, std::span<const CellRect> pool);

}  // namespace detail

// Jaccard index of two cell rectangles; the intersection of two rectangles
// is itself a rectangle, so set sizes reduce to products.
inline double jaccard(const CellRect& a, const CellRect& b) {
    const std::size_t size_a = a.cell_count();
    const std::size_t size_b = b.cell_count();
    if (size_a == 0 && size_b == 0) throw std::invalid_argument("undefined Jaccard");
    const std::size_t inter =
        detail::count_common(a.rows, b.rows) * detail::count_common(a.cols, b.cols);
    return static_cast<double>(inter) / static_cast<double>(size_a + size_b - inter);
}

inline double detail::mean_best_jaccard(std::span<const CellRect> targets,
                                        std::span<const CellRect> pool) {
    if (pool.empty()) return 0.0;
    double total = 0.0;
    for (const CellRect& t : targets) {
        double best = 0.0;
        for (const CellRect& p : pool) best = std::max(best, jaccard(t, p));
        total += best;
    }
    return total / static_cast<double>(targets.size());
}

// Mean over expected biclusters of the best Jaccard match among the found
// ones: how much of the truth was recovered.
inline double recovery(std::span<const CellRect> expected, std::span<const CellRect> found) {
    if (expected.empty()) throw std::invalid_argument("empty expected set");
    return detail::mean_best_jaccard(expected, found);
}

// Mean over found biclusters of the best Jaccard match among the expected
// ones: how much of the output is real. Equals recovery with the arguments
// swapped; an empty found set scores 0.
inline double relevance(std::span<const CellRect> expected, std::span<const CellRect> found) {
    if (expected.empty()) throw std::invalid_argument("empty expected set");
    if (found.empty()) return 0.0;
    return detail::mean_best_jaccard(found, expected);
}

struct ScoreReport {
    double recovery = 0.0;
    double relevance = 0.0;
    std::vector<double> per_expected;
    std::vector<double> per_found;
};

inline ScoreReport score_biclusters(std::span<const CellRect> expected,
                                    std::span<const CellRect> found) {
    if (expected.empty()) throw std::invalid_argument("empty expected set");
    ScoreReport report;
    report.per_expected.assign(expected.size(), 0.0);
    report.per_found.assign(found.size(), 0.0);
    for (std::size_t e = 0; e < expected.size(); ++e) {
        for (std::size_t f = 0; f < found.size(); ++f) {
            const double j = jaccard(expected[e], found[f]);
            report.per_expected[e] = std::max(report.per_expected[e], j);
            report.per_found[f] = std::max(report.per_found[f], j);
        }
    }
    for (double j : report.per_expected) report.recovery += j;
    report.recovery /= static_cast<double>(expected.size());
    if (!found.empty()) {
        for (double j : report.per_found) report.relevance += j;
        report.relevance /= static_cast<double>(found.size());
    }
    return report;
}

}  // namespace ebic
