#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace ebic {

// A series of column indices is the genome of one individual: it encodes the
// rule value(c1) < value(c2) < ... < value(cm) for a matching row. Order is
// significant; indices are 0-based and distinct; length is at least 2.
using ColumnIndex = std::uint16_t;
using ColumnSeries = std::vector<ColumnIndex>;

inline constexpr std::size_t kMinSeriesLength = 2;

inline bool series_has_distinct_columns(std::span<const ColumnIndex> s) {
    if (s.size() <= 16) {
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = i + 1; j < s.size(); ++j)
                if (s[i] == s[j]) return false;
        return true;
    }
    std::vector<ColumnIndex> copy(s.begin(), s.end());
    std::sort(copy.begin(), copy.end());
    return std::adjacent_find(copy.begin(), copy.end()) == copy.end();
}

inline bool is_valid_series(std::span<const ColumnIndex> s, std::size_t n_cols) {
    if (s.size() < kMinSeriesLength) return false;
    for (const ColumnIndex c : s)
        if (c >= n_cols) return false;
    return series_has_distinct_columns(s);
}

// Whole population flattened into two arrays: `offsets` holds P+1 positions
// (a trailing sentinel makes every individual's length derivable), and
// `col_indices` holds the concatenated series. Individual p occupies
// col_indices[offsets[p], offsets[p+1]).
struct CbfPopulation {
    std::vector<std::size_t> offsets{0};
    std::vector<ColumnIndex> col_indices;

    std::size_t size() const { return offsets.empty() ? 0 : offsets.size() - 1; }

    std::span<const ColumnIndex> individual(std::size_t p) const {
        return {col_indices.data() + offsets[p], offsets[p + 1] - offsets[p]};
    }
};

inline CbfPopulation encode_population(std::span<const ColumnSeries> individuals) {
    if (individuals.empty()) throw std::invalid_argument("empty population");
    CbfPopulation cbf;
    cbf.offsets.reserve(individuals.size() + 1);
    std::size_t total = 0;
    for (const auto& s : individuals) total += s.size();
    cbf.col_indices.reserve(total);
    for (const auto& s : individuals) {
        if (s.size() < kMinSeriesLength || !series_has_distinct_columns(s))
            throw std::invalid_argument("invalid series");
        cbf.col_indices.insert(cbf.col_indices.end(), s.begin(), s.end());
        cbf.offsets.push_back(cbf.col_indices.size());
    }
    return cbf;
}

inline std::vector<ColumnSeries> decode_population(const CbfPopulation& cbf) {
    if (cbf.offsets.size() < 2 || cbf.offsets.front() != 0)
        throw std::runtime_error("corrupt CBF");
    for (std::size_t i = 1; i < cbf.offsets.size(); ++i)
        if (cbf.offsets[i] <= cbf.offsets[i - 1] ||
            cbf.offsets[i] - cbf.offsets[i - 1] < kMinSeriesLength)
            throw std::runtime_error("corrupt CBF");
    if (cbf.offsets.back() != cbf.col_indices.size()) throw std::runtime_error("corrupt CBF");

    std::vector<ColumnSeries> out;
    out.reserve(cbf.size());
    for (std::size_t p = 0; p < cbf.size(); ++p) {
        const auto s = cbf.individual(p);
        out.emplace_back(s.begin(), s.end());
    }
    return out;
}

}  // namespace ebic
