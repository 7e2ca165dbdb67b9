#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ebic {

// Dense numeric matrix with row/column labels. Values are row-major and,
// after construction/loading, always finite. Immutable by convention once
// built, so it can be shared read-only across worker threads.
struct ExpressionMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;  // row-major, n_rows * n_cols
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::string corner_label = "id";

    double at(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * n_cols + c]; }
    const double* row_ptr(std::size_t r) const { return values.data() + r * n_cols; }

    static ExpressionMatrix with_shape(std::size_t rows, std::size_t cols) {
        ExpressionMatrix m;
        m.n_rows = rows;
        m.n_cols = cols;
        m.values.assign(rows * cols, 0.0);
        m.row_labels.reserve(rows);
        m.col_labels.reserve(cols);
        for (std::size_t r = 0; r < rows; ++r) m.row_labels.push_back("r" + std::to_string(r));
        for (std::size_t c = 0; c < cols; ++c) m.col_labels.push_back("c" + std::to_string(c));
        return m;
    }
};

struct MatrixLoadStats {
    std::size_t imputed_cells = 0;  // blank or NaN cells replaced by column means
};

namespace detail {

inline std::vector<std::string_view> split_tsv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

inline bool is_missing_field(std::string_view f) {
    if (f.empty()) return true;
    return (f.size() == 3) && (f[0] == 'n' || f[0] == 'N') && (f[1] == 'a' || f[1] == 'A') &&
           (f[2] == 'n' || f[2] == 'N');
}

}  // namespace detail

// Reads the TSV matrix format: a header line `corner \t col1 \t ... \t colN`,
// then one line per row, `label \t v1 \t ... \t vN`. Blank and NaN cells are
// replaced by their column mean; the count is reported through `stats`.
inline ExpressionMatrix load_matrix_tsv(std::istream& in, MatrixLoadStats* stats = nullptr) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty matrix file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    ExpressionMatrix m;
    {
        const auto header = detail::split_tsv_line(line);
        if (header.size() < 2) throw std::runtime_error("header must name at least one column");
        m.corner_label.assign(header[0]);
        for (std::size_t i = 1; i < header.size(); ++i) m.col_labels.emplace_back(header[i]);
    }
    m.n_cols = m.col_labels.size();
    if (m.n_cols > 65535) throw std::runtime_error("too many columns (at most 65535 supported)");

    std::vector<std::pair<std::size_t, std::size_t>> missing;  // (row, col)
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_tsv_line(line);
        if (fields.size() != m.n_cols + 1)
            throw std::runtime_error("inconsistent column count at line " + std::to_string(line_no));
        const std::size_t row = m.row_labels.size();
        m.row_labels.emplace_back(fields[0]);
        for (std::size_t c = 0; c < m.n_cols; ++c) {
            const std::string_view f = fields[c + 1];
            if (detail::is_missing_field(f)) {
                missing.emplace_back(row, c);
                m.values.push_back(0.0);
                continue;
            }
            double v = 0.0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc{} || res.ptr != f.data() + f.size() || !std::isfinite(v)) {
                if (std::isnan(v) && res.ec == std::errc{} && res.ptr == f.data() + f.size()) {
                    missing.emplace_back(row, c);
                    m.values.push_back(0.0);
                    continue;
                }
                throw std::runtime_error("parse error at (row " + std::to_string(row) + ", col " +
                                         std::to_string(c) + ")");
            }
            m.values.push_back(v);
        }
    }
    m.n_rows = m.row_labels.size();
    if (m.n_rows == 0) throw std::runtime_error("matrix has no data rows");

    if (!missing.empty()) {
        // Column-mean imputation over the cells that did parse.
        std::vector<double> col_sum(m.n_cols, 0.0);
        std::vector<std::size_t> col_n(m.n_cols, 0);
        std::vector<char> is_missing(m.n_rows * m.n_cols, 0);
        for (const auto& [r, c] : missing) is_missing[r * m.n_cols + c] = 1;
        for (std::size_t r = 0; r < m.n_rows; ++r)
            for (std::size_t c = 0; c < m.n_cols; ++c)
                if (!is_missing[r * m.n_cols + c]) {
                    col_sum[c] += m.at(r, c);
                    ++col_n[c];
                }
        for (const auto& [r, c] : missing) {
            if (col_n[c] == 0)
                throw std::runtime_error("column " + std::to_string(c) + " has no numeric values");
            m.at(r, c) = col_sum[c] / static_cast<double>(col_n[c]);
        }
    }
    if (stats) stats->imputed_cells = missing.size();
    return m;
}

inline ExpressionMatrix load_matrix_tsv_file(const std::string& path, MatrixLoadStats* stats = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);
    return load_matrix_tsv(in, stats);
}

// Values are written with std::to_chars, i.e. the shortest decimal form that
// reads back to the identical double, so save/load round-trips are exact.
inline void save_matrix_tsv(const ExpressionMatrix& m, std::ostream& out) {
    out << m.corner_label;
    for (const auto& c : m.col_labels) out << '\t' << c;
    out << '\n';
    char buf[64];
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        out << m.row_labels[r];
        for (std::size_t c = 0; c < m.n_cols; ++c) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), m.at(r, c));
            out << '\t';
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

inline void save_matrix_tsv_file(const ExpressionMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write matrix file: " + path);
    save_matrix_tsv(m, out);
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace ebic
