#pragma once

#include <cstdint>
#include <vector>

#include "ebic/cbf.hpp"

namespace ebic {

// How a row ended up in a bicluster.
enum class RowFlag : std::uint8_t {
    kExact = 0,        // strictly increasing along the series
    kNegative = 1,     // strictly increasing along the reversed series
    kApproximate = 2,  // at most a bounded number of violated adjacencies
};

struct Bicluster {
    std::vector<std::size_t> rows;  // ascending
    ColumnSeries series;
    double fitness = 0.0;
    std::vector<RowFlag> row_flags;  // parallel to rows
};

}  // namespace ebic
