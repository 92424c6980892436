#pragma once

#include <cstddef>
#include <vector>

namespace multitime {

/// Norm of a consistency defect for one pair of time coordinates.
/// Indices are 0-based particle/time indices.
struct PairDefect {
    std::size_t j = 0;
    std::size_t k = 0;
    double value = 0.0;
};

struct DefectReport {
    std::vector<PairDefect> pairs;
    double max = 0.0;
    double step = 0.0;  // finite-difference step used

    void add(std::size_t j, std::size_t k, double value) {
        pairs.push_back({j, k, value});
        if (value > max) max = value;
    }

    /// Value for (j, k); throws std::out_of_range if the pair was not computed.
    double at(std::size_t j, std::size_t k) const;
};

}  // namespace multitime
