#include "multitime/defect.hpp"

#include <stdexcept>
#include <string>

namespace multitime {

double DefectReport::at(std::size_t j, std::size_t k) const {
    for (const auto& p : pairs) {
        if (p.j == j && p.k == k) return p.value;
    }
    throw std::out_of_range("DefectReport: no entry for pair (" + std::to_string(j) + ", " +
                            std::to_string(k) + ")");
}

}  // namespace multitime
