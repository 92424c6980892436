#include "multitime/numdiff.hpp"

#include <algorithm>
#include <string>

namespace multitime {

double default_step(double x) {
    return std::max(kMinimumStep, kDefaultRelativeStep * std::max(1.0, std::fabs(x)));
}

void check_step(double x, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw NumericalError("finite-difference step must be positive and finite, got " +
                             std::to_string(h));
    }
    if (x + h == x || x - h == x) {
        throw NumericalError("finite-difference step underflow: h = " + std::to_string(h) +
                             " vanishes against x = " + std::to_string(x));
    }
}

}  // namespace multitime
