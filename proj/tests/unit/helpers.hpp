#pragma once

#include <cmath>

#include "nibm/measure.hpp"

namespace testing_support {

inline nibm::measure::EmpiricalMeasure delta0() { return nibm::measure::EmpiricalMeasure({{0.0, 1.0}}); }
inline nibm::measure::EmpiricalMeasure two_atom() {
    return nibm::measure::EmpiricalMeasure({{-1.0, 0.5}, {1.0, 0.5}});
}
inline nibm::measure::EmpiricalMeasure skewed() {
    return nibm::measure::EmpiricalMeasure({{-1.0, 2.0 / 3.0}, {1.0, 1.0 / 3.0}});
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace testing_support
