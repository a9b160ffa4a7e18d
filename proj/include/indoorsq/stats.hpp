#pragma once

#include <cmath>

namespace indoorsq {

inline double normal_cdf(double x, double mean, double stddev) {
    return 0.5 * std::erfc((mean - x) / (stddev * std::sqrt(2.0)));
}

// P(lo <= X <= hi) for X ~ N(mean, stddev^2)
inline double normal_mass(double lo, double hi, double mean, double stddev) {
    if (hi <= lo) return 0.0;
    return normal_cdf(hi, mean, stddev) - normal_cdf(lo, mean, stddev);
}

} // namespace indoorsq
