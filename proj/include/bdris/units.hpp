#pragma once

#include <cmath>

namespace bdris {

inline constexpr double kPi = 3.14159265358979323846;

// 20/ln(10); converts attenuation in dB/m to Np/m.
inline constexpr double kDbPerNeper = 8.685889638065035;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double db_per_m_to_np_per_m(double db_per_m) {
    return db_per_m / kDbPerNeper;
}

}  // namespace bdris
