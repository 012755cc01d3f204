#pragma once

#include <cmath>
#include <numbers>

namespace kisim {

// CODATA 2018 exact / recommended values, SI.
namespace constants {
inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double boltzmann = 1.380649e-23;              // J/K
inline constexpr double planck = 6.62607015e-34;               // J s
inline constexpr double hbar = planck / (2.0 * std::numbers::pi);
inline constexpr double electron_mass = 9.1093837015e-31;      // kg
// Superconducting resistance quantum h/(2e)^2, about 6.45 kOhm.
inline constexpr double resistance_quantum = planck / (4.0 * elementary_charge * elementary_charge);
}  // namespace constants

inline constexpr double two_pi = 2.0 * std::numbers::pi;

template <typename Scalar>
constexpr Scalar square(Scalar x) {
  return x * x;
}

/// dBm -> W. -inf maps to exactly zero power.
inline double dbm_to_watts(double dbm) {
  if (std::isinf(dbm) && dbm < 0) return 0.0;
  return 1e-3 * std::pow(10.0, dbm / 10.0);
}

inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

}  // namespace kisim
