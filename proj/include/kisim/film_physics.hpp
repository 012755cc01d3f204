#pragma once

// Kinetic inductance, switching and normal-state behaviour of a thin TiN strip.
//
// Public units follow the lab convention: um, nm, K, uA, nH, kOhm, mV.
// Everything is converted to SI internally.

#include <Eigen/Core>

#include <cmath>

#include "kisim/constants.hpp"

namespace kisim {

enum class FilmType { TypeA, TypeB };

struct FilmSpec {
  double width_um = 0.36;
  double length_um = 50.0;
  double thickness_nm = 6.0;
  double critical_temperature_K = 1.1;
  double sheet_lk0_nH = 0.94;                // per square, T = 0 and I = 0
  double critical_current_density_A_mm2 = 260.0;
  double nonlinearity_current_uA = 25.0;     // I* of the current nonlinearity
  double normal_resistance_kOhm = 100.0;
  FilmType type = FilmType::TypeB;

  /// Throws Error(InvalidArgument) unless every field is finite and strictly positive.
  void validate() const;

  double squares() const { return length_um / width_um; }
  /// Total kinetic inductance at T = 0, I = 0.
  double lk0_nH() const { return squares() * sheet_lk0_nH; }
};

/// Film presets with the measured per-square values of the two poly-resistor variants.
FilmSpec type_a_film();
FilmSpec type_b_film();

struct ThermalState {
  double mxc_temperature_K = 0.0;
  double electron_temperature_K = 0.35;
};

struct BiasState {
  double dc_current_uA = 0.0;
  double rf_current_uA = 0.0;  // amplitude, not RMS
};

// ---------------------------------------------------------------------------
// Scalar kernels. These are templated so they can be used with double,
// long double, or element-wise on Eigen arrays.

/// (T_mxc^4 + T_el^4)^(1/4): on-chip dissipation sets a floor on film temperature.
template <typename Scalar>
Scalar effective_temperature(Scalar mxc, Scalar electron) {
  using std::pow;
  using std::sqrt;
  return sqrt(sqrt(pow(mxc, 4) + pow(electron, 4)));
}

template <typename Derived>
auto effective_temperature(const Eigen::ArrayBase<Derived>& mxc, typename Derived::Scalar electron) {
  using Scalar = typename Derived::Scalar;
  return (mxc.square().square() + Scalar(std::pow(electron, 4))).sqrt().sqrt();
}

/// 1 / (1 - T/T_C), the Ginzburg-Landau pair-density enhancement of L_K.
template <typename Scalar>
Scalar temperature_factor(Scalar temperature, Scalar critical) {
  return Scalar(1) / (Scalar(1) - temperature / critical);
}

/// 1 + (I_dc + I_rf)^2 / I*^2. Written as a single square so the exchange
/// symmetry I_dc <-> I_rf holds bit for bit.
template <typename Scalar>
Scalar current_factor(Scalar dc, Scalar rf, Scalar nonlinearity) {
  const Scalar total = dc + rf;
  return Scalar(1) + (total * total) / (nonlinearity * nonlinearity);
}

// ---------------------------------------------------------------------------

double effective_temperature(const ThermalState& thermal);

/// Total L_K in nH at the effective film temperature.
/// Throws Error(TemperatureAboveCritical) when T_eff >= T_C.
double lk_of_temperature(const FilmSpec& spec, const ThermalState& thermal);

/// Current-dependent L_K in nH given the zero-current value at temperature.
double lk_of_current(const FilmSpec& spec, const BiasState& bias, double lk0_at_T_nH);

/// I_sw = J_c W t, in uA.
double switching_current(const FilmSpec& spec);

/// I_sw(T) = I_sw(0) (1 - (T/T_C)^2)^(3/2), zero at and above T_C.
double switching_current_at(const FilmSpec& spec, double temperature_K);

/// Two-state I-V: zero voltage up to I_sw, Ohmic above. Currents in uA, volts in mV.
Eigen::ArrayXd iv_curve(const FilmSpec& spec, const Eigen::ArrayXd& currents_uA);
Eigen::ArrayXd iv_curve(const FilmSpec& spec, const Eigen::ArrayXd& currents_uA, double switching_uA);

/// R(T) in kOhm. Hard step at T_C (T_C itself is normal) unless a logistic
/// smoothing width in K is given.
double resistance_of_temperature(const FilmSpec& spec, double temperature_K, double smoothing_K = 0.0);

/// Zero-temperature Cooper-pair density n_s(0) in m^-3 implied by sheet_lk0
/// through L_K = m / (2 n_s e^2) * L / (W t). Informational only.
double cooper_pair_density(const FilmSpec& spec);

}  // namespace kisim
