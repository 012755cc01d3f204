#include "kisim/film_physics.hpp"

#include <string>

#include "kisim/error.hpp"

namespace kisim {

namespace {

void require_positive(double value, const char* name) {
  if (!(std::isfinite(value) && value > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("FilmSpec.") + name + " must be finite and > 0, got " + std::to_string(value));
  }
}

}  // namespace

void FilmSpec::validate() const {
  require_positive(width_um, "width_um");
  require_positive(length_um, "length_um");
  require_positive(thickness_nm, "thickness_nm");
  require_positive(critical_temperature_K, "critical_temperature_K");
  require_positive(sheet_lk0_nH, "sheet_lk0_nH");
  require_positive(critical_current_density_A_mm2, "critical_current_density_A_mm2");
  require_positive(nonlinearity_current_uA, "nonlinearity_current_uA");
  require_positive(normal_resistance_kOhm, "normal_resistance_kOhm");
}

// I* is backed out from the self-Kerr coefficients (12.0 and 5.29 Hz/photon)
// with the amplitude convention used by the nonlinear solver. R_normal uses
// R_sq = L_sq * pi * Delta / hbar with a BCS gap; neither is measured directly.
FilmSpec type_a_film() {
  FilmSpec spec;
  spec.critical_temperature_K = 0.75;
  spec.sheet_lk0_nH = 1.07;
  spec.critical_current_density_A_mm2 = 94.0;
  spec.nonlinearity_current_uA = 17.0;
  spec.normal_resistance_kOhm = 81.0;
  spec.type = FilmType::TypeA;
  return spec;
}

FilmSpec type_b_film() {
  FilmSpec spec;
  spec.critical_temperature_K = 1.1;
  spec.sheet_lk0_nH = 0.94;
  spec.critical_current_density_A_mm2 = 260.0;
  spec.nonlinearity_current_uA = 25.5;
  spec.normal_resistance_kOhm = 104.0;
  spec.type = FilmType::TypeB;
  return spec;
}

double effective_temperature(const ThermalState& thermal) {
  return effective_temperature(thermal.mxc_temperature_K, thermal.electron_temperature_K);
}

double lk_of_temperature(const FilmSpec& spec, const ThermalState& thermal) {
  const double t = effective_temperature(thermal);
  if (!(t < spec.critical_temperature_K)) {
    throw Error(ErrorCode::TemperatureAboveCritical,
                "effective temperature " + std::to_string(t) + " K is not below T_C = " +
                    std::to_string(spec.critical_temperature_K) + " K");
  }
  return spec.lk0_nH() * temperature_factor(t, spec.critical_temperature_K);
}

double lk_of_current(const FilmSpec& spec, const BiasState& bias, double lk0_at_T_nH) {
  return lk0_at_T_nH * current_factor(bias.dc_current_uA, bias.rf_current_uA, spec.nonlinearity_current_uA);
}

double switching_current(const FilmSpec& spec) {
  // (A/mm^2)(um)(nm) = 1e6 * 1e-6 * 1e-9 A = 1e-9 A = 1e-3 uA
  return spec.critical_current_density_A_mm2 * spec.width_um * spec.thickness_nm * 1e-3;
}

double switching_current_at(const FilmSpec& spec, double temperature_K) {
  const double reduced = temperature_K / spec.critical_temperature_K;
  if (reduced >= 1.0) return 0.0;
  return switching_current(spec) * std::pow(1.0 - reduced * reduced, 1.5);
}

Eigen::ArrayXd iv_curve(const FilmSpec& spec, const Eigen::ArrayXd& currents_uA, double switching_uA) {
  // uA * kOhm = mV
  return (currents_uA.abs() > switching_uA).select(currents_uA * spec.normal_resistance_kOhm, 0.0);
}

Eigen::ArrayXd iv_curve(const FilmSpec& spec, const Eigen::ArrayXd& currents_uA) {
  return iv_curve(spec, currents_uA, switching_current(spec));
}

double resistance_of_temperature(const FilmSpec& spec, double temperature_K, double smoothing_K) {
  if (smoothing_K > 0.0) {
    const double x = (temperature_K - spec.critical_temperature_K) / smoothing_K;
    return spec.normal_resistance_kOhm / (1.0 + std::exp(-x));
  }
  return temperature_K >= spec.critical_temperature_K ? spec.normal_resistance_kOhm : 0.0;
}

double cooper_pair_density(const FilmSpec& spec) {
  using namespace constants;
  const double sheet_H = spec.sheet_lk0_nH * 1e-9;
  const double thickness_m = spec.thickness_nm * 1e-9;
  return electron_mass / (2.0 * square(elementary_charge) * thickness_m * sheet_H);
}

}  // namespace kisim
