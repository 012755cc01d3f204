#pragma once

// Constant-interaction single-electron transistor.
//
// A transition between island charge states k and k+1 sits, relative to the
// first lead's Fermi level, at
//
//   a_k = (C_G (V_GS - V_k) + C_S V_DS) / C_sum        (volts)
//
// and at b_k = a_k - V_DS relative to the second lead. The transition carries
// current when it lies inside the bias window (a_k and b_k of opposite sign),
// which gives diamond edges of slope +C_G/(C_G + C_D) and -C_G/C_S in the
// (V_GS, V_DS) plane. Edges are thermally smeared with logistic occupations
// of width 1.25 k_B T_e / e, so that at V_DS = 0 each peak reduces to the
// metallic lineshape G_max cosh^-2(e a_k / (2.5 k_B T_e)).
//
// Units: aF, mV, uS, kOhm, nA, GOhm for R_off.

#include <Eigen/Core>

#include "kisim/constants.hpp"

namespace kisim {

struct SetSpec {
  double gate_capacitance_aF = 5.0;
  double source_capacitance_aF = 20.0;
  double drain_capacitance_aF = 15.0;
  double peak_conductance_uS = 20.0;
  double electron_temperature_K = 0.35;
  double off_resistance_GOhm = 10.0;
  int charge_offset = 0;  // odd offsets shift the peak comb by half a period

  /// Throws unless capacitances, G_max, T_e, R_off > 0 and E_C > k_B T_e.
  void validate() const;

  double total_capacitance_aF() const {
    return gate_capacitance_aF + source_capacitance_aF + drain_capacitance_aF;
  }
  double lever_arm() const { return gate_capacitance_aF / total_capacitance_aF(); }
  /// e / C_G in mV.
  double gate_period_mV() const;
  /// E_C = e^2 / C_sum, in meV (numerically E_C / e in mV).
  double charging_energy_meV() const;
  /// V_GS of Coulomb peak `index` at V_DS = 0.
  double peak_position_mV(long index = 0) const;
};

struct BiasPoint {
  double gate_source_mV = 0.0;
  double drain_source_mV = 0.0;
};

/// Differential conductance dI/dV_DS in uS, never below 1/R_off.
double conductance(const SetSpec& spec, const BiasPoint& bias);

/// 1/conductance in kOhm, saturating at R_off.
double resistance(const SetSpec& spec, const BiasPoint& bias);

/// Trapezoid integral of the conductance from 0 to V_DS (step <= 10 uV), nA.
double current(const SetSpec& spec, const BiasPoint& bias);

/// Conductance over a (V_GS x V_DS) grid; rows follow V_GS, columns V_DS.
Eigen::ArrayXXd conductance_map(const SetSpec& spec, const Eigen::ArrayXd& gate_mV, const Eigen::ArrayXd& drain_mV);

}  // namespace kisim
