#include "kisim/set_device.hpp"

#include <cmath>

#include "kisim/error.hpp"

namespace kisim {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Thermal smearing width of a lead's Fermi edge, mV.
double edge_width_mV(const SetSpec& spec) {
  return 1.25 * constants::boltzmann * spec.electron_temperature_K / constants::elementary_charge * 1e3;
}

double floor_conductance_uS(const SetSpec& spec) { return 1e-3 / spec.off_resistance_GOhm; }

}  // namespace

void SetSpec::validate() const {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  detail::require(positive(gate_capacitance_aF) && positive(source_capacitance_aF) &&
                      positive(drain_capacitance_aF),
                  "SetSpec capacitances must be > 0");
  detail::require(positive(peak_conductance_uS), "SetSpec.peak_conductance_uS must be > 0");
  detail::require(positive(electron_temperature_K), "SetSpec.electron_temperature_K must be > 0");
  detail::require(positive(off_resistance_GOhm), "SetSpec.off_resistance_GOhm must be > 0");
  const double charging_J = square(constants::elementary_charge) / (total_capacitance_aF() * 1e-18);
  detail::require(charging_J > constants::boltzmann * electron_temperature_K,
                  "SetSpec: charging energy must exceed k_B T_e (Coulomb blockade regime)");
}

double SetSpec::gate_period_mV() const { return constants::elementary_charge / (gate_capacitance_aF * 1e-18) * 1e3; }

double SetSpec::charging_energy_meV() const {
  return constants::elementary_charge / (total_capacitance_aF() * 1e-18) * 1e3;
}

double SetSpec::peak_position_mV(long index) const {
  const double shift = (charge_offset % 2 != 0) ? 0.5 : 0.0;
  return (static_cast<double>(index) + shift) * gate_period_mV();
}

double conductance(const SetSpec& spec, const BiasPoint& bias) {
  const double period = spec.gate_period_mV();
  const double sum = spec.total_capacitance_aF();
  const double lever = spec.gate_capacitance_aF / sum;
  const double source_share = spec.source_capacitance_aF / sum;
  const double width = edge_width_mV(spec);
  const double v_ds = bias.drain_source_mV;

  // Offset from the nearest peak; periodic in V_GS by construction.
  const double u = std::remainder(bias.gate_source_mV - spec.peak_position_mV(0), period);
  const int levels = static_cast<int>(std::ceil(2.0 * std::abs(v_ds) / spec.charging_energy_meV())) + 3;

  double window = 0.0;
  for (int j = -levels; j <= levels; ++j) {
    const double a = lever * (u - j * period) + source_share * v_ds;
    const double b = a - v_ds;
    window += logistic(a / width) * logistic(-b / width) + logistic(-a / width) * logistic(b / width);
  }
  return std::max(2.0 * spec.peak_conductance_uS * window, floor_conductance_uS(spec));
}

double resistance(const SetSpec& spec, const BiasPoint& bias) {
  // uS -> kOhm
  return std::min(1e3 / conductance(spec, bias), spec.off_resistance_GOhm * 1e6);
}

double current(const SetSpec& spec, const BiasPoint& bias) {
  const double v = bias.drain_source_mV;
  if (v == 0.0) return 0.0;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(v) / 0.01)));
  const double h = v / steps;
  double total = 0.5 * (conductance(spec, {bias.gate_source_mV, 0.0}) + conductance(spec, bias));
  for (int k = 1; k < steps; ++k) total += conductance(spec, {bias.gate_source_mV, k * h});
  return total * h;  // uS * mV = nA
}

Eigen::ArrayXXd conductance_map(const SetSpec& spec, const Eigen::ArrayXd& gate_mV, const Eigen::ArrayXd& drain_mV) {
  Eigen::ArrayXXd out(gate_mV.size(), drain_mV.size());
  for (Eigen::Index i = 0; i < gate_mV.size(); ++i)
    for (Eigen::Index j = 0; j < drain_mV.size(); ++j) out(i, j) = conductance(spec, {gate_mV(i), drain_mV(j)});
  return out;
}

}  // namespace kisim
