#pragma once

// Lumped-element model of the matching network:
//
//   port (Z_0) --- C_c ---+---------+-------------+----------+
//                         |         |             |          |
//                         C        C_p         R_contact   R_shunt (SET)
//                         |         |             |          |
//                         |         |            L_K         |
//                        gnd       gnd            |         gnd
//                                                gnd
//
// Z_in = Z(C_c) + [ Z(C) || Z(C_p) || (R_contact + j w L_K) || R_shunt ].
//
// Units: fF, nH, Ohm, Hz, dBm at the resonator input.

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kisim/constants.hpp"
#include "kisim/film_physics.hpp"

namespace kisim {

using Complex = std::complex<double>;

struct ResonatorSpec {
  double coupling_capacitance_fF = 164.0;
  double resonator_capacitance_fF = 114.0;
  double parasitic_capacitance_fF = 6.3;
  double contact_resistance_Ohm = 0.0;
  double line_impedance_Ohm = 50.0;

  void validate() const;
  double total_capacitance_fF() const {
    return coupling_capacitance_fF + resonator_capacitance_fF + parasitic_capacitance_fF;
  }
};

enum class FilmState { Superconducting, Normal };

struct OperatingPoint {
  double frequency_Hz = 0.0;
  double drive_power_dBm = 0.0;
  double lk_effective_nH = 0.0;  // NaN once the film has switched
  double rf_current_uA = 0.0;    // amplitude in the inductor branch
  FilmState state = FilmState::Superconducting;
  bool converged = false;
  int iterations = 0;
  Complex s11{};
};

struct ResonanceSummary {
  double resonance_Hz = 0.0;
  double dip_depth_dB = 0.0;
  double linewidth_Hz = 0.0;  // NaN when a half-depth crossing lies outside the range
  double loaded_q = 0.0;
  double min_magnitude = 1.0;
};

/// Currents and voltages (complex amplitudes) of the network for a given
/// Thevenin source amplitude.
struct NetworkResponse {
  Complex input_impedance;
  Complex tank_impedance;
  Complex input_current;
  Complex tank_voltage;
  Complex branch_current;  // through R_contact + inductor
};

// ---------------------------------------------------------------------------
// Templated kernels (SI units throughout).

/// Impedance of the shunt tank C || C_p || branch || R_shunt.
template <typename Scalar>
std::complex<Scalar> tank_impedance(Scalar omega, Scalar shunt_capacitance_F, std::complex<Scalar> branch,
                                    Scalar shunt_resistance) {
  const std::complex<Scalar> admittance =
      std::complex<Scalar>(Scalar(1) / shunt_resistance, omega * shunt_capacitance_F) + Scalar(1) / branch;
  return Scalar(1) / admittance;
}

template <typename Scalar>
std::complex<Scalar> reflection_coefficient(std::complex<Scalar> z, Scalar z0) {
  return (z - z0) / (z + z0);
}

/// L = 1 / ((2 pi f)^2 C)
template <typename Scalar>
Scalar inductance_for_resonance(Scalar frequency, Scalar capacitance) {
  const Scalar omega = Scalar(two_pi) * frequency;
  return Scalar(1) / (omega * omega * capacitance);
}

// ---------------------------------------------------------------------------

/// Z_in with an arbitrary complex impedance in the inductor branch (lets the
/// normal state replace L_K by a resistor).
Complex input_impedance_with_branch(const ResonatorSpec& spec, Complex branch_Ohm, double shunt_Ohm,
                                    double frequency_Hz);

Complex input_impedance(const ResonatorSpec& spec, double lk_nH, double shunt_Ohm, double frequency_Hz);

Complex s11(const ResonatorSpec& spec, double lk_nH, double shunt_Ohm, double frequency_Hz);

Eigen::ArrayXcd s11_spectrum(const ResonatorSpec& spec, double lk_nH, double shunt_Ohm,
                             const Eigen::ArrayXd& frequencies_Hz);

/// Network response for a source of amplitude `source_V` behind Z_0.
NetworkResponse solve_network(const ResonatorSpec& spec, Complex branch_Ohm, double shunt_Ohm,
                              double frequency_Hz, double source_V);

/// Open-circuit amplitude of a Z_0 source delivering `drive_power_dBm` into a matched load.
double source_amplitude(const ResonatorSpec& spec, double drive_power_dBm);

/// L_K = 1 / ((2 pi f)^2 C_tot), nH.
double lk_from_resonance(double frequency_Hz, const ResonatorSpec& spec);

/// sqrt(L / C) in kOhm.
double characteristic_impedance(double lk_nH, double capacitance_fF);

/// Golden-section refinement of the minimum of `magnitude` on [lo, hi]
/// after a uniform grid scan. Shared by the linear and nonlinear searches.
ResonanceSummary find_dip(const std::function<double(double)>& magnitude, double f_lo_Hz, double f_hi_Hz,
                          int grid_points = 4001);

/// Locates the |S11| minimum. Throws Error(NoResonanceInRange) if there is no
/// interior minimum below 1 - 1e-6.
ResonanceSummary find_resonance(const ResonatorSpec& spec, double lk_nH, double shunt_Ohm, double f_lo_Hz,
                                double f_hi_Hz, int grid_points = 4001);

struct NonlinearOptions {
  double damping = 0.5;
  double rel_tol = 1e-10;
  int max_iterations = 10000;
};

/// Self-consistent rf current and L_K for a CW drive. Never throws on
/// non-convergence: the last iterate is returned with converged = false.
OperatingPoint nonlinear_operating_point(const ResonatorSpec& spec, const FilmSpec& film,
                                         const ThermalState& thermal, double dc_current_uA,
                                         double frequency_Hz, double drive_power_dBm, double shunt_Ohm,
                                         const std::optional<OperatingPoint>& warm_start = std::nullopt,
                                         const NonlinearOptions& options = {});

/// Network solution corresponding to an operating point (normal state uses R_normal).
NetworkResponse operating_point_response(const ResonatorSpec& spec, const FilmSpec& film,
                                         const OperatingPoint& op, double shunt_Ohm);

/// Time-averaged electromagnetic energy in C_c, C, C_p and L_K, J.
double stored_energy(const ResonatorSpec& spec, const NetworkResponse& response, double lk_nH,
                     double frequency_Hz);

/// Time-averaged power dissipated in the contact, shunt and (if normal) film resistances, W.
double dissipated_power(const ResonatorSpec& spec, const NetworkResponse& response, double shunt_Ohm,
                        double film_series_Ohm = 0.0);

/// Self-Kerr shift per photon, Hz. Negative (the inductance softens the mode).
/// K = -2 pi hbar f_r^2 / (L_K I*^2) with I* interpreted as a current amplitude.
double self_kerr(const ResonatorSpec& spec, const FilmSpec& film, double resonance_Hz, double lk_nH);

enum class SweepMode { WarmStart, Independent };

/// Operating points along a frequency list. WarmStart walks the list in order
/// reusing the previous superconducting solution; Independent solves every
/// point from zero current, optionally on a worker pool.
std::vector<OperatingPoint> sweep_frequency(const ResonatorSpec& spec, const FilmSpec& film,
                                            const ThermalState& thermal, double dc_current_uA,
                                            double drive_power_dBm, double shunt_Ohm,
                                            const Eigen::ArrayXd& frequencies_Hz, SweepMode mode,
                                            bool parallel = false, const NonlinearOptions& options = {});

struct NonlinearResonance {
  ResonanceSummary summary;
  OperatingPoint at_resonance;
  bool any_normal = false;
  bool all_converged = true;
};

/// Dip of the power-dependent response: warm-started grid sweep (high to low
/// frequency) followed by golden-section refinement around the best
/// superconducting grid point.
NonlinearResonance find_nonlinear_resonance(const ResonatorSpec& spec, const FilmSpec& film,
                                            const ThermalState& thermal, double dc_current_uA,
                                            double drive_power_dBm, double shunt_Ohm, double f_lo_Hz,
                                            double f_hi_Hz, int grid_points = 801);

}  // namespace kisim
