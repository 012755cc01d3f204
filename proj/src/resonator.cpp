#include "kisim/resonator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kisim/error.hpp"
#include "kisim/parallel.hpp"

namespace kisim {

namespace {

constexpr double kFemto = 1e-15;
constexpr double kNano = 1e-9;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInvPhi = 0.6180339887498949;  // 1 / golden ratio

Complex inductor_branch(const ResonatorSpec& spec, double lk_nH, double omega) {
  return {spec.contact_resistance_Ohm, omega * lk_nH * kNano};
}

Complex normal_branch(const ResonatorSpec& spec, const FilmSpec& film) {
  return {spec.contact_resistance_Ohm + film.normal_resistance_kOhm * 1e3, 0.0};
}

struct Sample {
  double x;
  double fx;
};

template <typename Fn>
Sample golden_minimize(Fn&& fn, double a, double b, double rel_tol) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  while ((b - a) > rel_tol * std::abs(0.5 * (a + b))) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  return fc <= fd ? Sample{c, fc} : Sample{d, fd};
}

/// Bisection for fn(x) == level between a (below level) and b (above level).
template <typename Fn>
double bisect_level(Fn&& fn, double a, double b, double level, double rel_tol) {
  for (int k = 0; k < 200 && std::abs(b - a) > rel_tol * std::abs(0.5 * (a + b)); ++k) {
    const double m = 0.5 * (a + b);
    if (fn(m) < level) {
      a = m;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// Summarises a dip given grid samples and the chosen grid minimum.
template <typename Fn>
ResonanceSummary summarize_dip(Fn&& magnitude, const Eigen::ArrayXd& freqs, const Eigen::ArrayXd& mags,
                               Eigen::Index best) {
  const Eigen::Index n = freqs.size();
  if (best <= 0 || best >= n - 1) {
    throw Error(ErrorCode::NoResonanceInRange, "no interior |S11| minimum in the frequency range");
  }
  if (!(mags(best) < 1.0 - 1e-6)) {
    throw Error(ErrorCode::NoResonanceInRange, "|S11| has no dip below 1 - 1e-6 in range");
  }

  const Sample refined = golden_minimize(magnitude, freqs(best - 1), freqs(best + 1), 1e-9);
  ResonanceSummary out;
  out.resonance_Hz = refined.x;
  out.min_magnitude = std::min(refined.fx, mags(best));
  if (mags(best) < refined.fx) out.resonance_Hz = freqs(best);
  out.dip_depth_dB = -20.0 * std::log10(out.min_magnitude);

  const double level = 0.5 * (mags.maxCoeff() + out.min_magnitude);
  double left = kNaN;
  double right = kNaN;
  for (Eigen::Index j = best; j > 0; --j) {
    if (mags(j - 1) >= level) {
      left = bisect_level(magnitude, freqs(j), freqs(j - 1), level, 1e-10);
      break;
    }
  }
  for (Eigen::Index j = best; j < n - 1; ++j) {
    if (mags(j + 1) >= level) {
      right = bisect_level(magnitude, freqs(j), freqs(j + 1), level, 1e-10);
      break;
    }
  }
  out.linewidth_Hz = right - left;
  out.loaded_q = out.resonance_Hz / out.linewidth_Hz;
  return out;
}

Eigen::ArrayXd uniform_grid(double lo, double hi, int points) {
  return Eigen::ArrayXd::LinSpaced(points, lo, hi);
}

}  // namespace

void ResonatorSpec::validate() const {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  detail::require(positive(coupling_capacitance_fF), "ResonatorSpec.coupling_capacitance_fF must be > 0");
  detail::require(positive(resonator_capacitance_fF), "ResonatorSpec.resonator_capacitance_fF must be > 0");
  detail::require(positive(parasitic_capacitance_fF), "ResonatorSpec.parasitic_capacitance_fF must be > 0");
  detail::require(positive(line_impedance_Ohm), "ResonatorSpec.line_impedance_Ohm must be > 0");
  detail::require(std::isfinite(contact_resistance_Ohm) && contact_resistance_Ohm >= 0.0,
                  "ResonatorSpec.contact_resistance_Ohm must be >= 0");
}

Complex input_impedance_with_branch(const ResonatorSpec& spec, Complex branch_Ohm, double shunt_Ohm,
                                    double frequency_Hz) {
  const double omega = two_pi * frequency_Hz;
  const double shunt_capacitance = (spec.resonator_capacitance_fF + spec.parasitic_capacitance_fF) * kFemto;
  const Complex coupling{0.0, -1.0 / (omega * spec.coupling_capacitance_fF * kFemto)};
  return coupling + tank_impedance(omega, shunt_capacitance, branch_Ohm, shunt_Ohm);
}

Complex input_impedance(const ResonatorSpec& spec, double lk_nH, double shunt_Ohm, double frequency_Hz) {
  return input_impedance_with_branch(spec, inductor_branch(spec, lk_nH, two_pi * frequency_Hz), shunt_Ohm,
                                     frequency_Hz);
}

Complex s11(const ResonatorSpec& spec, double lk_nH, double shunt_Ohm, double frequency_Hz) {
  return reflection_coefficient(input_impedance(spec, lk_nH, shunt_Ohm, frequency_Hz), spec.line_impedance_Ohm);
}

Eigen::ArrayXcd s11_spectrum(const ResonatorSpec& spec, double lk_nH, double shunt_Ohm,
                             const Eigen::ArrayXd& frequencies_Hz) {
  return frequencies_Hz.unaryExpr([&](double f) { return s11(spec, lk_nH, shunt_Ohm, f); });
}

NetworkResponse solve_network(const ResonatorSpec& spec, Complex branch_Ohm, double shunt_Ohm,
                              double frequency_Hz, double source_V) {
  const double omega = two_pi * frequency_Hz;
  const double shunt_capacitance = (spec.resonator_capacitance_fF + spec.parasitic_capacitance_fF) * kFemto;
  NetworkResponse r;
  r.tank_impedance = tank_impedance(omega, shunt_capacitance, branch_Ohm, shunt_Ohm);
  r.input_impedance = Complex{0.0, -1.0 / (omega * spec.coupling_capacitance_fF * kFemto)} + r.tank_impedance;
  r.input_current = source_V / (spec.line_impedance_Ohm + r.input_impedance);
  r.tank_voltage = r.input_current * r.tank_impedance;
  r.branch_current = r.tank_voltage / branch_Ohm;
  return r;
}

double source_amplitude(const ResonatorSpec& spec, double drive_power_dBm) {
  // Available power P = V^2 / (8 Z_0) for a peak amplitude V behind Z_0.
  return std::sqrt(8.0 * spec.line_impedance_Ohm * dbm_to_watts(drive_power_dBm));
}

double lk_from_resonance(double frequency_Hz, const ResonatorSpec& spec) {
  return inductance_for_resonance(frequency_Hz, spec.total_capacitance_fF() * kFemto) / kNano;
}

double characteristic_impedance(double lk_nH, double capacitance_fF) {
  return std::sqrt(lk_nH * kNano / (capacitance_fF * kFemto)) * 1e-3;
}

ResonanceSummary find_dip(const std::function<double(double)>& magnitude, double f_lo_Hz, double f_hi_Hz,
                          int grid_points) {
  detail::require(f_lo_Hz > 0.0 && f_lo_Hz < f_hi_Hz, "find_dip: need 0 < f_lo < f_hi");
  detail::require(grid_points >= 3, "find_dip: need at least 3 grid points");
  const Eigen::ArrayXd freqs = uniform_grid(f_lo_Hz, f_hi_Hz, grid_points);
  const Eigen::ArrayXd mags = freqs.unaryExpr(magnitude);
  Eigen::Index best = 0;
  mags.minCoeff(&best);
  return summarize_dip(magnitude, freqs, mags, best);
}

ResonanceSummary find_resonance(const ResonatorSpec& spec, double lk_nH, double shunt_Ohm, double f_lo_Hz,
                                double f_hi_Hz, int grid_points) {
  spec.validate();
  return find_dip([&](double f) { return std::abs(s11(spec, lk_nH, shunt_Ohm, f)); }, f_lo_Hz, f_hi_Hz,
                  grid_points);
}

OperatingPoint nonlinear_operating_point(const ResonatorSpec& spec, const FilmSpec& film,
                                         const ThermalState& thermal, double dc_current_uA,
                                         double frequency_Hz, double drive_power_dBm, double shunt_Ohm,
                                         const std::optional<OperatingPoint>& warm_start,
                                         const NonlinearOptions& options) {
  detail::require(frequency_Hz > 0.0, "nonlinear_operating_point: frequency must be > 0");
  detail::require(!std::isnan(drive_power_dBm) && drive_power_dBm < std::numeric_limits<double>::infinity(),
                  "nonlinear_operating_point: drive power must be finite or -inf");

  const double lk_T = lk_of_temperature(film, thermal);
  const double i_sw = switching_current(film);
  const double v_src = source_amplitude(spec, drive_power_dBm);
  const double omega = two_pi * frequency_Hz;

  OperatingPoint op;
  op.frequency_Hz = frequency_Hz;
  op.drive_power_dBm = drive_power_dBm;

  auto go_normal = [&](double current_uA, int iterations) {
    op.state = FilmState::Normal;
    op.rf_current_uA = current_uA;
    op.lk_effective_nH = kNaN;
    op.iterations = iterations;
    op.converged = true;
    const Complex branch = normal_branch(spec, film);
    op.s11 = reflection_coefficient(input_impedance_with_branch(spec, branch, shunt_Ohm, frequency_Hz),
                                    spec.line_impedance_Ohm);
    return op;
  };

  double current = 0.0;
  if (warm_start && warm_start->state == FilmState::Superconducting && std::isfinite(warm_start->rf_current_uA)) {
    current = warm_start->rf_current_uA;
  }
  if (std::abs(dc_current_uA) + current > i_sw) return go_normal(current, 0);

  int k = 0;
  for (; k < options.max_iterations; ++k) {
    const double lk = lk_of_current(film, {dc_current_uA, current}, lk_T);
    const NetworkResponse r = solve_network(spec, inductor_branch(spec, lk, omega), shunt_Ohm, frequency_Hz, v_src);
    const double target = std::abs(r.branch_current) * 1e6;
    const double next = current + options.damping * (target - current);
    if (std::abs(dc_current_uA) + next > i_sw) return go_normal(next, k + 1);
    const double change = std::abs(next - current);
    current = next;
    if (change <= options.rel_tol * current) {
      op.converged = true;
      ++k;
      break;
    }
  }

  op.iterations = k;
  op.rf_current_uA = current;
  op.lk_effective_nH = lk_of_current(film, {dc_current_uA, current}, lk_T);
  op.s11 = reflection_coefficient(
      input_impedance_with_branch(spec, inductor_branch(spec, op.lk_effective_nH, omega), shunt_Ohm, frequency_Hz),
      spec.line_impedance_Ohm);
  return op;
}

NetworkResponse operating_point_response(const ResonatorSpec& spec, const FilmSpec& film,
                                         const OperatingPoint& op, double shunt_Ohm) {
  const double v_src = source_amplitude(spec, op.drive_power_dBm);
  const Complex branch = op.state == FilmState::Normal
                             ? normal_branch(spec, film)
                             : inductor_branch(spec, op.lk_effective_nH, two_pi * op.frequency_Hz);
  return solve_network(spec, branch, shunt_Ohm, op.frequency_Hz, v_src);
}

double stored_energy(const ResonatorSpec& spec, const NetworkResponse& response, double lk_nH,
                     double frequency_Hz) {
  const double omega = two_pi * frequency_Hz;
  const double c_shunt = (spec.resonator_capacitance_fF + spec.parasitic_capacitance_fF) * kFemto;
  const double c_coupling = spec.coupling_capacitance_fF * kFemto;
  const double coupling_voltage = std::abs(response.input_current) / (omega * c_coupling);
  return 0.25 * (lk_nH * kNano * std::norm(response.branch_current) + c_shunt * std::norm(response.tank_voltage) +
                 c_coupling * square(coupling_voltage));
}

double dissipated_power(const ResonatorSpec& spec, const NetworkResponse& response, double shunt_Ohm,
                        double film_series_Ohm) {
  return 0.5 * std::norm(response.branch_current) * (spec.contact_resistance_Ohm + film_series_Ohm) +
         0.5 * std::norm(response.tank_voltage) / shunt_Ohm;
}

double self_kerr(const ResonatorSpec& spec, const FilmSpec& film, double resonance_Hz, double lk_nH) {
  (void)spec;
  const double istar = film.nonlinearity_current_uA * 1e-6;
  return -two_pi * constants::hbar * square(resonance_Hz) / (lk_nH * kNano * square(istar));
}

std::vector<OperatingPoint> sweep_frequency(const ResonatorSpec& spec, const FilmSpec& film,
                                            const ThermalState& thermal, double dc_current_uA,
                                            double drive_power_dBm, double shunt_Ohm,
                                            const Eigen::ArrayXd& frequencies_Hz, SweepMode mode, bool parallel,
                                            const NonlinearOptions& options) {
  const auto n = static_cast<std::size_t>(frequencies_Hz.size());
  std::vector<OperatingPoint> out(n);
  if (mode == SweepMode::Independent) {
    parallel_for(
        n,
        [&](std::size_t i) {
          out[i] = nonlinear_operating_point(spec, film, thermal, dc_current_uA, frequencies_Hz(i), drive_power_dBm,
                                             shunt_Ohm, std::nullopt, options);
        },
        parallel);
    return out;
  }
  std::optional<OperatingPoint> previous;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = nonlinear_operating_point(spec, film, thermal, dc_current_uA, frequencies_Hz(i), drive_power_dBm,
                                       shunt_Ohm, previous, options);
    if (out[i].state == FilmState::Superconducting && out[i].converged) {
      previous = out[i];
    } else {
      previous.reset();
    }
  }
  return out;
}

NonlinearResonance find_nonlinear_resonance(const ResonatorSpec& spec, const FilmSpec& film,
                                            const ThermalState& thermal, double dc_current_uA,
                                            double drive_power_dBm, double shunt_Ohm, double f_lo_Hz,
                                            double f_hi_Hz, int grid_points) {
  detail::require(f_lo_Hz > 0.0 && f_lo_Hz < f_hi_Hz, "find_nonlinear_resonance: need 0 < f_lo < f_hi");
  detail::require(grid_points >= 3, "find_nonlinear_resonance: need at least 3 grid points");
  const Eigen::ArrayXd freqs = uniform_grid(f_lo_Hz, f_hi_Hz, grid_points);
  const Eigen::ArrayXd descending = freqs.reverse();
  std::vector<OperatingPoint> ops =
      sweep_frequency(spec, film, thermal, dc_current_uA, drive_power_dBm, shunt_Ohm, descending, SweepMode::WarmStart);
  std::reverse(ops.begin(), ops.end());

  NonlinearResonance out;
  Eigen::ArrayXd mags(grid_points);
  Eigen::Index best = -1;
  for (Eigen::Index i = 0; i < grid_points; ++i) {
    const auto& op = ops[static_cast<std::size_t>(i)];
    mags(i) = std::abs(op.s11);
    out.any_normal = out.any_normal || op.state == FilmState::Normal;
    out.all_converged = out.all_converged && op.converged;
    const bool usable = op.state == FilmState::Superconducting && op.converged;
    if (usable && (best < 0 || mags(i) < mags(best))) best = i;
  }
  if (best < 0) {
    throw Error(ErrorCode::NoResonanceInRange, "no superconducting operating point in the frequency range");
  }

  const OperatingPoint seed = ops[static_cast<std::size_t>(best)];
  auto magnitude = [&](double f) {
    return std::abs(
        nonlinear_operating_point(spec, film, thermal, dc_current_uA, f, drive_power_dBm, shunt_Ohm, seed).s11);
  };
  out.summary = summarize_dip(magnitude, freqs, mags, best);
  out.at_resonance =
      nonlinear_operating_point(spec, film, thermal, dc_current_uA, out.summary.resonance_Hz, drive_power_dBm,
                                shunt_Ohm, seed);
  return out;
}

}  // namespace kisim
