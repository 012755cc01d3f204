#include "kisim/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>

#include "kisim/error.hpp"
#include "kisim/film_physics.hpp"
#include "kisim/models.hpp"
#include "kisim/parallel.hpp"
#include "kisim/resonator.hpp"
#include "kisim/set_device.hpp"

#ifndef KISIM_VERSION
#define KISIM_VERSION "dev"
#endif

namespace kisim::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SweepResult with_provenance(const ExperimentConfig& config, const std::string& experiment) {
  SweepResult r;
  r.provenance = {{"kisim", KISIM_VERSION},
                  {"experiment", experiment},
                  {"config_hash", config_hash(config)},
                  {"seed", std::to_string(config.seed)}};
  return r;
}

double to_dB(Complex s) { return 20.0 * std::log10(std::abs(s)); }

/// Ohms for an SET operating point.
double set_shunt_Ohm(const SetSpec& set, double gate_mV) { return resistance(set, {gate_mV, 0.0}) * 1e3; }

double blockade_shunt_Ohm(const SetSpec& set) { return set.off_resistance_GOhm * 1e9; }

double lossless_resonance_Hz(const ResonatorSpec& spec, double lk_nH) {
  return 1.0 / (two_pi * std::sqrt(lk_nH * 1e-9 * spec.total_capacitance_fF() * 1e-15));
}

/// Runs `fn` and turns a library error into an error-code string.
template <typename Fn>
std::optional<std::string> guarded(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return std::string(to_string(e.code()));
  }
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------

SweepResult run_iv(const ExperimentConfig& config, bool parallel) {
  const Eigen::ArrayXd currents = config.axis("dc_current").values();
  const auto& temps = config.iv.temperatures_K;

  std::vector<Eigen::ArrayXd> volts(temps.size());
  std::vector<double> switching(temps.size());
  parallel_for(
      temps.size(),
      [&](std::size_t k) {
        switching[k] = switching_current_at(config.film, temps[k]);
        volts[k] = iv_curve(config.film, currents, switching[k]);
      },
      parallel);

  SweepResult r = with_provenance(config, "iv");
  Table& iv = r.add_table("iv", {"temperature_K", "current_uA", "voltage_mV"});
  for (std::size_t k = 0; k < temps.size(); ++k)
    for (Eigen::Index i = 0; i < currents.size(); ++i) iv.add_row({temps[k], currents(i), volts[k](i)});
  Table& sw = r.add_table("switching", {"temperature_K", "switching_uA", "resistance_kOhm"});
  for (std::size_t k = 0; k < temps.size(); ++k)
    sw.add_row({temps[k], switching[k], resistance_of_temperature(config.film, temps[k])});
  return r;
}

// ---------------------------------------------------------------------------

SweepResult run_s11(const ExperimentConfig& config, bool parallel) {
  const Eigen::ArrayXd freqs = config.axis("frequency").values();
  const ResonatorSpec& spec = config.resonator;
  const double off = blockade_shunt_Ohm(config.set);
  const double on = set_shunt_Ohm(config.set, config.set.peak_position_mV(0));
  SweepResult r = with_provenance(config, "s11");

  double lk = kNaN;
  const auto lk_error = guarded([&] { lk = lk_of_temperature(config.film, config.thermal); });
  const Complex normal = Complex(spec.contact_resistance_Ohm + config.film.normal_resistance_kOhm * 1e3, 0.0);

  Table& spectrum = r.add_table("spectrum", {"frequency_Hz", "s11_dB", "s11_phase_rad", "s11_on_dB", "s11_normal_dB"});
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(freqs.size()));
  parallel_for(
      rows.size(),
      [&](std::size_t i) {
        const double f = freqs(static_cast<Eigen::Index>(i));
        const Complex normal_s11 =
            reflection_coefficient(input_impedance_with_branch(spec, normal, off, f), spec.line_impedance_Ohm);
        if (lk_error) {
          rows[i] = {f, kNaN, kNaN, kNaN, to_dB(normal_s11)};
          return;
        }
        const Complex sc = s11(spec, lk, off, f);
        rows[i] = {f, to_dB(sc), std::arg(sc), to_dB(s11(spec, lk, on, f)), to_dB(normal_s11)};
      },
      parallel);
  for (auto& row : rows) spectrum.add_row(std::move(row), lk_error.value_or("ok"));

  Table& res = r.add_table("resonance", {"lk_nH", "analytic_resonance_Hz", "resonance_Hz", "dip_depth_dB",
                                         "linewidth_Hz", "loaded_q", "on_resonance_Hz", "on_dip_depth_dB",
                                         "contrast_dB", "normal_min_dB"});
  double normal_min = std::numeric_limits<double>::infinity();
  for (const auto& row : spectrum.rows) normal_min = std::min(normal_min, row[4]);
  if (lk_error) {
    res.add_error_row({}, *lk_error);
    return r;
  }
  ResonanceSummary sc_dip, on_dip;
  const double lo = freqs.minCoeff(), hi = freqs.maxCoeff();
  const auto dip_error = guarded([&] {
    sc_dip = find_resonance(spec, lk, off, lo, hi);
    on_dip = find_resonance(spec, lk, on, lo, hi);
  });
  if (dip_error) {
    res.add_error_row({lk, lossless_resonance_Hz(spec, lk)}, *dip_error);
    return r;
  }
  const double f_probe = on_dip.resonance_Hz;
  const double contrast = to_dB(s11(spec, lk, off, f_probe)) - to_dB(s11(spec, lk, on, f_probe));
  res.add_row({lk, lossless_resonance_Hz(spec, lk), sc_dip.resonance_Hz, sc_dip.dip_depth_dB, sc_dip.linewidth_Hz,
               sc_dip.loaded_q, on_dip.resonance_Hz, on_dip.dip_depth_dB, contrast, normal_min});
  return r;
}

// ---------------------------------------------------------------------------

SweepResult run_stability_map(const ExperimentConfig& config, bool parallel) {
  const Eigen::ArrayXd gate = config.axis("V_GS").values();
  const Eigen::ArrayXd drain = config.axis("V_DS").values();
  const ResonatorSpec& spec = config.resonator;
  const SetSpec& set = config.set;
  const double lk = lk_of_temperature(config.film, config.thermal);
  const double on = set_shunt_Ohm(set, set.peak_position_mV(0));
  const double off = blockade_shunt_Ohm(set);

  double probe = config.stability_map.probe_frequency_Hz;
  if (probe == 0.0) {
    const double f0 = lossless_resonance_Hz(spec, lk);
    probe = find_resonance(spec, lk, on, 0.8 * f0, 1.2 * f0).resonance_Hz;
  }

  const auto n_gate = static_cast<std::size_t>(gate.size());
  const auto n_drain = static_cast<std::size_t>(drain.size());
  std::vector<std::vector<double>> rows(n_gate * n_drain);
  parallel_for(
      n_gate,
      [&](std::size_t i) {
        for (std::size_t j = 0; j < n_drain; ++j) {
          const BiasPoint bias{gate(static_cast<Eigen::Index>(i)), drain(static_cast<Eigen::Index>(j))};
          const Complex s = s11(spec, lk, resistance(set, bias) * 1e3, probe);
          rows[i * n_drain + j] = {bias.gate_source_mV, bias.drain_source_mV, conductance(set, bias),
                                   current(set, bias), to_dB(s), std::arg(s)};
        }
      },
      parallel);

  SweepResult r = with_provenance(config, "stability_map");
  Table& map = r.add_table("map", {"V_GS_mV", "V_DS_mV", "conductance_uS", "current_nA", "s11_dB", "s11_phase_rad"});
  for (auto& row : rows) map.add_row(std::move(row));
  Table& p = r.add_table("probe", {"probe_frequency_Hz", "s11_on_dB", "s11_off_dB", "contrast_dB", "gate_period_mV"});
  const double on_dB = to_dB(s11(spec, lk, on, probe));
  const double off_dB = to_dB(s11(spec, lk, off, probe));
  p.add_row({probe, on_dB, off_dB, off_dB - on_dB, set.gate_period_mV()});
  return r;
}

// ---------------------------------------------------------------------------

std::vector<SnrPoint> snr_ladder(const IQTrace& on, const IQTrace& off, const std::vector<std::size_t>& windows) {
  std::vector<SnrPoint> out;
  out.reserve(windows.size());
  for (std::size_t w : windows) {
    const IQTrace a = boxcar_downsample(on, w);
    const IQTrace b = boxcar_downsample(off, w);
    out.push_back({a.t_int_per_sample_s, snr(fit_blob(a.samples), fit_blob(b.samples))});
  }
  return out;
}

namespace {

struct BenchmarkRow {
  std::string status = "ok";
  double frequency_Hz = kNaN;
  double contrast = kNaN;  // |S11_on - S11_off|
  std::vector<SnrPoint> ladder;
  TminEstimate tmin;
};

/// Probe frequency maximising |S11_on - S11_off| over a warm-started downward sweep.
std::pair<double, std::pair<Complex, Complex>> best_probe(const ExperimentConfig& config, double power_dBm,
                                                          double on_Ohm, double off_Ohm) {
  const SnrOptions& o = config.snr_benchmark;
  const Eigen::ArrayXd freqs = Eigen::ArrayXd::LinSpaced(o.search_points, o.search_hi_Hz, o.search_lo_Hz);
  const auto on = sweep_frequency(config.resonator, config.film, config.thermal, o.dc_current_uA, power_dBm, on_Ohm,
                                  freqs, SweepMode::WarmStart);
  const auto off = sweep_frequency(config.resonator, config.film, config.thermal, o.dc_current_uA, power_dBm,
                                   off_Ohm, freqs, SweepMode::WarmStart);
  std::size_t best = on.size();
  double best_contrast = -1.0;
  for (std::size_t i = 0; i < on.size(); ++i) {
    const bool usable = on[i].converged && off[i].converged && on[i].state == FilmState::Superconducting &&
                        off[i].state == FilmState::Superconducting;
    if (!usable) continue;
    const double c = std::norm(on[i].s11 - off[i].s11);
    if (c > best_contrast) {
      best_contrast = c;
      best = i;
    }
  }
  if (best == on.size()) {
    throw Error(ErrorCode::NoResonanceInRange, "no probe frequency keeps both SET states superconducting");
  }
  return {freqs(static_cast<Eigen::Index>(best)), {on[best].s11, off[best].s11}};
}

std::vector<std::size_t> benchmark_windows(const ExperimentConfig& config) {
  const SweepAxis* axis = config.find_axis("W_BC");
  if (axis == nullptr) return config.snr_benchmark.windows;
  std::vector<std::size_t> out;
  const Eigen::ArrayXd v = axis->values();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto w = static_cast<std::size_t>(std::max(1.0, std::round(v(i))));
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
  }
  return out;
}

}  // namespace

SweepResult run_snr_benchmark(const ExperimentConfig& config, bool parallel) {
  const Eigen::ArrayXd powers = config.axis("rf_power").values();
  const SnrOptions& o = config.snr_benchmark;
  const std::vector<std::size_t> windows = benchmark_windows(config);
  const SetSpec& set = config.set;
  const double peak = set.peak_position_mV(o.peak_index);
  const double offset = o.background_offset_mV != 0.0 ? o.background_offset_mV : 0.5 * set.gate_period_mV();
  const double on_Ohm = set_shunt_Ohm(set, peak);
  const double off_Ohm = set_shunt_Ohm(set, peak + offset);

  std::vector<BenchmarkRow> rows(static_cast<std::size_t>(powers.size()));
  parallel_for(
      rows.size(),
      [&](std::size_t k) {
        BenchmarkRow& row = rows[k];
        const double power = powers(static_cast<Eigen::Index>(k));
        const auto err = guarded([&] {
          const auto [f, states] = best_probe(config, power, on_Ohm, off_Ohm);
          row.frequency_Hz = f;
          row.contrast = std::abs(states.first - states.second);
          ChainSpec chain = config.chain;
          chain.rng_seed = derive_seed(config.seed, 4 * k);
          IQTrace on = synthesize_trace(chain, states.first, power, o.samples);
          chain.rng_seed = derive_seed(config.seed, 4 * k + 1);
          IQTrace off = synthesize_trace(chain, states.second, power, o.samples);
          if (o.shuffle) {
            on = shuffled(on, derive_seed(config.seed, 4 * k + 2));
            off = shuffled(off, derive_seed(config.seed, 4 * k + 3));
          }
          row.ladder = snr_ladder(on, off, windows);
          row.tmin = tmin_extrapolate(row.ladder);
        });
        if (err) row.status = *err;
      },
      parallel);

  SweepResult r = with_provenance(config, "snr_benchmark");
  Table& snr_table = r.add_table("snr", {"power_dBm", "window", "t_int_s", "snr"});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < rows[k].ladder.size(); ++i) {
      snr_table.add_row({powers(static_cast<Eigen::Index>(k)), static_cast<double>(windows[i]),
                         rows[k].ladder[i].t_int_s, rows[k].ladder[i].snr});
    }
  }
  Table& tmin = r.add_table("tmin", {"power_dBm", "probe_frequency_Hz", "contrast", "t_min_s", "slope",
                                     "t_min_stderr_s", "extrapolation_ratio"});
  std::vector<PowerLawPoint> law;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double p = powers(static_cast<Eigen::Index>(k));
    const BenchmarkRow& row = rows[k];
    if (row.status != "ok") {
      tmin.add_error_row({p, row.frequency_Hz, row.contrast}, row.status);
      continue;
    }
    tmin.add_row({p, row.frequency_Hz, row.contrast, row.tmin.t_min_s, row.tmin.slope, row.tmin.t_min_stderr_s,
                  row.tmin.extrapolation_ratio});
    law.push_back({dbm_to_watts(p), row.tmin.t_min_s});
  }
  Table& fit = r.add_table("power_law", {"split_dBm", "exponent_low", "exponent_high", "points_low", "points_high"});
  PowerLawFit pl;
  const auto err = guarded([&] { pl = fit_power_law(law, dbm_to_watts(o.split_dBm)); });
  if (err) {
    fit.add_error_row({o.split_dBm}, *err);
  } else {
    fit.add_row({o.split_dBm, pl.low_exponent, pl.high_exponent, static_cast<double>(pl.low_count),
                 static_cast<double>(pl.high_count)});
  }
  return r;
}

// ---------------------------------------------------------------------------

SweepResult run_nonlinear_sweep(const ExperimentConfig& config, bool parallel) {
  const Eigen::ArrayXd powers = config.axis("rf_power").values();
  const NonlinearSweepOptions& o = config.nonlinear;
  const double shunt = blockade_shunt_Ohm(config.set);
  const auto n = static_cast<std::size_t>(powers.size());

  std::vector<NonlinearResonance> found(n);
  std::vector<std::string> status(n, "ok");
  std::vector<std::vector<OperatingPoint>> spectra(n);
  const Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(o.search_points, o.search_hi_Hz, o.search_lo_Hz);
  parallel_for(
      n,
      [&](std::size_t k) {
        const double p = powers(static_cast<Eigen::Index>(k));
        const auto err = guarded([&] {
          found[k] = find_nonlinear_resonance(config.resonator, config.film, config.thermal, o.dc_current_uA, p,
                                              shunt, o.search_lo_Hz, o.search_hi_Hz, o.search_points);
        });
        if (err) status[k] = *err;
        if (o.spectra) {
          spectra[k] = sweep_frequency(config.resonator, config.film, config.thermal, o.dc_current_uA, p, shunt,
                                       grid, SweepMode::WarmStart);
        }
      },
      parallel);

  SweepResult r = with_provenance(config, "nonlinear");
  Table& res = r.add_table("resonance", {"power_dBm", "resonance_Hz", "dip_depth_dB", "linewidth_Hz",
                                         "rf_current_uA", "lk_nH", "any_normal", "all_converged"});
  for (std::size_t k = 0; k < n; ++k) {
    const double p = powers(static_cast<Eigen::Index>(k));
    if (status[k] != "ok") {
      res.add_error_row({p}, status[k]);
      continue;
    }
    const NonlinearResonance& f = found[k];
    res.add_row({p, f.summary.resonance_Hz, f.summary.dip_depth_dB, f.summary.linewidth_Hz,
                 f.at_resonance.rf_current_uA, f.at_resonance.lk_effective_nH, f.any_normal ? 1.0 : 0.0,
                 f.all_converged ? 1.0 : 0.0});
  }
  if (o.spectra) {
    Table& sp = r.add_table("spectrum", {"power_dBm", "frequency_Hz", "s11_dB", "normal", "converged"});
    for (std::size_t k = 0; k < n; ++k) {
      // Stored in sweep order (descending); written ascending.
      for (auto it = spectra[k].rbegin(); it != spectra[k].rend(); ++it) {
        sp.add_row({powers(static_cast<Eigen::Index>(k)), it->frequency_Hz, to_dB(it->s11),
                    it->state == FilmState::Normal ? 1.0 : 0.0, it->converged ? 1.0 : 0.0});
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

FitReport run_fit(const Table& data, const std::string& model_name, const Eigen::VectorXd& guess) {
  detail::require(data.columns.size() >= 2 && data.columns.size() <= 3,
                  "fit data needs columns x, y and optionally weight");
  detail::require(!data.rows.empty(), "fit data has no rows");
  const auto m = static_cast<Eigen::Index>(data.rows.size());
  Eigen::ArrayXd x(m), y(m), w;
  if (data.columns.size() == 3) w.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = data.rows[static_cast<std::size_t>(i)];
    x(i) = row[0];
    y(i) = row[1];
    if (w.size() != 0) w(i) = row[2];
  }
  return fit_model(find_model(model_name), x, y, guess, w);
}

SweepResult fit_result(const FitReport& report, const std::string& model_name, const std::string& input_hash) {
  SweepResult r;
  r.provenance = {{"kisim", KISIM_VERSION},
                  {"experiment", "fit"},
                  {"config_hash", input_hash},
                  {"model", model_name},
                  {"converged", report.converged ? "true" : "false"},
                  {"iterations", std::to_string(report.iterations)},
                  {"residual_norm", format_number(report.residual_norm)},
                  {"gradient_norm", format_number(report.gradient_norm)}};
  const std::string status = report.converged ? "ok" : std::string(to_string(ErrorCode::NotConverged));
  Table& values = r.add_table("parameters", report.names);
  values.add_row(std::vector<double>(report.parameters.data(), report.parameters.data() + report.parameters.size()),
                 status);
  Table& errors = r.add_table("stderr", report.names);
  std::vector<double> se;
  for (Eigen::Index j = 0; j < report.parameters.size(); ++j) se.push_back(std::sqrt(report.covariance(j, j)));
  errors.add_row(se, status);
  return r;
}

}  // namespace kisim::harness
