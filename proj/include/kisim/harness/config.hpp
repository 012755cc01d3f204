#pragma once

// JSON experiment configuration. Grammar (all sections optional, unknown keys
// rejected):
//
//   {
//     "seed": 1,
//     "output_path": "out.tsv",
//     "film":      { "preset": "type_a" | "type_b", <FilmSpec fields> },
//     "resonator": { <ResonatorSpec fields> },
//     "set":       { <SetSpec fields> },
//     "chain":     { "system_gain_dB", "noise_temperature_K", "sample_rate_Hz" },
//     "thermal":   { "mxc_temperature_K", "electron_temperature_K" },
//     "sweep":     { "axis", "start", "stop", "points", "scale": "linear" | "log" }
//                  or a list of such objects,
//     "iv" | "s11" | "stability_map" | "snr_benchmark" | "nonlinear": { ... }
//   }
//
// The chain RNG seed is not configured directly; it is derived per task from "seed".

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kisim/film_physics.hpp"
#include "kisim/readout_chain.hpp"
#include "kisim/resonator.hpp"
#include "kisim/set_device.hpp"

namespace kisim::harness {

struct SweepAxis {
  std::string name;  // temperature, dc_current, rf_power, frequency, V_GS, V_DS, W_BC
  double start = 0.0;
  double stop = 0.0;
  int points = 2;
  bool log = false;

  Eigen::ArrayXd values() const;
};

const std::vector<std::string>& sweep_axis_names();

struct IvOptions {
  std::vector<double> temperatures_K{0.0, 0.6, 0.9, 1.2};
};

struct S11Options {
  double drive_power_dBm = -110.0;  // informational; the spectra are linear
};

struct StabilityOptions {
  double probe_frequency_Hz = 0.0;  // 0 selects the on-state resonance
};

struct SnrOptions {
  std::size_t samples = 131072;
  std::vector<std::size_t> windows{1, 2, 3, 4, 6, 8, 12, 16, 20, 24, 28, 32};
  bool shuffle = true;
  double split_dBm = -80.0;
  double dc_current_uA = 0.0;
  double search_lo_Hz = 760e6;
  double search_hi_Hz = 840e6;
  int search_points = 801;
  long peak_index = 0;
  double background_offset_mV = 0.0;  // 0 selects half a gate period
};

struct NonlinearSweepOptions {
  double dc_current_uA = 0.0;
  double search_lo_Hz = 760e6;
  double search_hi_Hz = 840e6;
  int search_points = 801;
  bool spectra = false;
};

struct ExperimentConfig {
  FilmSpec film = type_b_film();
  ResonatorSpec resonator;
  SetSpec set;
  ChainSpec chain;
  ThermalState thermal;
  std::vector<SweepAxis> sweeps;
  std::uint64_t seed = 0;
  std::string output_path;

  IvOptions iv;
  S11Options s11;
  StabilityOptions stability_map;
  SnrOptions snr_benchmark;
  NonlinearSweepOptions nonlinear;

  /// Canonical (sorted-key, compact) JSON of the source document, with any seed override applied.
  std::string canonical;

  const SweepAxis* find_axis(const std::string& name) const;
  /// Throws Error(ConfigError) if the axis is absent.
  const SweepAxis& axis(const std::string& name) const;
};

/// Throws Error(ConfigError) on malformed JSON, unknown keys, wrong types or
/// invalid values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Replaces the seed and refreshes the canonical text.
void apply_seed_override(ExperimentConfig& config, std::uint64_t seed);

/// FNV-1a 64 of the canonical text, 16 hex digits.
std::string config_hash(const ExperimentConfig& config);
std::string fnv1a_hex(const std::string& text);

}  // namespace kisim::harness
