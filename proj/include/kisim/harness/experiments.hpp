#pragma once

// Experiment recipes driven by an ExperimentConfig. Each returns a
// SweepResult whose preamble carries the config hash, seed and version.
//
//   run_iv              axis dc_current (uA); tables "iv", "switching"
//   run_s11             axis frequency (Hz); tables "spectrum", "resonance"
//   run_stability_map   axes V_GS, V_DS (mV); tables "map", "probe"
//   run_snr_benchmark   axis rf_power (dBm), optional W_BC; tables "snr", "tmin", "power_law"
//   run_nonlinear_sweep axis rf_power (dBm); tables "resonance", optionally "spectrum"

#include <Eigen/Core>

#include <string>
#include <vector>

#include "kisim/estimator.hpp"
#include "kisim/harness/config.hpp"
#include "kisim/harness/table.hpp"
#include "kisim/readout_chain.hpp"

namespace kisim::harness {

SweepResult run_iv(const ExperimentConfig& config, bool parallel = false);
SweepResult run_s11(const ExperimentConfig& config, bool parallel = false);
SweepResult run_stability_map(const ExperimentConfig& config, bool parallel = false);
SweepResult run_snr_benchmark(const ExperimentConfig& config, bool parallel = false);
SweepResult run_nonlinear_sweep(const ExperimentConfig& config, bool parallel = false);

/// Boxcar both traces over each window, fit blobs, and return SNR per t_int.
std::vector<SnrPoint> snr_ladder(const IQTrace& on, const IQTrace& off, const std::vector<std::size_t>& windows);

/// Fits a built-in model to columns (x, y[, weight]) of a numeric table.
FitReport run_fit(const Table& data, const std::string& model_name, const Eigen::VectorXd& guess);

/// Tables "parameters" and "stderr" (one row each, one column per parameter).
SweepResult fit_result(const FitReport& report, const std::string& model_name, const std::string& input_hash);

}  // namespace kisim::harness
