#include "kisim/readout_chain.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "kisim/constants.hpp"
#include "kisim/error.hpp"

namespace kisim {

void ChainSpec::validate() const {
  detail::require(std::isfinite(sample_rate_Hz) && sample_rate_Hz > 0.0, "ChainSpec.sample_rate_Hz must be > 0");
  detail::require(std::isfinite(noise_temperature_K) && noise_temperature_K >= 0.0,
                  "ChainSpec.noise_temperature_K must be >= 0");
  detail::require(std::isfinite(system_gain_dB), "ChainSpec.system_gain_dB must be finite");
}

double enbw(double lowpass_Hz, double eta, double averages) {
  detail::require(lowpass_Hz > 0.0 && eta > 0.0 && averages >= 1.0, "enbw: need f_LP > 0, eta > 0, N_avg >= 1");
  return eta * lowpass_Hz / averages;
}

double t_int_from_enbw(double enbw_Hz) { return 1.0 / (2.0 * enbw_Hz); }

double effective_enbw(const IQTrace& trace) {
  const double raw_rate = trace.sample_rate_Hz * static_cast<double>(trace.averages);
  return enbw(0.5 * raw_rate, 1.0, static_cast<double>(trace.averages));
}

double noise_variance(const ChainSpec& chain) {
  const double gain = std::pow(10.0, chain.system_gain_dB / 10.0);  // power gain
  return constants::boltzmann * chain.noise_temperature_K * enbw(0.5 * chain.sample_rate_Hz, 1.0, 1.0) * gain;
}

std::complex<double> noiseless_iq(const ChainSpec& chain, std::complex<double> s11, double drive_power_dBm) {
  const double gain = std::pow(10.0, chain.system_gain_dB / 20.0);
  return gain * std::sqrt(dbm_to_watts(drive_power_dBm)) * s11;
}

IQTrace synthesize_trace(const ChainSpec& chain, std::complex<double> s11, double drive_power_dBm,
                         std::size_t n_samples) {
  chain.validate();
  detail::require(n_samples >= 1, "synthesize_trace: need at least one sample");

  IQTrace trace;
  trace.sample_rate_Hz = chain.sample_rate_Hz;
  trace.t_int_per_sample_s = t_int_from_enbw(enbw(0.5 * chain.sample_rate_Hz, 1.0, 1.0));
  trace.averages = 1;

  const std::complex<double> mean = noiseless_iq(chain, s11, drive_power_dBm);
  trace.samples = Eigen::ArrayXcd::Constant(static_cast<Eigen::Index>(n_samples), mean);
  const double sigma = std::sqrt(0.5 * noise_variance(chain));
  if (sigma > 0.0) {
    std::mt19937_64 rng(chain.rng_seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (auto& z : trace.samples) {
      const double re = normal(rng);
      const double im = normal(rng);
      z += std::complex<double>(re, im);
    }
  }
  return trace;
}

IQTrace boxcar_downsample(const IQTrace& trace, std::size_t window) {
  detail::require(window >= 1, "boxcar_downsample: window must be >= 1");
  const auto n = static_cast<std::size_t>(trace.samples.size());
  if (window > n) {
    throw Error(ErrorCode::WindowTooLarge,
                "boxcar window " + std::to_string(window) + " exceeds trace length " + std::to_string(n));
  }
  const auto w = static_cast<Eigen::Index>(window);
  const Eigen::Index out_len = static_cast<Eigen::Index>(n / window);

  IQTrace out;
  out.sample_rate_Hz = trace.sample_rate_Hz / static_cast<double>(window);
  out.t_int_per_sample_s = trace.t_int_per_sample_s * static_cast<double>(window);
  out.averages = trace.averages * window;
  // Column k of the reshaped view holds window k.
  const Eigen::Map<const Eigen::ArrayXXcd> blocks(trace.samples.data(), w, out_len);
  out.samples = blocks.colwise().mean().transpose();
  return out;
}

IQTrace shuffled(const IQTrace& trace, std::uint64_t seed) {
  IQTrace out = trace;
  std::mt19937_64 rng(seed);
  std::shuffle(out.samples.begin(), out.samples.end(), rng);
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace kisim
