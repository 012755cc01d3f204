#pragma once

// Gain + white-noise model of the reflectometry chain and the boxcar
// post-processing used to trade bandwidth for SNR.
//
// Demodulated samples are  I + jQ = g sqrt(P) S11 + n,  with amplitude gain
// g = 10^(gain_dB / 20), P the drive power in W, and n complex white Gaussian
// noise with E|n|^2 = k_B T_N ENBW g^2 (half of it in each quadrature).
// Sample values are therefore in sqrt(W) referred to the chain output.

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <cstdint>

namespace kisim {

struct ChainSpec {
  double system_gain_dB = 0.0;
  double noise_temperature_K = 4.0;  // amplifier-referred
  double sample_rate_Hz = 250e6;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct IQTrace {
  Eigen::ArrayXcd samples;
  double sample_rate_Hz = 0.0;     // rate of the samples held here
  double t_int_per_sample_s = 0.0; // 1 / (2 ENBW)
  std::size_t averages = 1;        // samples of the raw stream behind each entry
};

/// ENBW = eta f_LP / N_avg.
double enbw(double lowpass_Hz, double eta, double averages);

/// t_int = 1 / (2 ENBW).
double t_int_from_enbw(double enbw_Hz);

/// Equivalent noise bandwidth of a trace: Nyquist of the raw ADC stream over
/// the number of averaged samples.
double effective_enbw(const IQTrace& trace);

/// Total complex noise variance E|n|^2 per raw sample.
double noise_variance(const ChainSpec& chain);

/// Noise-free demodulated value for a reflection coefficient and drive power.
std::complex<double> noiseless_iq(const ChainSpec& chain, std::complex<double> s11, double drive_power_dBm);

/// Deterministic in chain.rng_seed.
IQTrace synthesize_trace(const ChainSpec& chain, std::complex<double> s11, double drive_power_dBm,
                         std::size_t n_samples);

/// Non-overlapping window means; the trailing partial window is dropped.
/// Throws Error(WindowTooLarge) if window > length, InvalidArgument if window < 1.
IQTrace boxcar_downsample(const IQTrace& trace, std::size_t window);

/// Random permutation of the sample order, deterministic in seed.
IQTrace shuffled(const IQTrace& trace, std::uint64_t seed);

/// splitmix64 finaliser over (base, stream): independent per-task seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace kisim
