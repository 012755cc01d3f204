// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kisim/constants.hpp"
#include "kisim/error.hpp"
#include "kisim/estimator.hpp"
#include "kisim/film_physics.hpp"
#include "kisim/harness/config.hpp"
#include "kisim/harness/experiments.hpp"
#include "kisim/models.hpp"
#include "kisim/readout_chain.hpp"
#include "kisim/resonator.hpp"
#include "kisim/set_device.hpp"

using namespace kisim;
using namespace kisim::harness;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string config_path(const std::string& name) { return std::string(KISIM_CONFIG_DIR) + "/" + name; }

// ---------------------------------------------------------------------------

Outcome ac01() {
  const ResonatorSpec spec;  // C_tot = 284.3 fF
  const auto t0 = Clock::now();
  const double lk = lk_from_resonance(823e6, spec);
  const double dt = seconds_since(t0);
  const double w = two_pi * 823e6;
  const double oracle = 1.0 / (w * w * 284.3e-15) * 1e9;
  const bool pass = std::abs(spec.total_capacitance_fF() - 284.3) < 1e-9 && std::abs(lk - oracle) < 1e-9 * oracle &&
                    std::abs(lk - 131.5) < 0.05 && std::abs(lk - 131.0) < 0.01 * 131.0 && dt < 1e-3;
  return {pass, "L_K = " + fmt("%.4f", lk) + " nH, runtime " + fmt("%.2e", dt) + " s"};
}

Outcome ac02() {
  FilmSpec f = type_b_film();
  f.width_um = 1.0;
  f.length_um = 139.0;
  const double sheet = 131.0 / f.squares();
  return {std::abs(sheet - 0.94) < 0.01 * 0.94, "sheet L_K = " + fmt("%.4f", sheet) + " nH/sq"};
}

Outcome ac03() {
  const double z = characteristic_impedance(807.0, 6.3);
  const double oracle = std::sqrt(807e-9 / 6.3e-15) * 1e-3;
  const double rq = constants::resistance_quantum * 1e-3;
  const bool pass = std::abs(z - oracle) < 1e-12 * oracle && std::abs(z - 11.32) < 0.005 &&
                    std::abs(z - 11.5) < 0.025 * 11.5 && z > rq;
  return {pass, "Z_L = " + fmt("%.3f", z) + " kOhm, R_Q = " + fmt("%.3f", rq) + " kOhm"};
}

Outcome ac04() {
  ChainSpec chain;  // 250 MHz, no filter
  const double t = t_int_from_enbw(enbw(0.5 * chain.sample_rate_Hz, 1.0, 1.0));
  const IQTrace trace = synthesize_trace(chain, Complex(1.0, 0.0), -100.0, 16);
  return {t == 4e-9 && trace.t_int_per_sample_s == 4e-9, "t_int = " + fmt("%.12g", t) + " s"};
}

Outcome ac05() {
  const CurveModel model = eq1_temperature_model();
  const double tc = 1.1, tel = 0.35, l0 = 131.0;
  Eigen::VectorXd truth(3);
  truth << l0, tc, tel;
  // Half the points near base temperature pin L0 and T_el, half close to T_C.
  Eigen::ArrayXd t(50);
  t.head(25) = Eigen::ArrayXd::LinSpaced(25, 0.0, 0.1);
  t.tail(25) = Eigen::ArrayXd::LinSpaced(25, 1.0, 1.095);
  const Eigen::ArrayXd clean = model.evaluate(t, truth);

  const auto t0 = Clock::now();
  int good = 0;
  const int trials = 200;
  for (int k = 0; k < trials; ++k) {
    std::mt19937_64 rng(derive_seed(5, static_cast<std::uint64_t>(k)));
    std::normal_distribution<double> noise(0.0, 0.02);
    Eigen::ArrayXd y = clean;
    for (auto& v : y) v *= 1.0 + noise(rng);
    Eigen::VectorXd guess(3);
    guess << y.minCoeff(), 1.15, 0.3;
    try {
      const FitReport r = fit_model(model, t, y, guess, y.inverse());
      if (std::abs(r.value("T_C_K") - tc) <= 0.03 * tc && std::abs(r.value("T_el_K") - tel) <= 0.03 * tel) ++good;
    } catch (const Error&) {
    }
  }
  const double dt = seconds_since(t0);
  const double rate = static_cast<double>(good) / trials;
  return {rate >= 0.95 && dt < 10.0, fmt("%.1f%%", 100.0 * rate) + " of 200 trials within 3%, " + fmt("%.2f", dt) + " s"};
}

Outcome ac06() {
  const FilmSpec f = type_b_film();
  const double l0 = 131.0;
  const Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(100, -30.0, 30.0);
  long mismatches = 0;
  for (double a : grid)
    for (double b : grid)
      if (lk_of_current(f, {a, b}, l0) != lk_of_current(f, {b, a}, l0)) ++mismatches;
  const bool zero = lk_of_current(f, {0.0, 0.0}, l0) == l0;
  return {mismatches == 0 && zero, std::to_string(mismatches) + " asymmetric grid points, zero bias " +
                                       (zero ? "exact" : "inexact")};
}

Outcome ac07() {
  ChainSpec chain;
  const Complex on_s11(0.2, 0.1), off_s11(0.6, -0.2);
  const double power = -100.0;
  chain.rng_seed = derive_seed(7, 0);
  const IQTrace on = synthesize_trace(chain, on_s11, power, 100000);
  chain.rng_seed = derive_seed(7, 1);
  const IQTrace off = synthesize_trace(chain, off_s11, power, 100000);
  const double sigma = std::sqrt(0.5 * noise_variance(chain));
  const double analytic =
      std::norm(noiseless_iq(chain, on_s11, power) - noiseless_iq(chain, off_s11, power)) / (0.25 * 4.0 * sigma * sigma);
  const double measured = snr(fit_blob(on.samples), fit_blob(off.samples));

  chain.rng_seed = derive_seed(7, 2);
  const IQTrace on_long = synthesize_trace(chain, on_s11, -115.0, 131072);
  chain.rng_seed = derive_seed(7, 3);
  const IQTrace off_long = synthesize_trace(chain, off_s11, -115.0, 131072);
  const TminEstimate e = tmin_extrapolate(snr_ladder(on_long, off_long, SnrOptions{}.windows));

  const bool pass = std::abs(measured - analytic) <= 0.05 * analytic && std::abs(e.slope - 1.0) <= 0.05;
  return {pass, "SNR " + fmt("%.4g", measured) + " vs " + fmt("%.4g", analytic) + ", slope " + fmt("%.4f", e.slope)};
}

Outcome ac08() {
  const ExperimentConfig c = load_config(config_path("snr_benchmark.json"));
  const SweepResult r = run_snr_benchmark(c, true);
  const Table& law = r.table("power_law");
  const double low = law.rows[0][law.column("exponent_low")];
  const double high = law.rows[0][law.column("exponent_high")];
  const bool pass = std::abs(low + 1.0) <= 0.15 && high <= -1.5;
  return {pass, "exponent " + fmt("%.3f", low) + " below " + fmt("%.0f dBm", c.snr_benchmark.split_dBm) + ", " +
                    fmt("%.3f", high) + " above"};
}

Outcome ac09() {
  const ExperimentConfig c = load_config(config_path("nonlinear.json"));
  const auto t0 = Clock::now();
  const SweepResult r = run_nonlinear_sweep(c, false);
  const Eigen::ArrayXd freqs = Eigen::ArrayXd::LinSpaced(c.nonlinear.search_points, c.nonlinear.search_hi_Hz,
                                                         c.nonlinear.search_lo_Hz);
  const auto high = sweep_frequency(c.resonator, c.film, c.thermal, 0.0, -50.0, c.set.off_resistance_GOhm * 1e9,
                                    freqs, SweepMode::WarmStart);
  const double dt = seconds_since(t0);

  const auto f = r.table("resonance").column_values("resonance_Hz");
  const auto p = c.axis("rf_power").values();
  bool monotone = f.size() == static_cast<std::size_t>(p.size()) && std::isfinite(f.front());
  for (std::size_t i = 1; i < f.size(); ++i) monotone = monotone && f[i] <= f[i - 1];
  double min_dB = 0.0;
  bool all_normal = true;
  for (const auto& op : high) {
    min_dB = std::min(min_dB, 20.0 * std::log10(std::abs(op.s11)));
    all_normal = all_normal && op.state == FilmState::Normal;
  }
  const bool pass = monotone && p(p.size() - 1) - p(0) >= 30.0 && min_dB > -0.5 && dt < 60.0;
  return {pass, std::string(monotone ? "monotone" : "NOT monotone") + " over " + fmt("%.0f dB", p(p.size() - 1) - p(0)) +
                    ", -50 dBm min " + fmt("%.3f dB", min_dB) + (all_normal ? " (normal)" : "") + ", " +
                    fmt("%.2f s", dt)};
}

Outcome ac10() {
  const ExperimentConfig c = load_config(config_path("stability_map.json"));
  const SweepResult r = run_stability_map(c, true);
  const SetSpec& s = c.set;
  const double period = s.gate_period_mV();
  const Table& probe = r.table("probe");
  const double contrast = probe.rows[0][probe.column("contrast_dB")];
  const bool period_exact =
      period == constants::elementary_charge / (s.gate_capacitance_aF * 1e-18) * 1e3 &&
      probe.rows[0][probe.column("gate_period_mV")] == period;

  // The rendered map repeats one period over: compare every cell with its shifted counterpart.
  const Eigen::ArrayXd gate = c.axis("V_GS").values();
  const Eigen::ArrayXd drain = c.axis("V_DS").values();
  const Eigen::ArrayXXd g0 = conductance_map(s, gate, drain);
  const Eigen::ArrayXXd g1 = conductance_map(s, gate + period, drain);
  const double worst = ((g1 - g0).abs() / g0).maxCoeff();

  // Diamonds close at V_DS = 0 on every peak inside the map and are open between peaks.
  bool closing = true;
  int peaks = 0;
  for (long k = -5; k <= 5; ++k) {
    const double vp = s.peak_position_mV(k);
    if (vp < gate(0) || vp > gate(gate.size() - 1)) continue;
    ++peaks;
    closing = closing && conductance(s, {vp, 0.0}) > 0.5 * s.peak_conductance_uS;
    closing = closing && conductance(s, {vp + 0.5 * period, 0.0}) < 1e-3 * s.peak_conductance_uS;
  }
  const bool pass = period_exact && worst < 1e-9 && closing && peaks >= 2 && contrast >= 3.0;
  return {pass, "period " + fmt("%.4f mV", period) + ", max periodic deviation " + fmt("%.1e", worst) + ", " +
                    std::to_string(peaks) + " closing peaks, contrast " + fmt("%.2f dB", contrast)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KISIM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome ac11() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("kisim_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  {
    std::ofstream data(dir / "eq2.csv");
    data << "x,y\n";
    for (int i = 0; i <= 20; ++i) {
      const double x = -20.0 + 2.0 * i;
      data << x << "," << 131.0 * (1.0 + x * x / (25.5 * 25.5)) << "\n";
    }
  }
  const std::vector<std::pair<std::string, std::string>> runs{
      {"iv", "--config " + config_path("iv_type_b.json")},
      {"s11", "--config " + config_path("s11_type_b.json")},
      {"stability-map", "--config " + config_path("stability_map.json")},
      {"snr-benchmark", "--config " + config_path("snr_benchmark.json")},
      {"nonlinear", "--config " + config_path("nonlinear.json")},
      {"fit", "--data " + (dir / "eq2.csv").string() + " --model eq2_current --guess 120,30"},
  };
  int identical = 0;
  std::string failed;
  for (const auto& [sub, args] : runs) {
    const fs::path a = dir / (sub + "_1.tsv"), b = dir / (sub + "_2.tsv"), c = dir / (sub + "_3.tsv");
    const std::string par = sub == "fit" ? "" : " --parallel";
    const bool ok = run_cli(sub + " " + args + " --out " + a.string()) == 0 &&
                    run_cli(sub + " " + args + " --out " + b.string()) == 0 &&
                    run_cli(sub + " " + args + par + " --out " + c.string()) == 0;
    const std::string first = slurp(a);
    if (ok && !first.empty() && first == slurp(b) && first == slurp(c)) {
      ++identical;
    } else {
      failed += " " + sub;
    }
  }
  fs::remove_all(dir);
  const bool pass = identical == static_cast<int>(runs.size());
  return {pass, std::to_string(identical) + "/" + std::to_string(runs.size()) +
                    " subcommands byte-identical across three runs" + (failed.empty() ? "" : "; failed:" + failed)};
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.begin(), static_cast<Eigen::Index>(v.size()));
}

Outcome ac12() {
  struct Case {
    CurveModel model;
    Eigen::ArrayXd x;
    Eigen::VectorXd p;
  };
  const std::vector<Case> cases{
      {eq1_temperature_model(), Eigen::ArrayXd::LinSpaced(30, 0.0, 1.0), vec({131.0, 1.1, 0.35})},
      {eq2_current_model(), Eigen::ArrayXd::LinSpaced(30, -20.0, 20.0), vec({131.0, 25.5})},
      {resonance_lorentzian_model(), Eigen::ArrayXd::LinSpaced(30, 6.48e8, 7.17e8), vec({6.82e8, 6.9e6, 0.8, 1.0})},
      {powerlaw_model(), Eigen::ArrayXd::LinSpaced(30, 1e-14, 1e-10), vec({1e-21, -1.0})},
      {constant_model(), Eigen::ArrayXd::LinSpaced(30, 0.0, 1.0), vec({3.0})},
  };
  double worst = 0.0;
  std::string worst_model;
  for (const auto& c : cases) {
    const Eigen::ArrayXd y = c.model.evaluate(c.x, c.p) * 1.01;
    const ResidualFunction fn = model_residuals(c.model, c.x, y);
    const Eigen::MatrixXd fwd = jacobian_forward(fn, c.p);
    const Eigen::MatrixXd ctr = jacobian_central(fn, c.p);
    for (Eigen::Index j = 0; j < fwd.cols(); ++j) {
      const double rel = (fwd.col(j) - ctr.col(j)).norm() / ctr.col(j).norm();
      if (rel > worst) {
        worst = rel;
        worst_model = c.model.name;
      }
    }
  }
  return {worst < 1e-5, std::to_string(cases.size()) + " models, worst relative deviation " + fmt("%.2e", worst) +
                            " (" + worst_model + ")"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"resonance arithmetic", ac01},   {"sheet inductance", ac02},     {"characteristic impedance", ac03},
      {"integration time", ac04},       {"temperature fit", ac05},      {"current nonlinearity", ac06},
      {"SNR oracle", ac07},             {"t_min power law", ac08},      {"nonlinear resonator", ac09},
      {"Coulomb map", ac10},            {"determinism", ac11},          {"gradient check", ac12},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] AC%02zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu acceptance criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
              criteria.size());
  return failures == 0 ? 0 : 1;
}
