#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "generators.hpp"
#include "kisim/constants.hpp"
#include "kisim/error.hpp"
#include "kisim/resonator.hpp"

using namespace kisim;
using kisim::testing::for_all;
using kisim::testing::Gen;

namespace {

constexpr double kOpen = 1e10;  // blockaded SET, Ohm

ResonatorSpec lossless() {
  ResonatorSpec r;
  r.contact_resistance_Ohm = 0.0;
  return r;
}

double series_resonance(const ResonatorSpec& r, double lk_nH) {
  return 1.0 / (2.0 * M_PI * std::sqrt(lk_nH * 1e-9 * r.total_capacitance_fF() * 1e-15));
}

// Independent |S11| evaluation for the dip oracle.
double direct_s11_mag(const ResonatorSpec& r, double lk_nH, double shunt_Ohm, double f) {
  const Complex j(0.0, 1.0);
  const double w = 2.0 * M_PI * f;
  Complex y = j * w * (r.resonator_capacitance_fF + r.parasitic_capacitance_fF) * 1e-15;
  y += 1.0 / (r.contact_resistance_Ohm + j * w * lk_nH * 1e-9);
  if (std::isfinite(shunt_Ohm)) y += 1.0 / shunt_Ohm;
  const Complex z = 1.0 / (j * w * r.coupling_capacitance_fF * 1e-15) + 1.0 / y;
  return std::abs((z - r.line_impedance_Ohm) / (z + r.line_impedance_Ohm));
}

// Golden-section minimum of |S11| within +-3% of the closed-form estimate.
double dip_oracle(const ResonatorSpec& r, double lk_nH, double shunt_Ohm) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  const double f0 = series_resonance(r, lk_nH);
  double a = 0.97 * f0, b = 1.03 * f0;
  for (int i = 0; i < 200 && b - a > 1.0; ++i) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (direct_s11_mag(r, lk_nH, shunt_Ohm, c) < direct_s11_mag(r, lk_nH, shunt_Ohm, d)) b = d;
    else a = c;
  }
  return 0.5 * (a + b);
}

double db(Complex s) { return 20.0 * std::log10(std::abs(s)); }

}  // namespace

TEST(InputImpedance, BlocksDc) {
  const ResonatorSpec r;
  EXPECT_GT(std::abs(input_impedance(r, 131.0, kOpen, 1.0)), 1e11);
  EXPECT_GT(std::abs(input_impedance(r, 131.0, kOpen, 1e-3)), std::abs(input_impedance(r, 131.0, kOpen, 1.0)));
}

TEST(InputImpedance, MatchesDirectComplexArithmetic) {
  for_all(300, 21, [](Gen& g, int) {
    const ResonatorSpec r = g.resonator();
    const double lk = g.log_uniform(10.0, 1000.0);
    const double shunt = g.log_uniform(1e3, 1e10);
    const double f = g.log_uniform(1e8, 3e9);
    const double w = 2.0 * M_PI * f;
    const std::complex<double> j(0.0, 1.0);
    const auto zc = [&](double c_fF) { return 1.0 / (j * w * c_fF * 1e-15); };
    const std::complex<double> branch = r.contact_resistance_Ohm + j * w * lk * 1e-9;
    const std::complex<double> y = 1.0 / zc(r.resonator_capacitance_fF) + 1.0 / zc(r.parasitic_capacitance_fF) +
                                   1.0 / branch + 1.0 / shunt;
    const std::complex<double> oracle = zc(r.coupling_capacitance_fF) + 1.0 / y;
    const std::complex<double> z = input_impedance(r, lk, shunt, f);
    EXPECT_NEAR(std::abs(z - oracle), 0.0, 1e-9 * std::abs(oracle));
  });
}

TEST(InputImpedance, ZeroAtSeriesResonance) {
  const ResonatorSpec r = lossless();
  const double fs = series_resonance(r, 131.0);
  const double at = std::abs(input_impedance(r, 131.0, std::numeric_limits<double>::infinity(), fs));
  const double near = std::abs(input_impedance(r, 131.0, std::numeric_limits<double>::infinity(), 1.01 * fs));
  EXPECT_LT(at, 1e-6 * near);
}

TEST(InputImpedance, TankPeaksAtParallelResonance) {
  // The tank alone (C || C_p || L) resonates without C_c.
  const ResonatorSpec r = lossless();
  const double lk = 131.0;
  const double c_shunt = (r.resonator_capacitance_fF + r.parasitic_capacitance_fF) * 1e-15;
  const double fp = 1.0 / (2.0 * M_PI * std::sqrt(lk * 1e-9 * c_shunt));
  auto tank = [&](double f) {
    const double w = 2.0 * M_PI * f;
    return std::abs(tank_impedance(w, c_shunt, Complex(0.0, w * lk * 1e-9), 1e12));
  };
  EXPECT_GT(tank(fp), 1e3 * tank(fp * 1.001));
  EXPECT_GT(tank(fp), 1e3 * tank(fp * 0.999));
}

TEST(LkFromResonance, TypeBPair) {
  const ResonatorSpec r;
  EXPECT_NEAR(r.total_capacitance_fF(), 284.3, 1e-12);
  EXPECT_NEAR(lk_from_resonance(823e6, r), 131.5, 0.05);
}

TEST(LkFromResonance, InverseSquare) {
  const ResonatorSpec r;
  EXPECT_NEAR(lk_from_resonance(2 * 823e6, r), lk_from_resonance(823e6, r) / 4.0, 1e-12);
}

TEST(LkFromResonance, TypeAFrequency) { EXPECT_NEAR(lk_from_resonance(884e6, ResonatorSpec{}), 114.0, 0.05); }

TEST(LkFromResonance, RoundTripsSeriesResonance) {
  for_all(200, 22, [](Gen& g, int) {
    const ResonatorSpec r = g.resonator();
    const double lk = g.log_uniform(10.0, 1000.0);
    EXPECT_NEAR(lk_from_resonance(series_resonance(r, lk), r), lk, 1e-12 * lk);
  });
}

TEST(CharacteristicImpedance, Values) {
  EXPECT_NEAR(characteristic_impedance(807.0, 6.3), 11.32, 0.005);
  EXPECT_NEAR(characteristic_impedance(149.0, 6.3), 4.86, 0.005);
  EXPECT_NEAR(characteristic_impedance(4 * 149.0, 6.3), 2.0 * characteristic_impedance(149.0, 6.3), 1e-12);
}

TEST(S11, MatchedLoadReflectsNothing) {
  EXPECT_EQ(std::abs(reflection_coefficient(Complex(50.0, 0.0), 50.0)), 0.0);
}

TEST(S11, LosslessNetworkReflectsEverything) {
  const ResonatorSpec r = lossless();
  for (double f : {3e8, 5e8, 7e8, 8.2e8, 1e9}) {
    EXPECT_NEAR(std::abs(s11(r, 131.0, std::numeric_limits<double>::infinity(), f)), 1.0, 1e-12);
  }
}

TEST(S11, Passive) {
  for_all(2000, 23, [](Gen& g, int) {
    const ResonatorSpec r = g.resonator();
    const double v = std::abs(s11(r, g.log_uniform(1.0, 1e4), g.log_uniform(1.0, 1e12), g.log_uniform(1e6, 1e10)));
    EXPECT_LE(v, 1.0 + 1e-12);
  });
}

TEST(S11, SpectrumMatchesPointwise) {
  const ResonatorSpec r;
  const Eigen::ArrayXd f = Eigen::ArrayXd::LinSpaced(17, 7e8, 9e8);
  const Eigen::ArrayXcd s = s11_spectrum(r, 131.0, 5e4, f);
  for (Eigen::Index i = 0; i < f.size(); ++i) EXPECT_EQ(s(i), s11(r, 131.0, 5e4, f(i)));
}

TEST(S11, SetStatesChangeDipByThreeDecibels) {
  const ResonatorSpec r = lossless();
  const Eigen::ArrayXd f = Eigen::ArrayXd::LinSpaced(7001, 3e8, 1e9);
  double low = 0.0, high = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    low = std::min(low, db(s11(r, 131.0, 5e4, f(i))));
    high = std::min(high, db(s11(r, 131.0, kOpen, f(i))));
  }
  EXPECT_GE(high - low, 3.0);
}

TEST(FindResonance, LosslessHasNoDip) {
  try {
    find_resonance(lossless(), 131.0, std::numeric_limits<double>::infinity(), 5e8, 1.2e9);
    FAIL() << "expected NoResonanceInRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoResonanceInRange);
  }
}

TEST(FindResonance, DipOutsideRange) {
  EXPECT_THROW(find_resonance(ResonatorSpec{}, 131.0, 5e4, 9e8, 1.2e9), Error);
}

TEST(FindResonance, TypeBNearAnalytic) {
  const ResonatorSpec r = lossless();
  const ResonanceSummary s = find_resonance(r, 131.0, 1e7, 5e8, 1.2e9);
  EXPECT_NEAR(s.resonance_Hz, dip_oracle(r, 131.0, 1e7), 1e3);
  EXPECT_NEAR(s.resonance_Hz, series_resonance(r, 131.0), 1e-3 * s.resonance_Hz);
  EXPECT_GT(s.dip_depth_dB, 0.0);
}

TEST(FindResonance, TypeASelfConsistent) {
  const ResonatorSpec r = lossless();
  const double lk = lk_from_resonance(884e6, r);
  const double f = find_resonance(r, lk, 1e8, 6e8, 1.2e9).resonance_Hz;
  EXPECT_NEAR(f, dip_oracle(r, lk, 1e8), 1e3);
  EXPECT_NEAR(f, 884e6, 1e-3 * 884e6);
}

TEST(FindResonance, LinewidthAndQuality) {
  const ResonatorSpec r = lossless();
  const ResonanceSummary s = find_resonance(r, 131.0, 5e4, 6e8, 1.1e9);
  ASSERT_TRUE(std::isfinite(s.linewidth_Hz));
  EXPECT_NEAR(s.loaded_q, s.resonance_Hz / s.linewidth_Hz, 1e-9);
  // Half-depth level reached at both edges.
  const double level = 0.5 * (1.0 + s.min_magnitude);
  auto mag = [&](double f) { return std::abs(s11(r, 131.0, 5e4, f)); };
  EXPECT_NEAR(mag(s.resonance_Hz), s.min_magnitude, 1e-12);
  EXPECT_LT(mag(s.resonance_Hz + 0.4 * s.linewidth_Hz), level + 0.05);
  EXPECT_GT(mag(s.resonance_Hz + 0.6 * s.linewidth_Hz), level - 0.05);
}

TEST(FindResonance, ReciprocalConsistency) {
  for_all(40, 24, [](Gen& g, int) {
    ResonatorSpec r = g.resonator();
    r.contact_resistance_Ohm = 0.0;
    const double lk = g.log_uniform(30.0, 800.0);
    const double f0 = series_resonance(r, lk);
    const ResonanceSummary s = find_resonance(r, lk, 1e7, 0.6 * f0, 1.5 * f0);
    EXPECT_NEAR(s.resonance_Hz, dip_oracle(r, lk, 1e7), 1e-5 * s.resonance_Hz);
    // The closed form ignores the port load on C_c: exact only as w C_c Z_0 -> 0.
    const double x = 2.0 * M_PI * s.resonance_Hz * r.coupling_capacitance_fF * 1e-15 * r.line_impedance_Ohm;
    EXPECT_NEAR(lk_from_resonance(s.resonance_Hz, r), lk, (1e-3 + 2.0 * x * x) * lk);
  });
}

TEST(SourceAmplitude, AvailablePower) {
  const ResonatorSpec r;
  const double v = source_amplitude(r, -30.0);
  EXPECT_NEAR(v * v / (8.0 * 50.0), 1e-6, 1e-18);
  EXPECT_EQ(source_amplitude(r, -std::numeric_limits<double>::infinity()), 0.0);
}

// ---------------------------------------------------------------------------

class Nonlinear : public ::testing::Test {
 protected:
  FilmSpec film = kisim::testing::benchmark_film();
  ResonatorSpec spec = kisim::testing::benchmark_resonator();
  ThermalState thermal{};
};

TEST_F(Nonlinear, VanishingDriveIsLinear) {
  const OperatingPoint op = nonlinear_operating_point(spec, film, thermal, 0.0, 8.26e8, -200.0, kOpen);
  EXPECT_TRUE(op.converged);
  EXPECT_EQ(op.state, FilmState::Superconducting);
  const double lin = lk_of_temperature(film, thermal);
  EXPECT_NEAR(op.lk_effective_nH, lin, 1e-9 * lin);
}

TEST_F(Nonlinear, DcBiasRaisesInductance) {
  const OperatingPoint op = nonlinear_operating_point(spec, film, thermal, 2.0, 8.26e8, -200.0, kOpen);
  const double expected = lk_of_current(film, {2.0, 0.0}, lk_of_temperature(film, thermal));
  EXPECT_NEAR(op.lk_effective_nH, expected, 1e-7 * expected);
}

TEST_F(Nonlinear, SwitchesAboveCriticalPower) {
  const double f0 = find_resonance(spec, lk_of_temperature(film, thermal), kOpen, 7e8, 9e8).resonance_Hz;
  const OperatingPoint op = nonlinear_operating_point(spec, film, thermal, 0.0, f0, -50.0, kOpen);
  EXPECT_EQ(op.state, FilmState::Normal);
  EXPECT_GT(op.rf_current_uA, switching_current(film));
  EXPECT_TRUE(std::isnan(op.lk_effective_nH));

  const Eigen::ArrayXd f = Eigen::ArrayXd::LinSpaced(401, 8.4e8, 7.6e8);
  for (const auto& p : sweep_frequency(spec, film, thermal, 0.0, -50.0, kOpen, f, SweepMode::WarmStart)) {
    EXPECT_GT(db(p.s11), -0.5);
  }
}

TEST_F(Nonlinear, DcBiasAloneCanSwitch) {
  const OperatingPoint op =
      nonlinear_operating_point(spec, film, thermal, 1.01 * switching_current(film), 8.26e8, -200.0, kOpen);
  EXPECT_EQ(op.state, FilmState::Normal);
}

TEST_F(Nonlinear, ConvergedIteratesAreStationary) {
  const OperatingPoint op = nonlinear_operating_point(spec, film, thermal, 0.0, 8.2e8, -80.0, kOpen);
  ASSERT_TRUE(op.converged);
  const NetworkResponse resp = operating_point_response(spec, film, op, kOpen);
  EXPECT_NEAR(std::abs(resp.branch_current) * 1e6, op.rf_current_uA, 1e-8 * op.rf_current_uA);
}

TEST_F(Nonlinear, NonConvergenceIsFlagged) {
  NonlinearOptions opt;
  opt.max_iterations = 2;
  const OperatingPoint op = nonlinear_operating_point(spec, film, thermal, 0.0, 8.2e8, -80.0, kOpen, std::nullopt, opt);
  EXPECT_FALSE(op.converged);
  EXPECT_EQ(op.iterations, 2);
}

TEST_F(Nonlinear, WarmStartReachesSameSolution) {
  const OperatingPoint cold = nonlinear_operating_point(spec, film, thermal, 0.0, 8.2e8, -85.0, kOpen);
  const OperatingPoint warm = nonlinear_operating_point(spec, film, thermal, 0.0, 8.2e8, -85.0, kOpen, cold);
  EXPECT_NEAR(warm.rf_current_uA, cold.rf_current_uA, 1e-8 * cold.rf_current_uA);
  EXPECT_LT(warm.iterations, cold.iterations);
}

TEST_F(Nonlinear, ResonanceNonIncreasingWithPower) {
  double previous = std::numeric_limits<double>::infinity();
  for (double p = -100.0; p <= -73.0; p += 3.0) {
    const NonlinearResonance r = find_nonlinear_resonance(spec, film, thermal, 0.0, p, kOpen, 7.6e8, 8.4e8, 401);
    EXPECT_LE(r.summary.resonance_Hz, previous) << "at " << p << " dBm";
    previous = r.summary.resonance_Hz;
  }
}

TEST_F(Nonlinear, WarmSweepIsContinuous) {
  // 0.1 % frequency steps
  Eigen::ArrayXd f(100);
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = 8.6e8 * std::pow(0.999, static_cast<double>(i));
  for (double p : {-95.0, -85.0}) {
    const auto ops = sweep_frequency(spec, film, thermal, 0.0, p, kOpen, f, SweepMode::WarmStart);
    for (std::size_t i = 1; i < ops.size(); ++i) {
      if (!(ops[i].converged && ops[i - 1].converged)) continue;
      EXPECT_LT(std::abs(ops[i].rf_current_uA - ops[i - 1].rf_current_uA), 0.1 * ops[i - 1].rf_current_uA);
    }
  }
}

TEST_F(Nonlinear, SweepModesAgreeOffBifurcation) {
  const Eigen::ArrayXd f = Eigen::ArrayXd::LinSpaced(41, 8.4e8, 8.0e8);
  const auto warm = sweep_frequency(spec, film, thermal, 0.0, -90.0, kOpen, f, SweepMode::WarmStart);
  const auto cold = sweep_frequency(spec, film, thermal, 0.0, -90.0, kOpen, f, SweepMode::Independent, true);
  for (std::size_t i = 0; i < warm.size(); ++i) {
    EXPECT_NEAR(std::abs(warm[i].s11 - cold[i].s11), 0.0, 1e-8);
  }
}

TEST_F(Nonlinear, DissipationBoundedByIncidentPower) {
  for (double shunt : {5e4, kOpen}) {
    for (double p : {-100.0, -85.0, -75.0}) {
      for (double f : {8.0e8, 8.2e8, 8.26e8, 8.4e8}) {
        const OperatingPoint op = nonlinear_operating_point(spec, film, thermal, 0.0, f, p, shunt);
        if (!op.converged || op.state != FilmState::Superconducting) continue;
        const NetworkResponse resp = operating_point_response(spec, film, op, shunt);
        const double incident = dbm_to_watts(p);
        EXPECT_LE(dissipated_power(spec, resp, shunt), incident * (1.0 + 1e-9));
        // Power balance: absorbed = incident (1 - |S11|^2)
        EXPECT_NEAR(dissipated_power(spec, resp, shunt), incident * (1.0 - std::norm(op.s11)), 1e-9 * incident);
      }
    }
  }
}

TEST_F(Nonlinear, SmallSignalShiftMatchesKerr) {
  const double lk = lk_of_temperature(film, thermal);
  const double f_lin = find_resonance(spec, lk, kOpen, 7.6e8, 8.6e8).resonance_Hz;
  const double p = -105.0;
  const NonlinearResonance nl = find_nonlinear_resonance(spec, film, thermal, 0.0, p, kOpen, 7.6e8, 8.6e8, 801);
  const double shift = nl.summary.resonance_Hz - f_lin;
  const NetworkResponse resp = operating_point_response(spec, film, nl.at_resonance, kOpen);
  const double energy = stored_energy(spec, resp, nl.at_resonance.lk_effective_nH, nl.summary.resonance_Hz);
  const double photons = energy / (constants::hbar * two_pi * nl.summary.resonance_Hz);
  const double kerr = self_kerr(spec, film, f_lin, lk);
  EXPECT_LT(shift, 0.0);
  EXPECT_NEAR(shift / photons, kerr, 0.05 * std::abs(kerr));
}

TEST(SelfKerr, TypeACoefficient) {
  const FilmSpec film = type_a_film();
  const double k = self_kerr(ResonatorSpec{}, film, 884e6, 149.0);
  EXPECT_LT(k, 0.0);
  EXPECT_NEAR(std::abs(k), 12.0, 0.2 * 12.0);
}

TEST(SelfKerr, TypeBCoefficient) {
  const double k = self_kerr(ResonatorSpec{}, type_b_film(), 823e6, 131.0);
  EXPECT_NEAR(std::abs(k), 5.29, 0.2 * 5.29);
}

TEST(SelfKerr, ScalesWithNonlinearityCurrent) {
  FilmSpec film = type_a_film();
  const double k1 = self_kerr(ResonatorSpec{}, film, 884e6, 149.0);
  film.nonlinearity_current_uA *= 2.0;
  EXPECT_NEAR(self_kerr(ResonatorSpec{}, film, 884e6, 149.0), k1 / 4.0, 1e-12 * std::abs(k1));
}

TEST(SelfKerr, RepresentativeValue) {
  FilmSpec film = type_a_film();
  film.nonlinearity_current_uA = 35.0;
  const double oracle = 2.0 * M_PI * 1.054571817e-34 * 884e6 * 884e6 / (149e-9 * 35e-6 * 35e-6);
  EXPECT_NEAR(self_kerr(ResonatorSpec{}, film, 884e6, 149.0), -oracle, 1e-6 * oracle);
  EXPECT_NEAR(oracle, 2.84, 0.01);
}
