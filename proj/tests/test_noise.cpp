#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nvgrav/classical.hpp"
#include "nvgrav/noise.hpp"

using namespace nvgrav;
using namespace nvgrav::noise;

namespace {

constexpr double kPi = std::numbers::pi;

TEST(Scattering, DiamondSphereInCo2Trap) {
  const double v = photon_scattering(EnvironmentParams{}, OscillatorParams{});
  EXPECT_NEAR(v, 3.8e-5, 0.03 * 3.8e-5);
  const double manual = 16 * kPi * kPi * kPi / 15 * (0.5 / 3.5) * std::pow(200e-9 / 10e-6, 3);
  EXPECT_DOUBLE_EQ(v, manual);
}

TEST(Scattering, ScalesAsRadiusCubed) {
  OscillatorParams a, b;
  b.radius = 2 * a.radius;
  EXPECT_NEAR(photon_scattering({}, b) / photon_scattering({}, a), 8.0, 1e-12);
}

TEST(Scattering, RejectsUnphysicalPermittivity) {
  OscillatorParams o;
  o.permittivity = 1.0;
  EXPECT_THROW((void)photon_scattering({}, o), InvalidArgument);
}

TEST(GasDamping, PrefactorsAndScaling) {
  EnvironmentParams env;
  OscillatorParams osc;
  const auto g = gas_damping(env, osc);
  const double base = env.pressure / (env.gas_speed * osc.radius * osc.density);
  EXPECT_DOUBLE_EQ(g.gamma, 16 / kPi * base);
  EXPECT_NEAR(g.gamma_alt / g.gamma, kPi * kPi, 1e-12);
  env.pressure *= 3;
  EXPECT_NEAR(gas_damping(env, osc).gamma / g.gamma, 3.0, 1e-12);
  // the gas channel is far weaker than photon scattering at 1e-9 Torr
  EXPECT_LT(g.gamma_alt, 1e-3 * photon_scattering(env, osc) * osc.omega_z);
}

TEST(GasDamping, ZeroPressureIsZero) {
  EnvironmentParams env;
  env.pressure = 0;
  EXPECT_EQ(gas_damping(env, {}).gamma, 0.0);
  env.pressure = -1;
  EXPECT_THROW((void)gas_damping(env, {}), InvalidArgument);
}

TEST(Decoherence, TwoConventions) {
  const auto d = max_decoherence(3.78e-5, 90);
  EXPECT_NEAR(d.literal / d.alt, 4.0, 1e-12);
  EXPECT_NEAR(d.alt, 0.3, 0.03);
  EXPECT_THROW((void)max_decoherence(1, -1), InvalidArgument);
}

TEST(Fluctuation, ThermalAmplitudeTimesGradient) {
  OscillatorParams osc;
  const PhysicalConstants k;
  const double bg = 1e6;
  const auto f = magnetic_fluctuation(bg, osc, k);
  const double x_rms = std::sqrt(k.k_B * osc.temperature / (osc.mass * osc.omega_z * osc.omega_z));
  EXPECT_NEAR(f.tesla, bg * x_rms, 1e-12 * f.tesla);
  EXPECT_NEAR(f.angular, k.g_NV * k.mu_B * f.tesla / k.hbar, 1e-9 * f.angular);
  EXPECT_EQ(f.feasible, f.angular < kFluctuationLimit);
}

TEST(Fluctuation, FeasibilityMonotoneInGradient) {
  OscillatorParams osc;
  bool was_feasible = true;
  for (double bg = 1e3; bg <= 1e8; bg *= 1.5) {
    const bool now = magnetic_fluctuation(bg, osc).feasible;
    EXPECT_FALSE(now && !was_feasible) << bg;
    was_feasible = now;
  }
  EXPECT_TRUE(magnetic_fluctuation(1e3, osc).feasible);
  EXPECT_FALSE(magnetic_fluctuation(1e8, osc).feasible);
}

TEST(Fluctuation, ZeroTemperatureHasNone) {
  OscillatorParams osc;
  osc.temperature = 0;
  EXPECT_EQ(magnetic_fluctuation(1e7, osc).tesla, 0.0);
}

TEST(Doppler, ShiftAtHundredNanometres) {
  const double df = doppler_shift(2.88e9, 100e-9, kTwoPi * 1e3);
  EXPECT_NEAR(df, 6e-3, 0.05 * 6e-3);
  EXPECT_LT(df, kNvLinewidth);
  EXPECT_THROW((void)doppler_shift(0, 1, 1), InvalidArgument);
}

TEST(Doppler, RmsVelocityFormula) {
  const PhysicalConstants k;
  EXPECT_DOUBLE_EQ(rms_velocity(1e-3, 1e-16, k), std::sqrt(2 * k.k_B * 1e-3 / 1e-16));
  EXPECT_EQ(rms_velocity(0, 1e-16), 0.0);
  EXPECT_NEAR(rms_velocity(4e-3, 1e-16) / rms_velocity(1e-3, 1e-16), 2.0, 1e-12);
}

TEST(ShotNoise, HundredResonatorsForTwoSeconds) {
  const auto s = shot_noise(100, 1e3, 2.0, 1.0, 1.4e9);
  EXPECT_GE(s.points, 1e5);
  EXPECT_NEAR(s.sigma_phi, 1 / std::sqrt(2e5), 1e-15);
  EXPECT_LE(s.relative, 1e-10);
}

TEST(ShotNoise, VisibilityScalingAndLimits) {
  const auto a = shot_noise(10, 1e3, 1, 1.0, 1e6);
  const auto b = shot_noise(10, 1e3, 1, 0.25, 1e6);
  EXPECT_NEAR(b.sigma_phi / a.sigma_phi, 4.0, 1e-12);
  EXPECT_TRUE(std::isinf(shot_noise(10, 1e3, 1, 0.0, 1e6).sigma_phi));
  EXPECT_THROW((void)shot_noise(10, 1e3, 1, 1.5, 1e6), InvalidArgument);
  EXPECT_THROW((void)shot_noise(0, 1e3, 1, 1, 1e6), InvalidArgument);
}

TEST(Precision, InverseOfComputedPhase) {
  for (double t0 : {0.1e-3, 0.7e-3, 2e-3}) {
    for (double bg : {1e4, 3e5, 1e7}) {
      SystemParams p;
      p.oscillator.omega_z = kTwoPi / t0;
      p.coupling.gradient = bg;
      const double dphi = std::abs(classical::phase_shift(p, t0).delta_phi);
      EXPECT_NEAR(relative_precision(0.01, bg, t0) * dphi, 0.01, 1e-9) << t0 << " " << bg;
    }
  }
}

TEST(Precision, DegenerateInputsAreInfinite) {
  EXPECT_TRUE(std::isinf(relative_precision(0.01, 0.0, 2e-3)));
  EXPECT_TRUE(std::isinf(relative_precision(0.01, 1e6, 0.0)));
}

TEST(Budget, DefaultConfigurationIsSelfConsistent) {
  const SystemParams p;
  const auto b = compute_budget(p);
  EXPECT_NEAR(b.delta_phi, 1.4e9, 0.01 * 1.4e9);
  EXPECT_NEAR(b.precision_fixed, p.sequence.sigma_phi / b.delta_phi, 1e-24);
  EXPECT_GT(b.gamma_sc, b.gamma_g_alt);
  EXPECT_NEAR(b.gamma_max / b.gamma_max_alt, 4.0, 1e-12);
  EXPECT_GT(b.visibility, 0.0);
  EXPECT_LE(b.visibility, 1.0);
  EXPECT_TRUE(b.doppler_ok);
  EXPECT_EQ(b.fluctuation_ok, b.fluctuation.feasible);
}

}  // namespace
