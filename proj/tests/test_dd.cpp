#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "nvgrav/dd.hpp"

using namespace nvgrav;
using namespace nvgrav::dd;

namespace {

TEST(OrnsteinUhlenbeck, StationaryVarianceAndCorrelation) {
  OUNoise n{1.0, 1e-6, 7, 0.0};
  const auto tr = generate_noise(n, 0.05);
  const auto& x = tr.values;
  ASSERT_GT(x.size(), 900000u);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double var = 0, lag1 = 0, lag20 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    var += (x[i] - mean) * (x[i] - mean);
    if (i + 1 < x.size()) lag1 += (x[i] - mean) * (x[i + 1] - mean);
    if (i + 20 < x.size()) lag20 += (x[i] - mean) * (x[i + 20] - mean);
  }
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(var / x.size(), 1.0, 0.05);
  EXPECT_NEAR(lag1 / var, std::exp(-tr.dt / n.tau_c), 0.01);
  EXPECT_NEAR(lag20 / var, std::exp(-1.0), 0.03);
}

TEST(OrnsteinUhlenbeck, SeededStreamsAreReproducible) {
  OUNoise n;
  const auto a = generate_noise(n, 50e-6, 3);
  const auto b = generate_noise(n, 50e-6, 3);
  const auto c = generate_noise(n, 50e-6, 4);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  n.seed = 2;
  EXPECT_NE(generate_noise(n, 50e-6, 3).values, a.values);
}

TEST(OrnsteinUhlenbeck, StepMustResolveCorrelationTime) {
  OUNoise n;
  n.dt = n.tau_c / 5;
  EXPECT_THROW((void)generate_noise(n, 1e-5), InvalidArgument);
  n.dt = n.tau_c / 10;
  EXPECT_NO_THROW((void)generate_noise(n, 1e-5));
  n.dt = 0;
  n.tau_c = 0;
  EXPECT_THROW((void)generate_noise(n, 1e-5), InvalidArgument);
}

TEST(FreeDecay, NoNoiseMeansNoDecay) {
  OUNoise n;
  n.sigma = 0;
  const auto env = free_decay(n, 100e-6, 100, 20);
  for (double c : env.coherence) EXPECT_NEAR(c, 1.0, 1e-15);
  EXPECT_TRUE(std::isinf(env.best.t2));
}

TEST(FreeDecay, MatchesExactOuEnvelope) {
  const OUNoise n{kTwoPi * 1e4, 10e-6, 11, 0.0};
  const auto env = free_decay(n, 60e-6, 2000, 30);
  for (std::size_t i = 0; i < env.times.size(); ++i) {
    const double exact = ou_coherence(n.sigma, n.tau_c, env.times[i]);
    EXPECT_NEAR(env.coherence[i], exact, 4 * env.stderr[i] + 5e-3) << env.times[i];
  }
}

TEST(FreeDecay, MotionalNarrowingRegime) {
  const OUNoise n;
  const auto env = free_decay(n, 600e-6, 1000, 100);
  const double oracle = motional_narrowing_t2(n.sigma, n.tau_c);
  EXPECT_NEAR(env.exponential.t2 / oracle, 1.0, 0.1);
  EXPECT_GT(env.exponential.stderr_t2, 0.0);
}

TEST(FreeDecay, DoublingSigmaQuartersT2) {
  OUNoise n;
  const auto a = free_decay(n, 600e-6, 500, 60);
  n.sigma *= 2;
  const auto b = free_decay(n, 150e-6, 500, 60);
  EXPECT_NEAR(a.exponential.t2 / b.exponential.t2, 4.0, 0.6);
}

TEST(FreeDecay, WorkerCountDoesNotChangeResult) {
  const OUNoise n;
  const auto a = free_decay(n, 200e-6, 150, 20, 1);
  const auto b = free_decay(n, 200e-6, 150, 20, 3);
  EXPECT_EQ(a.coherence, b.coherence);
  EXPECT_EQ(a.stderr, b.stderr);
  EXPECT_EQ(a.best.t2, b.best.t2);
}

TEST(FreeDecay, StandardErrorShrinksWithTrajectories) {
  const OUNoise n;
  const auto a = free_decay(n, 300e-6, 100, 10);
  const auto b = free_decay(n, 300e-6, 1600, 10);
  EXPECT_LT(b.stderr[5], 0.5 * a.stderr[5]);
  EXPECT_THROW((void)free_decay(n, 300e-6, 99, 10), InvalidArgument);
}

TEST(Drive, HierarchyChecks) {
  DriveSpec d;
  EXPECT_TRUE(check_drive(d).empty());
  d.omega2 = d.omega1;
  EXPECT_EQ(check_drive(d).size(), 1u);
  d.omega1 = d.carrier / 50;
  EXPECT_THROW((void)check_drive(d), InvalidArgument);
}

TEST(Decoupled, NoiselessDrivePreservesCoherence) {
  OUNoise n;
  n.sigma = 0;
  DriveSpec d;
  d.relative_noise = 0;
  const auto env = decoupled_decay(n, d, 200e-6, 100, 10);
  for (double c : env.coherence) EXPECT_NEAR(c, 1.0, 1e-9);
}

TEST(Decoupled, ExtendsCoherenceByOrderOfMagnitude) {
  const OUNoise n;
  const DriveSpec d;
  const auto free = free_decay(n, 600e-6, 200, 60);
  const auto driven = decoupled_decay(n, d, 2e-3, 200, 40);
  EXPECT_GE(driven.best.t2 / free.best.t2, 10.0);
}

TEST(Decoupled, ModulationSuppressesAmplitudeNoise) {
  const OUNoise n;
  DriveSpec with, without;
  without.omega2 = 0;
  const auto a = decoupled_decay(n, with, 2e-3, 150, 40);
  const auto b = decoupled_decay(n, without, 2e-3, 150, 40);
  EXPECT_GT(a.best.t2, 3 * b.best.t2);
}

TEST(Decoupled, WorkerCountDoesNotChangeResult) {
  const OUNoise n;
  const DriveSpec d;
  const auto a = decoupled_decay(n, d, 100e-6, 100, 10, 1);
  const auto b = decoupled_decay(n, d, 100e-6, 100, 10, 4);
  EXPECT_EQ(a.coherence, b.coherence);
}

}  // namespace
