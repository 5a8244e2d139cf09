#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "nvgrav/classical.hpp"
#include "nvgrav/quantum.hpp"

using namespace nvgrav;
using namespace nvgrav::quantum;

namespace {

constexpr double kPi = std::numbers::pi;

SpinVector spin_basis(int s) {
  SpinVector v = SpinVector::Zero();
  v(spin_index(s)) = 1.0;
  return v;
}

SpinVector cat_state() {
  return (spin_basis(1) + spin_basis(-1)) / std::sqrt(2.0);
}

double closed_form_mod(const SystemParams& p) {
  return wrap_phase(classical::phase_shift(p, p.oscillator.period()).delta_phi);
}

TEST(Hamiltonian, DecoupledSpectrum) {
  auto p = with_dimensionless_coupling(SystemParams{}, 0.0, 0.0);
  const int n = 6;
  const auto h = build_hamiltonian(p, n);
  EXPECT_EQ(h.rows(), 3 * (n + 1));
  EXPECT_LE((h - h.adjoint()).cwiseAbs().maxCoeff(), 0.0);
  const double d = p.constants.D / p.oscillator.omega_z;
  for (int s : kSpins) {
    for (int k = 0; k <= n; ++k) {
      const int i = spin_index(s) * (n + 1) + k;
      EXPECT_NEAR(h(i, i).real(), k + d * s * s, 1e-6);
    }
  }
  EXPECT_EQ((h - Matrix(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Hamiltonian, BlockDiagonalInSz) {
  const auto p = with_dimensionless_coupling(SystemParams{}, 0.7, 0.3);
  const int n = 10, nf = n + 1;
  const auto h = build_hamiltonian(p, n);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a == b) continue;
      EXPECT_EQ(h.block(a * nf, b * nf, nf, nf).cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(Hamiltonian, ZeroBlockGroundEnergyShift) {
  const double rg = 0.4;
  const auto p = with_dimensionless_coupling(SystemParams{}, 0.0, rg);
  const int n = 40, nf = n + 1;
  const auto h = build_hamiltonian(p, n);
  const Matrix block = h.block(nf, nf, nf, nf);
  Eigen::SelfAdjointEigenSolver<Matrix> es(block);
  EXPECT_NEAR(es.eigenvalues()(0), -4 * rg * rg, 1e-10);
}

TEST(Hamiltonian, GroundStateDisplacementSign) {
  const double r = 0.6, rg = 0.25;
  const auto p = with_dimensionless_coupling(SystemParams{}, r, rg);
  const int n = 50, nf = n + 1;
  const auto h = build_hamiltonian(p, n);
  Matrix x = Matrix::Zero(nf, nf);
  for (int k = 0; k < n; ++k) x(k, k + 1) = x(k + 1, k) = std::sqrt(k + 1.0);
  for (int s : kSpins) {
    const Matrix block = h.block(spin_index(s) * nf, spin_index(s) * nf, nf, nf);
    Eigen::SelfAdjointEigenSolver<Matrix> es(block);
    const Eigen::VectorXcd g = es.eigenvectors().col(0);
    const double mean_x = (g.adjoint() * x * g)(0, 0).real();
    EXPECT_NEAR(mean_x, 4 * (r * s - rg), 1e-7) << "s = " << s;
  }
}

TEST(Hamiltonian, RejectsSmallCutoff) {
  EXPECT_THROW((void)build_hamiltonian(SystemParams{}, 3), InvalidArgument);
}

TEST(Pulse, HalfPiFromZeroGivesEqualSplit) {
  const auto st = HybridState::product(spin_basis(0), thermal_state(0, 4));
  const auto out = apply_pulse(st, PulseSpec::half_pi(kTwoPi * 1e7, 0));
  EXPECT_NEAR(out.spin_population(1), 0.5, 1e-14);
  EXPECT_NEAR(out.spin_population(0), 0.0, 1e-14);
  EXPECT_NEAR(out.spin_population(-1), 0.5, 1e-14);
}

TEST(Pulse, TwoHalfPiReturnToZero) {
  const auto st = HybridState::product(spin_basis(0), thermal_state(0, 4));
  const auto mid = apply_pulse(st, PulseSpec::half_pi(kTwoPi * 1e7, 0));
  const auto out = apply_pulse(mid, PulseSpec::half_pi(kTwoPi * 1e7, 0));
  EXPECT_NEAR(out.spin_population(0), 1.0, 1e-14);
}

TEST(Pulse, MatchesMatrixExponentialOfDrive) {
  const double rabi = kTwoPi * 3e6;
  for (double phi : {0.0, 0.7, -2.1}) {
    for (const auto& pulse : {PulseSpec::half_pi(rabi, phi), PulseSpec::pi(rabi, phi),
                              PulseSpec{rabi, 17e-9, phi}}) {
      SpinMatrix h = SpinMatrix::Zero();
      h(spin_index(1), spin_index(0)) = rabi;
      h(spin_index(-1), spin_index(0)) = std::polar(rabi, -phi);
      h += h.adjoint().eval();
      const SpinMatrix u = (Complex(0, -pulse.duration) * h).exp();
      EXPECT_LE((u - pulse.unitary()).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Pulse, PiSwapsPlusAndMinus) {
  const SpinMatrix u = PulseSpec::pi(kTwoPi * 1e7, 0).unitary();
  const SpinVector a = (0.6 * spin_basis(1) + 0.8 * spin_basis(-1));
  const SpinVector b = u * a;
  EXPECT_NEAR(std::abs(b(spin_index(1))), 0.8, 1e-12);
  EXPECT_NEAR(std::abs(b(spin_index(-1))), 0.6, 1e-12);
  EXPECT_NEAR(std::abs(b(spin_index(0))), 0.0, 1e-12);
}

TEST(Thermal, VacuumAndMeanOccupancy) {
  const auto vac = thermal_state(0, 8);
  EXPECT_EQ(vac(0, 0), Complex(1, 0));
  EXPECT_EQ(vac.trace(), Complex(1, 0));
  const auto th = thermal_state(2, 80);
  double n = 0;
  for (int k = 0; k <= 80; ++k) n += k * th(k, k).real();
  EXPECT_NEAR(n, 2.0, 1e-6);
  EXPECT_NEAR(th.trace().real(), 1.0, 1e-14);
}

TEST(Thermal, RejectsSmallCutoff) {
  EXPECT_THROW((void)thermal_state(2, 20), CutoffError);
  EXPECT_THROW((void)thermal_state(-1, 20), InvalidArgument);
}

TEST(Evolve, UncoupledOnlyAccumulatesPhases) {
  const auto p = with_dimensionless_coupling(SystemParams{}, 0, 0);
  const auto model = HybridModel::from(p, 12);
  const auto st = HybridState::product(cat_state(), thermal_state(0, 12));
  const double t = 0.37 * p.oscillator.period();
  const auto out = evolve(st, model, t);
  for (int s : kSpins) EXPECT_NEAR(out.spin_population(s), st.spin_population(s), 1e-12);
  EXPECT_NEAR(std::abs(out.spin_coherence(1, -1)), 0.5, 1e-12);
  EXPECT_NEAR(out.time(), t, 1e-18);
}

TEST(Evolve, DephasingDecaysCoherenceAtT2) {
  auto p = with_dimensionless_coupling(SystemParams{}, 0.3, 0.05);
  p.spin.t2 = 1.3e-3;
  const int n = suggest_cutoff(0.3, 0.05, 0);
  const auto st = HybridState::product(cat_state(), thermal_state(0, n));
  const auto model = HybridModel::from(p, n);
  const double t = 0.8e-3;
  const auto closed = evolve(st, model, t);
  const auto open = evolve(st, model, t, Dissipators::from(p, false, true));
  const double ratio = std::abs(open.spin_coherence(1, -1)) / std::abs(closed.spin_coherence(1, -1));
  EXPECT_NEAR(ratio / std::exp(-t / p.spin.t2), 1.0, 1e-4);
}

TEST(Evolve, RungeKuttaAgreesWithExactPropagator) {
  auto p = with_dimensionless_coupling(SystemParams{}, 0.5, 0.2);
  const int n = suggest_cutoff(0.5, 0.2, 0.5);
  const auto st = HybridState::product(cat_state(), thermal_state(0.5, n));
  const auto model = HybridModel::from(p, n);
  Dissipators negligible;
  negligible.t2 = 1e30;  // switches on the integrator without measurable dephasing
  const double t = 0.6 * p.oscillator.period();
  const auto exact = evolve(st, model, t);
  const auto rk = evolve(st, model, t, negligible);
  EXPECT_LE((exact.rho() - rk.rho()).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Evolve, PhysicalityPreservedUnderDamping) {
  auto p = with_dimensionless_coupling(SystemParams{}, 0.5, 0.1);
  p.oscillator.quality_factor = 50;
  p.sequence.bath_nbar = 0.3;
  const int n = suggest_cutoff(0.5, 0.1, 0.3);
  const auto st = HybridState::product(cat_state(), thermal_state(0, n));
  const auto out = evolve(st, HybridModel::from(p, n), p.oscillator.period(),
                          Dissipators::from(p, true, false));
  const auto c = out.check();
  EXPECT_TRUE(c.ok()) << c.trace_error << " " << c.hermiticity_error << " " << c.min_eigenvalue;
  // bath drives the mode toward its occupancy
  EXPECT_GT(out.mean_phonon_number(), 0.0);
}

TEST(Evolve, InadequateCutoffAbortsWithSuggestion) {
  const auto p = with_dimensionless_coupling(SystemParams{}, 2.0, 0.1);
  const auto st = HybridState::product(cat_state(), thermal_state(0, 20));
  try {
    (void)evolve(st, HybridModel::from(p, 20), p.oscillator.period());
    FAIL() << "expected CutoffError";
  } catch (const CutoffError& e) {
    EXPECT_GT(e.suggested_cutoff(), 20);
  }
}

TEST(Ramsey, NoiselessFringeMatchesClosedForm) {
  for (double r : {0.25, 0.5, 1.0, 2.0}) {
    const auto p = with_dimensionless_coupling(SystemParams{}, r, 0.1);
    const auto fr = ramsey_run(p, {});
    EXPECT_GE(fr.visibility, 0.999) << r;
    EXPECT_LE(std::abs(phase_distance(fr.delta_phi, closed_form_mod(p))), 1e-3) << r;
    EXPECT_LE(fr.residual, 1e-3);
    EXPECT_LE(suggest_cutoff(r, 0.1, 0), 128);
  }
}

TEST(Ramsey, NoGravityGivesZeroPhase) {
  const auto p = with_dimensionless_coupling(SystemParams{}, 0.8, 0.0);
  const auto fr = ramsey_run(p, {});
  EXPECT_LE(std::abs(phase_distance(fr.delta_phi, 0.0)), 1e-9);
}

TEST(Ramsey, ThermalImmunity) {
  const auto p = with_dimensionless_coupling(SystemParams{}, 0.5, 0.1);
  RamseyOptions o;
  const double ref = ramsey_run(p, o).delta_phi;
  for (double nbar : {0.5, 2.0}) {
    o.initial_nbar = nbar;
    EXPECT_LE(std::abs(phase_distance(ramsey_run(p, o).delta_phi, ref)), 1e-6) << nbar;
  }
}

TEST(Ramsey, CutoffIndependence) {
  const auto p = with_dimensionless_coupling(SystemParams{}, 1.0, 0.1);
  RamseyOptions o;
  o.n_cut = suggest_cutoff(1.0, 0.1, 0);
  const double a = ramsey_run(p, o).delta_phi;
  o.n_cut *= 2;
  EXPECT_LE(std::abs(phase_distance(ramsey_run(p, o).delta_phi, a)), 1e-6);
}

TEST(Ramsey, DephasingAtT2GivesInverseE) {
  auto p = with_dimensionless_coupling(SystemParams{}, 0.5, 0.1);
  p.spin.t2 = p.oscillator.period();
  const auto fr = ramsey_run(p, {}, Dissipators::from(p, false, true));
  EXPECT_NEAR(fr.visibility, std::exp(-1.0), 0.02 * std::exp(-1.0));
}

TEST(Ramsey, TooFewPhasesRejected) {
  RamseyOptions o;
  o.phases = {0, 1, 2};
  EXPECT_THROW((void)ramsey_run(with_dimensionless_coupling(SystemParams{}, 0.5, 0.1), o),
               InvalidArgument);
}

TEST(Fit, RecoversSyntheticFringe) {
  std::vector<double> phi = uniform_phases(16), p0;
  for (double x : phi) p0.push_back(0.5 * (1 + 0.73 * std::cos(2.2 + x)));
  const auto f = fit_fringe(phi, p0);
  EXPECT_NEAR(f.visibility, 0.73, 1e-10);
  EXPECT_NEAR(f.delta_phi, 2.2, 1e-10);
  EXPECT_TRUE(f.converged);
}

TEST(Visibility, FormulaLimitsAndGridPoint) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(visibility_analytic(inf, inf, 2e-3, 90), 1.0);
  EXPECT_NEAR(visibility_analytic(1e5, 2e-3, 2e-3, 90),
              std::exp(-kTwoPi / 1e5 * 180 * 180) * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(visibility_analytic(1e5, 2e-3, 2e-3, 90), 0.0480385, 1e-7);
}

TEST(Visibility, MonotoneInLossParameters) {
  double prev = 1.0;
  for (double q : {1e9, 1e7, 1e6, 1e5, 1e4}) {
    const double v = visibility_analytic(q, 5e-3, 2e-3, 30);
    EXPECT_LE(v, prev);
    prev = v;
  }
  prev = 1.0;
  for (double t2 : {1.0, 1e-2, 2e-3, 1e-3}) {
    const double v = visibility_analytic(1e8, t2, 2e-3, 30);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Visibility, LindbladAgreesWithFormulaAtSmallCoupling) {
  auto p = with_dimensionless_coupling(SystemParams{}, 0.5, 0.1);
  p.oscillator.quality_factor = 1e4;
  p.spin.t2 = 2 * p.oscillator.period();
  const auto fr = ramsey_run(p, {}, Dissipators::from(p, true, true));
  const double v = visibility_analytic(1e4, p.spin.t2, p.oscillator.period(), 0.5);
  EXPECT_NEAR(fr.visibility, v, 0.05);
  EXPECT_LT(fr.visibility, 1.0);
}

}  // namespace
