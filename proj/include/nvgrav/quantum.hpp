#pragma once

// Ramsey sequence on spin-1 (x) truncated Fock space.
//
// Units: energies in hbar omega_z, time in 1/omega_z. The Hamiltonian is
//   H = d S_z^2 + c^dag c - 2 (r S_z - r_g)(c + c^dag),   d = D / omega_z,
// which is block diagonal in S_z. Every dissipator used here (amplitude
// damping of the mode, S_z dephasing) also respects the block structure, so
// each (s, s') block of the density matrix evolves on its own.
//
// Desk-scale only: the separation of the two branches grows like 4 r
// zero-point lengths, so r must stay of order one for N_cut <= 128.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nvgrav/constants.hpp"
#include "nvgrav/error.hpp"
#include "nvgrav/params.hpp"

namespace nvgrav::quantum {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using SpinMatrix = Eigen::Matrix3cd;
using SpinVector = Eigen::Vector3cd;

/// Spin basis index: 0 -> |-1>, 1 -> |0>, 2 -> |+1>.
[[nodiscard]] constexpr int spin_index(int s) { return s + 1; }
inline constexpr std::array<int, 3> kSpins{-1, 0, 1};

/// Dimensionless model parameters for a given Fock cutoff.
struct HybridModel {
  int n_cut = 0;        // highest retained Fock level
  double r = 0.0;       // lambda / hbar omega_z
  double r_g = 0.0;     // delta_lambda / hbar omega_z
  double d = 0.0;       // D / omega_z
  double omega_z = 1.0; // rad/s, converts physical times

  [[nodiscard]] static HybridModel from(const SystemParams& p, int n_cut) {
    if (n_cut < 4) throw InvalidArgument("Fock cutoff must be at least 4");
    const auto c = derive_coupling(p);
    const double sign = p.coupling.gradient < 0 ? -1.0 : 1.0;
    return {n_cut, sign * c.r, c.r_g, p.constants.D / p.oscillator.omega_z, p.oscillator.omega_z};
  }

  [[nodiscard]] int fock_dim() const { return n_cut + 1; }

  /// Force coefficient f_s in -f_s (c + c^dag) for spin s.
  [[nodiscard]] double force(int s) const { return 2.0 * (r * s - r_g); }
};

/// Cutoff large enough that a branch displaced by 2 f_s, starting from a
/// thermal state with occupancy `nbar`, keeps its top levels empty.
[[nodiscard]] inline int suggest_cutoff(double r, double r_g, double nbar) {
  const double f = 2.0 * std::max(std::abs(r - r_g), std::abs(r + r_g));
  const double mu = 4.0 * f * f;  // peak occupancy at maximal displacement 2 f
  const double spread = std::sqrt(mu * (2.0 * nbar + 1.0)) + nbar;
  return static_cast<int>(std::ceil(mu + 5.0 * spread + 30.0 * nbar + 10.0));
}

/// Hybrid Hamiltonian as a dense matrix of dimension 3 (N_cut + 1), in units
/// of hbar omega_z, basis ordered spin-major (|-1>, |0>, |+1>) (x) Fock.
[[nodiscard]] inline Matrix build_hamiltonian(const SystemParams& p, int n_cut) {
  const auto model = HybridModel::from(p, n_cut);
  const int nf = model.fock_dim();
  Matrix h = Matrix::Zero(3 * nf, 3 * nf);
  for (const int s : kSpins) {
    const int off = spin_index(s) * nf;
    const double f = model.force(s);
    for (int n = 0; n < nf; ++n) {
      h(off + n, off + n) = model.d * s * s + n;
      if (n + 1 < nf) {
        const double x = -f * std::sqrt(static_cast<double>(n + 1));
        h(off + n, off + n + 1) = x;
        h(off + n + 1, off + n) = x;
      }
    }
  }
  return h;
}

/// Thermal (Boltzmann) Fock state with mean occupancy nbar, renormalised on
/// the truncated space. Requires (nbar/(nbar+1))^N_cut <= 1e-8.
[[nodiscard]] inline Matrix thermal_state(double nbar, int n_cut) {
  if (!(nbar >= 0.0)) throw InvalidArgument("thermal occupancy must be non-negative");
  if (n_cut < 1) throw InvalidArgument("Fock cutoff must be positive");
  const double q = nbar / (nbar + 1.0);
  if (std::pow(q, n_cut) > 1e-8) {
    throw CutoffError("Fock cutoff too small for thermal occupancy " + std::to_string(nbar),
                      static_cast<int>(std::ceil(std::log(1e-8) / std::log(q))) + 1);
  }
  Matrix rho = Matrix::Zero(n_cut + 1, n_cut + 1);
  double norm = 0.0;
  double w = 1.0;
  for (int n = 0; n <= n_cut; ++n, w *= q) {
    rho(n, n) = w;
    norm += w;
  }
  return rho / norm;
}

/// Physicality diagnostics of a density matrix.
struct StateChecks {
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;

  [[nodiscard]] bool ok() const {
    return trace_error <= 1e-8 && hermiticity_error <= 1e-10 && min_eigenvalue >= -1e-8;
  }
};

/// Density matrix on span{|-1>,|0>,|+1>} (x) Fock(N_cut) with a time stamp.
class HybridState {
 public:
  HybridState(Matrix rho, int n_cut, double time = 0.0)
      : rho_(std::move(rho)), n_cut_(n_cut), time_(time) {
    if (rho_.rows() != 3 * (n_cut + 1) || rho_.cols() != rho_.rows()) {
      throw InvalidArgument("density matrix dimension does not match the Fock cutoff");
    }
  }

  /// |spin><spin| (x) fock_rho.
  [[nodiscard]] static HybridState product(const SpinVector& spin, const Matrix& fock_rho,
                                           double time = 0.0) {
    const int nf = static_cast<int>(fock_rho.rows());
    const SpinVector psi = spin.normalized();
    Matrix rho(3 * nf, 3 * nf);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        rho.block(a * nf, b * nf, nf, nf) = psi(a) * std::conj(psi(b)) * fock_rho;
      }
    }
    return HybridState(std::move(rho), nf - 1, time);
  }

  [[nodiscard]] const Matrix& rho() const { return rho_; }
  [[nodiscard]] Matrix& rho() { return rho_; }
  [[nodiscard]] int n_cut() const { return n_cut_; }
  [[nodiscard]] int fock_dim() const { return n_cut_ + 1; }
  [[nodiscard]] double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  [[nodiscard]] auto block(int s, int sp) const {
    return rho_.block(spin_index(s) * fock_dim(), spin_index(sp) * fock_dim(), fock_dim(),
                      fock_dim());
  }
  [[nodiscard]] auto block(int s, int sp) {
    return rho_.block(spin_index(s) * fock_dim(), spin_index(sp) * fock_dim(), fock_dim(),
                      fock_dim());
  }

  /// Spin density matrix with the mode traced out, ordered (|-1>, |0>, |+1>).
  [[nodiscard]] SpinMatrix spin_reduced() const {
    SpinMatrix out;
    for (const int s : kSpins) {
      for (const int sp : kSpins) out(spin_index(s), spin_index(sp)) = block(s, sp).trace();
    }
    return out;
  }

  [[nodiscard]] double spin_population(int s) const { return block(s, s).trace().real(); }

  /// <s| rho_spin |s'>.
  [[nodiscard]] Complex spin_coherence(int s, int sp) const { return block(s, sp).trace(); }

  /// Population of the top `levels` Fock states, summed over spin.
  [[nodiscard]] double top_fock_population(int levels = 2) const {
    double acc = 0.0;
    for (const int s : kSpins) {
      const auto b = block(s, s);
      for (int k = 0; k < levels && k <= n_cut_; ++k) acc += b(n_cut_ - k, n_cut_ - k).real();
    }
    return acc;
  }

  [[nodiscard]] double mean_phonon_number() const {
    double acc = 0.0;
    for (const int s : kSpins) {
      const auto b = block(s, s);
      for (int n = 0; n <= n_cut_; ++n) acc += n * b(n, n).real();
    }
    return acc;
  }

  [[nodiscard]] StateChecks check() const {
    StateChecks c;
    c.trace_error = std::abs(rho_.trace() - Complex(1.0, 0.0));
    c.hermiticity_error = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    const Matrix herm = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    return c;
  }

 private:
  Matrix rho_;
  int n_cut_;
  double time_;
};

/// Microwave pulse H_mw = hbar Omega (|+1><0| + e^{-i phi} |-1><0|) + h.c.,
/// treated as instantaneous on the motion. With this phase convention the
/// Ramsey population is cos^2((dphi + phi)/2).
struct PulseSpec {
  double rabi = 0.0;      // Omega, rad/s
  double duration = 0.0;  // t_p, s
  double phase = 0.0;     // phi, rad

  /// t_p = pi / (2 sqrt2 Omega): |0> -> (|+1> + e^{-i phi}|-1>)/sqrt2 up to phase.
  [[nodiscard]] static PulseSpec half_pi(double rabi, double phase = 0.0) {
    return {rabi, std::numbers::pi / (2.0 * std::numbers::sqrt2 * rabi), phase};
  }
  /// t_p = pi / (sqrt2 Omega): swaps |+1> and |-1> amplitudes.
  [[nodiscard]] static PulseSpec pi(double rabi, double phase = 0.0) {
    return {rabi, std::numbers::pi / (std::numbers::sqrt2 * rabi), phase};
  }

  /// Rotation angle in the {|0>, bright} subspace.
  [[nodiscard]] double angle() const { return std::numbers::sqrt2 * rabi * duration; }

  [[nodiscard]] SpinMatrix unitary() const {
    if (!(rabi > 0.0) || !(duration > 0.0)) {
      throw InvalidArgument("pulse needs positive Rabi frequency and duration");
    }
    SpinVector bright = SpinVector::Zero();
    bright(spin_index(1)) = 1.0 / std::numbers::sqrt2;
    bright(spin_index(-1)) = std::polar(1.0 / std::numbers::sqrt2, -phase);
    SpinVector zero = SpinVector::Zero();
    zero(spin_index(0)) = 1.0;
    const double th = angle();
    const SpinMatrix proj = bright * bright.adjoint() + zero * zero.adjoint();
    const SpinMatrix flip = bright * zero.adjoint() + zero * bright.adjoint();
    return SpinMatrix::Identity() + (std::cos(th) - 1.0) * proj -
           Complex(0.0, std::sin(th)) * flip;
  }
};

/// (U (x) 1) rho (U (x) 1)^dag for a spin unitary U.
[[nodiscard]] inline HybridState apply_spin_unitary(const HybridState& state, const SpinMatrix& u) {
  const int nf = state.fock_dim();
  Matrix out = Matrix::Zero(3 * nf, 3 * nf);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      auto dst = out.block(a * nf, b * nf, nf, nf);
      for (int c = 0; c < 3; ++c) {
        for (int e = 0; e < 3; ++e) {
          const Complex w = u(a, c) * std::conj(u(b, e));
          if (w == Complex(0.0, 0.0)) continue;
          dst += w * state.rho().block(c * nf, e * nf, nf, nf);
        }
      }
    }
  }
  return HybridState(std::move(out), state.n_cut(), state.time());
}

[[nodiscard]] inline HybridState apply_pulse(const HybridState& state, const PulseSpec& pulse) {
  return apply_spin_unitary(state, pulse.unitary());
}

/// Open-system channels. A zero rate switches a channel off.
struct Dissipators {
  double motional_rate = 0.0;  // gamma, rad/s (omega_z / Q)
  double bath_nbar = 0.0;      // thermal occupancy of the damping bath
  double t2 = 0.0;             // s; S_z dephasing at rate 1/(2 T2), 0 = off

  [[nodiscard]] bool any() const { return motional_rate > 0.0 || t2 > 0.0; }

  [[nodiscard]] static Dissipators from(const SystemParams& p, bool motional, bool dephasing) {
    Dissipators d;
    if (motional) {
      d.motional_rate = p.oscillator.omega_z / p.oscillator.quality_factor;
      d.bath_nbar = p.sequence.bath_nbar;
    }
    if (dephasing) d.t2 = p.spin.t2;
    return d;
  }
};

struct EvolveOptions {
  int samples = 16;               // cutoff-adequacy checkpoints along the evolution
  double tolerance = 1e-8;        // step-doubling acceptance on observables
  double cutoff_limit = 1e-6;     // max population of the top two Fock levels
  bool check_state = true;        // verify trace / Hermiticity / positivity at the end
};

namespace detail {

// Ladder-operator products on a square Fock block, using the truncated c.
struct Ladder {
  Eigen::VectorXd sq;     // sqrt(1..N)
  Eigen::VectorXd n;      // 0..N
  Eigen::VectorXd nplus;  // diag(c c^dag) = 1..N, 0

  explicit Ladder(int n_cut) : sq(n_cut), n(n_cut + 1), nplus(n_cut + 1) {
    for (int k = 0; k < n_cut; ++k) sq(k) = std::sqrt(k + 1.0);
    for (int k = 0; k <= n_cut; ++k) {
      n(k) = k;
      nplus(k) = k < n_cut ? k + 1.0 : 0.0;
    }
  }

  [[nodiscard]] int size() const { return static_cast<int>(n.size()); }

  // (c + c^dag) X
  [[nodiscard]] Matrix x_left(const Matrix& x) const {
    const int m = static_cast<int>(sq.size());
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    out.topRows(m) += sq.asDiagonal() * x.bottomRows(m);
    out.bottomRows(m) += sq.asDiagonal() * x.topRows(m);
    return out;
  }
  // X (c + c^dag)
  [[nodiscard]] Matrix x_right(const Matrix& x) const {
    const int m = static_cast<int>(sq.size());
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    out.rightCols(m) += x.leftCols(m) * sq.asDiagonal();
    out.leftCols(m) += x.rightCols(m) * sq.asDiagonal();
    return out;
  }
  // c X c^dag
  [[nodiscard]] Matrix c_x_cdag(const Matrix& x) const {
    const int m = static_cast<int>(sq.size());
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    out.topLeftCorner(m, m) = sq.asDiagonal() * x.bottomRightCorner(m, m) * sq.asDiagonal();
    return out;
  }
  // c^dag X c
  [[nodiscard]] Matrix cdag_x_c(const Matrix& x) const {
    const int m = static_cast<int>(sq.size());
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    out.bottomRightCorner(m, m) = sq.asDiagonal() * x.topLeftCorner(m, m) * sq.asDiagonal();
    return out;
  }
};

// Generator for block rho_{s s'} without the d (s^2 - s'^2) phase.
struct BlockGenerator {
  const Ladder* ladder;
  double f_left;    // f_s
  double f_right;   // f_s'
  double gamma;     // motional damping / omega_z
  double nbar;
  double dephase;   // total dephasing rate of this block / omega_z

  [[nodiscard]] Matrix operator()(const Matrix& x) const {
    const auto& L = *ladder;
    const Complex mi(0.0, -1.0);
    // H_s X - X H_s'  with H_s = N - f_s (c + c^dag)
    Matrix hx = L.n.asDiagonal() * x - x * L.n.asDiagonal();
    hx -= f_left * L.x_left(x);
    hx += f_right * L.x_right(x);
    Matrix out = mi * hx;
    if (gamma > 0.0) {
      out += gamma * (nbar + 1.0) *
             (L.c_x_cdag(x) - 0.5 * (L.n.asDiagonal() * x + x * L.n.asDiagonal()));
      if (nbar > 0.0) {
        out += gamma * nbar *
               (L.cdag_x_c(x) - 0.5 * (L.nplus.asDiagonal() * x + x * L.nplus.asDiagonal()));
      }
    }
    if (dephase > 0.0) out -= dephase * x;
    return out;
  }
};

inline Matrix rk4_step(const BlockGenerator& gen, const Matrix& x, double h) {
  const Matrix k1 = gen(x);
  const Matrix k2 = gen(x + 0.5 * h * k1);
  const Matrix k3 = gen(x + 0.5 * h * k2);
  const Matrix k4 = gen(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline bool block_is_zero(const HybridState& st, int s, int sp) {
  return st.block(s, sp).cwiseAbs().maxCoeff() == 0.0;
}

inline void check_cutoff(const HybridState& st, const HybridModel& model, double limit,
                         double nbar_hint) {
  const double top = st.top_fock_population(2);
  if (top > limit) {
    int suggested = suggest_cutoff(model.r, model.r_g, nbar_hint);
    if (suggested <= model.n_cut) suggested = 2 * model.n_cut;
    throw CutoffError("Fock cutoff " + std::to_string(model.n_cut) +
                          " inadequate: top-level population " + std::to_string(top) +
                          " exceeds " + std::to_string(limit) + "; try N_cut = " +
                          std::to_string(suggested),
                      suggested);
  }
}

inline void check_physical(const HybridState& st) {
  const auto c = st.check();
  if (!c.ok()) {
    throw Error("state lost physicality: trace error " + std::to_string(c.trace_error) +
                ", hermiticity error " + std::to_string(c.hermiticity_error) +
                ", min eigenvalue " + std::to_string(c.min_eigenvalue));
  }
}

}  // namespace detail

/// Evolve for `duration` seconds. Closed dynamics use the exact propagator of
/// each S_z block; with dissipators the blocks are integrated with fixed-step
/// RK4, doubling the step count until spin populations, coherences and phonon
/// numbers change by no more than options.tolerance. Throws CutoffError if the
/// top two Fock levels ever hold more than options.cutoff_limit.
[[nodiscard]] inline HybridState evolve(const HybridState& state, const HybridModel& model,
                                        double duration, const Dissipators& diss = {},
                                        const EvolveOptions& options = {}) {
  if (!(duration > 0.0)) throw InvalidArgument("evolution duration must be positive");
  if (state.n_cut() != model.n_cut) throw InvalidArgument("state and model cutoffs differ");
  const int nf = model.fock_dim();
  const double tau = duration * model.omega_z;
  const int samples = std::max(1, options.samples);
  const double nbar_hint = std::max(state.mean_phonon_number(), diss.bath_nbar);

  std::array<bool, 9> live{};
  for (const int s : kSpins) {
    for (const int sp : kSpins) {
      live[spin_index(s) * 3 + spin_index(sp)] = !detail::block_is_zero(state, s, sp);
    }
  }
  auto is_live = [&](int s, int sp) { return live[spin_index(s) * 3 + spin_index(sp)]; };

  HybridState out = state;
  out.set_time(state.time() + duration);

  if (!diss.any()) {
    std::array<Eigen::MatrixXd, 3> vecs;
    std::array<Eigen::VectorXd, 3> vals;
    for (const int s : kSpins) {
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nf, nf);
      const double f = model.force(s);
      for (int n = 0; n < nf; ++n) {
        h(n, n) = n;
        if (n + 1 < nf) h(n, n + 1) = h(n + 1, n) = -f * std::sqrt(n + 1.0);
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
      vecs[spin_index(s)] = es.eigenvectors();
      vals[spin_index(s)] = es.eigenvalues();
    }
    auto propagator = [&](int s, double t) -> Matrix {
      const auto& v = vecs[spin_index(s)];
      const auto& e = vals[spin_index(s)];
      Eigen::VectorXcd ph(nf);
      for (int k = 0; k < nf; ++k) ph(k) = std::polar(1.0, -e(k) * t);
      return v.cast<Complex>() * ph.asDiagonal() * v.transpose().cast<Complex>();
    };
    for (int k = 1; k < samples; ++k) {
      HybridState probe = state;
      const double t = tau * k / samples;
      for (const int s : kSpins) {
        if (!is_live(s, s)) continue;
        const Matrix u = propagator(s, t);
        probe.block(s, s) = u * state.block(s, s) * u.adjoint();
      }
      detail::check_cutoff(probe, model, options.cutoff_limit, nbar_hint);
    }
    std::array<Matrix, 3> u;
    for (const int s : kSpins) u[spin_index(s)] = propagator(s, tau);
    for (const int s : kSpins) {
      for (const int sp : kSpins) {
        if (!is_live(s, sp)) continue;
        const Complex dphase = std::polar(1.0, -model.d * (s * s - sp * sp) * tau);
        out.block(s, sp) = dphase * u[spin_index(s)] * state.block(s, sp) *
                           u[spin_index(sp)].adjoint();
      }
    }
  } else {
    const detail::Ladder ladder(model.n_cut);
    const double gamma = diss.motional_rate / model.omega_z;
    const double dephase_rate = diss.t2 > 0.0 ? 1.0 / (2.0 * diss.t2 * model.omega_z) : 0.0;

    double fmax = 0.0;
    for (const int s : kSpins) fmax = std::max(fmax, std::abs(model.force(s)));
    const double bound = nf + 4.0 * fmax * std::sqrt(static_cast<double>(nf)) +
                         gamma * (2.0 * diss.bath_nbar + 1.0) * nf + 2.0 * dephase_rate;
    int steps_per_sample = std::max(1, static_cast<int>(std::ceil(tau * bound / (0.5 * samples))));

    auto run = [&](int per_sample, bool check) {
      HybridState st = state;
      const double h = tau / (static_cast<double>(per_sample) * samples);
      for (const int s : kSpins) {
        for (const int sp : kSpins) {
          if (!is_live(s, sp)) continue;
          const detail::BlockGenerator gen{&ladder, model.force(s), model.force(sp), gamma,
                                           diss.bath_nbar, 0.5 * dephase_rate * (s - sp) * (s - sp)};
          Matrix x = state.block(s, sp);
          for (int k = 0; k < samples; ++k) {
            for (int j = 0; j < per_sample; ++j) x = detail::rk4_step(gen, x, h);
            if (check && s == sp) {
              // adequacy only depends on the diagonal blocks; check them as we go
              const double top = (x(nf - 1, nf - 1) + x(nf - 2, nf - 2)).real();
              if (top > options.cutoff_limit) {
                HybridState probe = st;
                probe.block(s, sp) = x;
                detail::check_cutoff(probe, model, options.cutoff_limit, nbar_hint);
              }
            }
          }
          st.block(s, sp) = std::polar(1.0, -model.d * (s * s - sp * sp) * tau) * x;
        }
      }
      return st;
    };
    auto observables = [&](const HybridState& st) {
      std::vector<double> obs;
      for (const int s : kSpins) {
        for (const int sp : kSpins) {
          if (!is_live(s, sp)) continue;
          const Complex tr = st.block(s, sp).trace();
          obs.push_back(tr.real());
          obs.push_back(tr.imag());
          if (s == sp) {
            double nmean = 0.0;
            for (int n = 0; n < nf; ++n) nmean += n * st.block(s, s)(n, n).real();
            obs.push_back(nmean);
          }
        }
      }
      return obs;
    };

    HybridState coarse = run(steps_per_sample, false);
    for (;;) {
      HybridState fine = run(2 * steps_per_sample, true);
      const auto a = observables(coarse);
      const auto b = observables(fine);
      double diff = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
      steps_per_sample *= 2;
      coarse = std::move(fine);
      if (diff <= options.tolerance) break;
      if (steps_per_sample > (1 << 22)) throw Error("RK4 step doubling did not converge");
    }
    out.rho() = coarse.rho();
  }

  detail::check_cutoff(out, model, options.cutoff_limit, nbar_hint);
  if (options.check_state) detail::check_physical(out);
  return out;
}

/// Sampled fringe and its least-squares fit to 1/2 [1 + V cos(dphi + phi)].
struct Fringe {
  std::vector<double> phases;       // phi_k, rad
  std::vector<double> populations;  // P0(phi_k)
  double delta_phi = 0.0;           // fitted phase, wrapped to [0, 2 pi)
  double visibility = 0.0;
  double residual = 0.0;            // RMS of the fit residuals
  bool converged = false;
};

[[nodiscard]] inline double wrap_phase(double x) {
  double w = std::fmod(x, kTwoPi);
  if (w < 0) w += kTwoPi;
  return w;
}

/// Signed distance between two phases on the circle, in (-pi, pi].
[[nodiscard]] inline double phase_distance(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  return d;
}

/// Initial guess from the first discrete Fourier component of 2 P0 - 1,
/// refined by Gauss-Newton on (V, dphi).
[[nodiscard]] inline Fringe fit_fringe(std::vector<double> phases, std::vector<double> p0) {
  if (phases.size() != p0.size() || phases.size() < 3) {
    throw InvalidArgument("fringe fit needs matching phase and population samples");
  }
  const std::size_t k = phases.size();
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    re += (2.0 * p0[i] - 1.0) * std::cos(phases[i]);
    im += (2.0 * p0[i] - 1.0) * std::sin(phases[i]);
  }
  double vis = 2.0 * std::hypot(re, im) / static_cast<double>(k);
  double dphi = std::atan2(-im, re);

  Fringe fr;
  auto sse = [&](double v, double d) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double r = p0[i] - 0.5 * (1.0 + v * std::cos(d + phases[i]));
      acc += r * r;
    }
    return acc;
  };
  for (int it = 0; it < 100; ++it) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < k; ++i) {
      const double c = std::cos(dphi + phases[i]);
      const double s = std::sin(dphi + phases[i]);
      const double r = p0[i] - 0.5 * (1.0 + vis * c);
      const Eigen::Vector2d j(0.5 * c, -0.5 * vis * s);
      jtj += j * j.transpose();
      jtr += j * r;
    }
    if (std::abs(jtj.determinant()) < 1e-300) break;
    const Eigen::Vector2d step = jtj.ldlt().solve(jtr);
    double scale = 1.0;
    const double before = sse(vis, dphi);
    while (scale > 1e-6 && sse(vis + scale * step(0), dphi + scale * step(1)) > before) scale *= 0.5;
    vis += scale * step(0);
    dphi += scale * step(1);
    if (std::abs(scale * step(0)) < 1e-15 && std::abs(scale * step(1)) < 1e-15) {
      fr.converged = true;
      break;
    }
  }
  if (vis < 0) {
    vis = -vis;
    dphi += std::numbers::pi;
  }
  fr.residual = std::sqrt(sse(vis, dphi) / static_cast<double>(k));
  fr.phases = std::move(phases);
  fr.populations = std::move(p0);
  fr.delta_phi = wrap_phase(dphi);
  fr.visibility = vis;
  if (!fr.converged) fr.converged = fr.residual < 1e-3;
  return fr;
}

/// K equally spaced readout phases on [0, 2 pi).
[[nodiscard]] inline std::vector<double> uniform_phases(int k) {
  if (k < 8) throw InvalidArgument("fringe scan needs at least 8 phase points");
  std::vector<double> out(k);
  for (int i = 0; i < k; ++i) out[i] = kTwoPi * i / k;
  return out;
}

struct RamseyOptions {
  int n_cut = 0;                   // 0 = suggest_cutoff()
  double initial_nbar = 0.0;
  std::vector<double> phases;      // empty = uniform_phases(16)
  EvolveOptions evolve{};
};

/// pi/2 -> free evolution for one mechanical period -> pi/2(phi) -> read P0.
/// The second pulse only acts on the spin, so the final populations follow
/// from the reduced spin state after the free evolution.
[[nodiscard]] inline Fringe ramsey_run(const SystemParams& p, const RamseyOptions& opt,
                                       const Dissipators& diss = {}) {
  const auto probe = HybridModel::from(p, 4);
  const int n_cut =
      opt.n_cut > 0 ? opt.n_cut : suggest_cutoff(probe.r, probe.r_g, opt.initial_nbar);
  const auto model = HybridModel::from(p, n_cut);
  const auto phases = opt.phases.empty() ? uniform_phases(16) : opt.phases;
  if (phases.size() < 8) throw InvalidArgument("fringe scan needs at least 8 phase points");

  SpinVector zero = SpinVector::Zero();
  zero(spin_index(0)) = 1.0;
  auto st = HybridState::product(zero, thermal_state(opt.initial_nbar, n_cut));
  st = apply_pulse(st, PulseSpec::half_pi(p.spin.rabi, 0.0));
  st = evolve(st, model, p.oscillator.period(), diss, opt.evolve);
  const SpinMatrix spin = st.spin_reduced();

  std::vector<double> p0(phases.size());
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const SpinMatrix u = PulseSpec::half_pi(p.spin.rabi, phases[i]).unitary();
    p0[i] = (u * spin * u.adjoint())(spin_index(0), spin_index(0)).real();
  }
  return fit_fringe(phases, std::move(p0));
}

/// Heuristic fringe visibility exp(-(2 pi/Q)(2 r)^2) exp(-t0/T2).
/// Infinite Q or T2 switch the corresponding factor off.
[[nodiscard]] inline double visibility_analytic(double q, double t2, double t0, double r) {
  if (!(q > 0.0) || !(t2 > 0.0)) throw InvalidArgument("Q and T2 must be positive");
  const double motional = std::isinf(q) ? 0.0 : kTwoPi / q * (2.0 * r) * (2.0 * r);
  const double dephasing = std::isinf(t2) ? 0.0 : t0 / t2;
  return std::exp(-motional) * std::exp(-dephasing);
}

}  // namespace nvgrav::quantum
