#pragma once

// Monte-Carlo dephasing of the |+1>/|-1> qubit under Ornstein-Uhlenbeck
// detuning noise, free and under the phase-modulated continuous drive.
//
// Rotating frame of the carrier (rotating-wave approximation):
//   H(t) = delta(t)/2 sz + (Omega1 + dOmega1(t))/2 (cos phi(t) sx + sin phi(t) sy),
//   phi(t) = (2 Omega2 / Omega1) sin(Omega1 t).
// delta(t) is the transition-frequency noise in rad/s, so the free phase is
// the integral of delta and T2* = 1/(sigma^2 tau_c) for fast noise.

#include <array>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "nvgrav/constants.hpp"
#include "nvgrav/error.hpp"
#include "nvgrav/parallel.hpp"

namespace nvgrav::dd {

using Complex = std::complex<double>;

struct OUNoise {
  double sigma = kTwoPi * 1e4;  // stationary std, rad/s
  double tau_c = 2e-6;          // correlation time, s
  std::uint64_t seed = 1;
  double dt = 0.0;              // 0 = tau_c / 20
};

/// Modulated continuous drive; `relative_noise` is the stationary std of
/// dOmega1 / Omega1, itself OU with correlation time `noise_tau`.
struct DriveSpec {
  double omega1 = kTwoPi * 1e6;
  double omega2 = kTwoPi * 1e4;
  double carrier = kTwoPi * 2.88e9;
  double relative_noise = 1e-3;
  double noise_tau = 100e-6;

  [[nodiscard]] double phase(double t) const {
    return omega1 > 0 ? 2.0 * omega2 / omega1 * std::sin(omega1 * t) : 0.0;
  }
};

/// Hierarchy Omega2 <= Omega1/10 <= omega0/1000; violations are returned,
/// the RWA precondition Omega1 <= omega0/100 throws.
[[nodiscard]] inline std::vector<std::string> check_drive(const DriveSpec& d) {
  if (!(d.omega1 > 0) || d.omega2 < 0 || !(d.carrier > 0)) {
    throw InvalidArgument("drive needs Omega1 > 0, Omega2 >= 0, omega0 > 0");
  }
  if (d.omega1 > d.carrier / 100.0) {
    throw InvalidArgument("rotating-wave approximation needs Omega1 <= omega0 / 100");
  }
  if (d.relative_noise < 0 || !(d.noise_tau > 0)) {
    throw InvalidArgument("drive noise needs std >= 0 and positive correlation time");
  }
  std::vector<std::string> warn;
  if (d.omega2 > d.omega1 / 10.0) warn.emplace_back("Omega2 exceeds Omega1 / 10");
  if (d.omega1 / 10.0 > d.carrier / 1000.0) warn.emplace_back("Omega1 / 10 exceeds omega0 / 1000");
  return warn;
}

/// Independent generator for trajectory `index` of a run seeded by `master`.
[[nodiscard]] inline std::mt19937_64 trajectory_rng(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// Exact discretisation x' = a x + sigma sqrt(1 - a^2) xi, started stationary.
class OUProcess {
 public:
  OUProcess(double sigma, double tau, double dt)
      : sigma_(sigma), a_(std::exp(-dt / tau)), b_(sigma * std::sqrt(1.0 - a_ * a_)) {}

  template <class Rng>
  double start(Rng& rng) {
    x_ = sigma_ > 0 ? sigma_ * normal_(rng) : 0.0;
    return x_;
  }
  template <class Rng>
  double step(Rng& rng) {
    if (sigma_ > 0) x_ = a_ * x_ + b_ * normal_(rng);
    return x_;
  }
  [[nodiscard]] double value() const { return x_; }

 private:
  double sigma_;
  double a_;
  double b_;
  double x_ = 0.0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

[[nodiscard]] inline double resolve_dt(const OUNoise& n) {
  if (n.sigma < 0 || !(n.tau_c > 0)) throw InvalidArgument("noise needs sigma >= 0, tau_c > 0");
  const double dt = n.dt > 0 ? n.dt : n.tau_c / 20.0;
  if (dt > n.tau_c / 10.0 * (1.0 + 1e-12)) {
    throw InvalidArgument("noise step must satisfy dt <= tau_c / 10");
  }
  return dt;
}

struct NoiseTrace {
  double dt = 0.0;
  std::vector<double> values;
};

/// One OU realisation sampled at k dt, k = 0..ceil(duration/dt).
[[nodiscard]] inline NoiseTrace generate_noise(const OUNoise& spec, double duration,
                                               std::uint64_t index = 0) {
  if (!(duration > 0)) throw InvalidArgument("noise duration must be positive");
  NoiseTrace tr;
  tr.dt = resolve_dt(spec);
  const auto n = static_cast<std::size_t>(std::ceil(duration / tr.dt));
  auto rng = trajectory_rng(spec.seed, index);
  OUProcess ou(spec.sigma, spec.tau_c, tr.dt);
  tr.values.resize(n + 1);
  tr.values[0] = ou.start(rng);
  for (std::size_t k = 1; k <= n; ++k) tr.values[k] = ou.step(rng);
  return tr;
}

/// Fit of exp(-(t/T2)^p).
struct DecayFit {
  int p = 1;
  double t2 = std::numeric_limits<double>::infinity();
  double stderr_t2 = 0.0;  // jackknife over trajectory batches
  double rms_residual = 0.0;
};

struct CoherenceEnvelope {
  std::vector<double> times;
  std::vector<double> coherence;  // |<sigma_+>| normalised to 1 at t = 0
  std::vector<double> stderr;     // Monte-Carlo standard error per time
  int trajectories = 0;
  DecayFit exponential;           // p = 1
  DecayFit gaussian;              // p = 2
  DecayFit best;                  // smaller residual of the two
};

namespace detail {

inline double fit_sse(const std::vector<double>& t, const std::vector<double>& y, double t2, int p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double m = std::exp(-std::pow(t[i] / t2, p));
    acc += (y[i] - m) * (y[i] - m);
  }
  return acc;
}

inline bool no_decay(const std::vector<double>& y) {
  for (const double v : y) {
    if (v < 1.0 - 1e-9) return false;
  }
  return true;
}

/// Least-squares T2 for fixed p by Brent search in log T2.
inline double fit_t2(const std::vector<double>& t, const std::vector<double>& y, int p) {
  if (no_decay(y)) return std::numeric_limits<double>::infinity();
  const double span = t.back();
  const double lo = std::log(span * 1e-4);
  const double hi = std::log(span * 1e4);
  const auto res = boost::math::tools::brent_find_minima(
      [&](double lt) { return fit_sse(t, y, std::exp(lt), p); }, lo, hi, 52);
  return std::exp(res.first);
}

// Per-trajectory complex coherence at every sample time, row-major.
struct Samples {
  std::vector<double> times;
  std::vector<Complex> values;  // trajectories x times
  std::size_t n_times = 0;
};

inline CoherenceEnvelope reduce(const Samples& s, int n_traj) {
  const std::size_t nt = s.n_times;
  CoherenceEnvelope env;
  env.times = s.times;
  env.trajectories = n_traj;
  std::vector<Complex> total(nt, Complex(0.0, 0.0));
  std::vector<double> sq(nt, 0.0);
  for (int j = 0; j < n_traj; ++j) {
    for (std::size_t i = 0; i < nt; ++i) {
      const Complex v = s.values[static_cast<std::size_t>(j) * nt + i];
      total[i] += v;
      sq[i] += std::norm(v);
    }
  }
  const Complex norm0 = total[0] / static_cast<double>(n_traj);
  env.coherence.resize(nt);
  env.stderr.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    const Complex mean = total[i] / static_cast<double>(n_traj);
    env.coherence[i] = std::abs(mean) / std::abs(norm0);
    const double var = std::max(0.0, sq[i] / n_traj - std::norm(mean));
    env.stderr[i] = std::sqrt(var / std::max(1, n_traj - 1)) / std::abs(norm0);
  }

  constexpr int kBatches = 10;
  auto fit_with_jackknife = [&](int p) {
    DecayFit f;
    f.p = p;
    f.t2 = fit_t2(env.times, env.coherence, p);
    f.rms_residual =
        std::isfinite(f.t2) ? std::sqrt(fit_sse(env.times, env.coherence, f.t2, p) / nt) : 0.0;
    if (!std::isfinite(f.t2) || n_traj < 2 * kBatches) return f;
    std::vector<double> loo(kBatches);
    for (int b = 0; b < kBatches; ++b) {
      const int j0 = n_traj * b / kBatches;
      const int j1 = n_traj * (b + 1) / kBatches;
      std::vector<Complex> part = total;
      for (int j = j0; j < j1; ++j) {
        for (std::size_t i = 0; i < nt; ++i) part[i] -= s.values[static_cast<std::size_t>(j) * nt + i];
      }
      std::vector<double> y(nt);
      for (std::size_t i = 0; i < nt; ++i) y[i] = std::abs(part[i]) / std::abs(part[0]);
      loo[static_cast<std::size_t>(b)] = fit_t2(env.times, y, p);
    }
    double mean = 0.0;
    for (const double v : loo) mean += v / kBatches;
    double acc = 0.0;
    for (const double v : loo) acc += (v - mean) * (v - mean);
    f.stderr_t2 = std::sqrt((kBatches - 1.0) / kBatches * acc);
    return f;
  };
  env.exponential = fit_with_jackknife(1);
  env.gaussian = fit_with_jackknife(2);
  env.best = env.gaussian.rms_residual < env.exponential.rms_residual ? env.gaussian
                                                                       : env.exponential;
  return env;
}

// exp(-i h (x sx + y sy + z sz))
inline std::array<Complex, 4> su2(double x, double y, double z, double h) {
  const double n = std::sqrt(x * x + y * y + z * z);
  const double c = std::cos(n * h);
  const double s = n > 0 ? std::sin(n * h) / n : h;
  const Complex i(0.0, 1.0);
  return {c - i * s * z, -i * s * Complex(x, -y), -i * s * Complex(x, y), c + i * s * z};
}

inline std::array<Complex, 2> apply(const std::array<Complex, 4>& u, const std::array<Complex, 2>& v) {
  return {u[0] * v[0] + u[1] * v[1], u[2] * v[0] + u[3] * v[1]};
}

inline std::array<Complex, 4> compose(const std::array<Complex, 4>& a, const std::array<Complex, 4>& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

// One 4th-order commutator-free Magnus step from t to t + h. `detuning` and
// `rabi` are held fixed over the step; only the drive phase varies.
inline std::array<Complex, 4> cf4_step(const DriveSpec& d, double t, double h, double detuning,
                                       double rabi) {
  static const double g1 = 0.5 - std::sqrt(3.0) / 6.0;
  static const double g2 = 0.5 + std::sqrt(3.0) / 6.0;
  static const double a1 = 0.25 + std::sqrt(3.0) / 6.0;
  static const double a2 = 0.25 - std::sqrt(3.0) / 6.0;
  const double p1 = d.phase(t + g1 * h);
  const double p2 = d.phase(t + g2 * h);
  const double amp = 0.5 * rabi;
  const double x1 = amp * std::cos(p1), y1 = amp * std::sin(p1);
  const double x2 = amp * std::cos(p2), y2 = amp * std::sin(p2);
  const double z = 0.5 * detuning;
  const auto first = su2(a1 * x1 + a2 * x2, a1 * y1 + a2 * y2, (a1 + a2) * z, h);
  const auto second = su2(a2 * x1 + a1 * x2, a2 * y1 + a1 * y2, (a1 + a2) * z, h);
  return compose(second, first);
}

inline void check_run(int n_traj, int samples, double duration) {
  if (n_traj < 100) throw InvalidArgument("need at least 100 trajectories");
  if (samples < 2) throw InvalidArgument("need at least 2 envelope samples");
  if (!(duration > 0)) throw InvalidArgument("duration must be positive");
}

}  // namespace detail

/// Free induction decay: phase = integral of delta (trapezoid on the OU grid).
[[nodiscard]] inline CoherenceEnvelope free_decay(const OUNoise& noise, double duration, int n_traj,
                                                  int samples = 100, int workers = 1) {
  detail::check_run(n_traj, samples, duration);
  const double dt0 = resolve_dt(noise);
  const auto per = static_cast<std::size_t>(std::ceil(duration / (dt0 * samples)));
  const double dt = duration / static_cast<double>(per * samples);
  detail::Samples s;
  s.n_times = static_cast<std::size_t>(samples) + 1;
  for (std::size_t i = 0; i < s.n_times; ++i) s.times.push_back(duration * i / samples);
  s.values.assign(static_cast<std::size_t>(n_traj) * s.n_times, Complex(0.0, 0.0));
  parallel_for(static_cast<std::size_t>(n_traj), workers, [&](std::size_t j) {
    auto rng = trajectory_rng(noise.seed, j);
    OUProcess ou(noise.sigma, noise.tau_c, dt);
    double prev = ou.start(rng);
    double phase = 0.0;
    Complex* out = &s.values[j * s.n_times];
    out[0] = 1.0;
    for (std::size_t i = 1; i < s.n_times; ++i) {
      for (std::size_t k = 0; k < per; ++k) {
        const double next = ou.step(rng);
        phase += 0.5 * (prev + next) * dt;
        prev = next;
      }
      out[i] = std::polar(1.0, phase);
    }
  });
  return detail::reduce(s, n_traj);
}

/// Driven decay, coherence 2 conj(c0) c1 of the state in the toggling frame
/// of the noiseless drive, starting from |+y> (orthogonal to the drive axis).
/// Step dt = min(tau_c, 2 pi/Omega1)/20.
[[nodiscard]] inline CoherenceEnvelope decoupled_decay(const OUNoise& noise, const DriveSpec& drive,
                                                       double duration, int n_traj,
                                                       int samples = 100, int workers = 1) {
  detail::check_run(n_traj, samples, duration);
  (void)check_drive(drive);
  (void)resolve_dt(noise);
  const double dt0 = std::min(noise.tau_c, kTwoPi / drive.omega1) / 20.0;
  const auto per = static_cast<std::size_t>(std::ceil(duration / (dt0 * samples)));
  const double dt = duration / static_cast<double>(per * samples);

  // Noiseless reference propagator at each sample time.
  std::vector<std::array<Complex, 4>> ref(static_cast<std::size_t>(samples) + 1);
  ref[0] = {1.0, 0.0, 0.0, 1.0};
  {
    std::array<Complex, 4> u = ref[0];
    std::size_t step = 0;
    for (std::size_t i = 1; i <= static_cast<std::size_t>(samples); ++i) {
      for (std::size_t k = 0; k < per; ++k, ++step) {
        u = detail::compose(detail::cf4_step(drive, step * dt, dt, 0.0, drive.omega1), u);
      }
      ref[i] = u;
    }
  }

  detail::Samples s;
  s.n_times = static_cast<std::size_t>(samples) + 1;
  for (std::size_t i = 0; i < s.n_times; ++i) s.times.push_back(duration * i / samples);
  s.values.assign(static_cast<std::size_t>(n_traj) * s.n_times, Complex(0.0, 0.0));
  const double inv = 1.0 / std::sqrt(2.0);
  parallel_for(static_cast<std::size_t>(n_traj), workers, [&](std::size_t j) {
    auto rng = trajectory_rng(noise.seed, j);
    OUProcess det(noise.sigma, noise.tau_c, dt);
    OUProcess amp(drive.relative_noise, drive.noise_tau, dt);
    double delta = det.start(rng);
    double eps = amp.start(rng);
    std::array<Complex, 2> psi{Complex(inv, 0.0), Complex(0.0, inv)};
    Complex* out = &s.values[j * s.n_times];
    out[0] = 2.0 * std::conj(psi[0]) * psi[1];
    std::size_t step = 0;
    for (std::size_t i = 1; i < s.n_times; ++i) {
      for (std::size_t k = 0; k < per; ++k, ++step) {
        psi = detail::apply(detail::cf4_step(drive, step * dt, dt, delta, drive.omega1 * (1.0 + eps)), psi);
        delta = det.step(rng);
        eps = amp.step(rng);
      }
      const auto& u = ref[i];
      // toggling frame: U_ref^dag psi
      const Complex c0 = std::conj(u[0]) * psi[0] + std::conj(u[2]) * psi[1];
      const Complex c1 = std::conj(u[1]) * psi[0] + std::conj(u[3]) * psi[1];
      out[i] = 2.0 * std::conj(c0) * c1;
    }
  });
  return detail::reduce(s, n_traj);
}

/// exp(-sigma^2 tau_c^2 (x - 1 + e^{-x})), x = t/tau_c: exact free-decay
/// coherence for Gaussian OU detuning noise.
[[nodiscard]] inline double ou_coherence(double sigma, double tau_c, double t) {
  const double x = t / tau_c;
  return std::exp(-sigma * sigma * tau_c * tau_c * (x - 1.0 + std::exp(-x)));
}

/// Motional-narrowing limit T2* = 1 / (sigma^2 tau_c).
[[nodiscard]] inline double motional_narrowing_t2(double sigma, double tau_c) {
  return 1.0 / (sigma * sigma * tau_c);
}

}  // namespace nvgrav::dd
