#pragma once

// Classical picture of the spin-dependent oscillator: branch trajectories,
// their actions, the gravity phase, and the second-gradient systematic.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "nvgrav/constants.hpp"
#include "nvgrav/error.hpp"
#include "nvgrav/params.hpp"

namespace nvgrav::classical {

struct AccelerationPair {
  double plus = 0.0;   // m/s^2, branch S_z = +1
  double minus = 0.0;  // m/s^2, branch S_z = -1
};

/// g_pm = +/- g_NV mu_B B_g / 2m, the conventional figure for the
/// spin-dependent acceleration.
[[nodiscard]] inline AccelerationPair spin_acceleration(const SystemParams& p) {
  const double a = p.constants.zeeman() * p.coupling.gradient / (2.0 * p.oscillator.mass);
  return {a, -a};
}

/// Acceleration of the S_z = +1 branch implied by the coupling term
/// -2 lambda S_z (c + c^dagger): the force is 2 g_NV mu_B B_g S_z, four times
/// the conventional g_pm. Trajectories and actions use this value; it is the
/// one under which the action difference equals 16 lambda dlambda t0/(hbar^2 w).
[[nodiscard]] inline double coupled_spin_acceleration(const SystemParams& p) {
  return 2.0 * p.constants.zeeman() * p.coupling.gradient / p.oscillator.mass;
}

struct Equilibrium {
  double z0 = 0.0;               // g / omega_z^2
  double delta_z = 0.0;          // |g_pm| / omega_z^2
  double coupled_delta_z = 0.0;  // branch offset used by the trajectories (4 delta_z)
};

[[nodiscard]] inline Equilibrium equilibrium(const SystemParams& p) {
  const double w = p.oscillator.omega_z;
  if (!(w > 0.0)) throw InvalidArgument("trap frequency must be positive");
  const double w2 = w * w;
  return {p.constants.g_local / w2, std::abs(spin_acceleration(p).plus) / w2,
          std::abs(coupled_spin_acceleration(p)) / w2};
}

struct Trajectory {
  int branch = 1;              // +1 or -1
  std::vector<double> t;       // s
  std::vector<double> z;       // m
  std::vector<double> v;       // m/s
  double acceleration = 0.0;   // g_eff = g + branch * a_spin
};

namespace detail {

inline void check_branch(int branch) {
  if (branch != 1 && branch != -1) throw InvalidArgument("branch must be +1 or -1");
}

inline void check_samples(int n) {
  if (n < 2) throw InvalidArgument("trajectory needs at least 2 samples");
}

}  // namespace detail

/// Closed-form branch path z(t) = z0 + branch * dz (1 - cos w t) over one
/// mechanical period, starting at rest at the gravitational sag z0.
[[nodiscard]] inline Trajectory trajectory(int branch, const SystemParams& p, int n_samples) {
  detail::check_branch(branch);
  detail::check_samples(n_samples);
  const double w = p.oscillator.omega_z;
  const double t0 = p.oscillator.period();
  const double a_spin = coupled_spin_acceleration(p);
  const double z0 = p.constants.g_local / (w * w);
  const double dz = branch * a_spin / (w * w);

  Trajectory tr;
  tr.branch = branch;
  tr.acceleration = p.constants.g_local + branch * a_spin;
  tr.t.resize(n_samples);
  tr.z.resize(n_samples);
  tr.v.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    // Pin the last sample to t0 exactly so 1 - cos closes to zero.
    const double t = (i + 1 == n_samples) ? t0 : t0 * i / (n_samples - 1);
    const double phase = kTwoPi * i / (n_samples - 1);
    tr.t[i] = t;
    tr.z[i] = z0 + dz * (1.0 - std::cos(phase));
    tr.v[i] = dz * w * std::sin(phase);
  }
  tr.z.back() = z0;
  tr.v.back() = 0.0;
  return tr;
}

/// Same path obtained by adaptive Dormand-Prince integration of
/// z'' = -w^2 z + g_eff. Independent of the closed form; used as an oracle.
[[nodiscard]] inline Trajectory trajectory_numeric(int branch, const SystemParams& p, int n_samples,
                                                   double rel_tol = 1e-13) {
  namespace ode = boost::numeric::odeint;
  detail::check_branch(branch);
  detail::check_samples(n_samples);
  const double w = p.oscillator.omega_z;
  const double t0 = p.oscillator.period();
  const double g_eff = p.constants.g_local + branch * coupled_spin_acceleration(p);
  const double z_start = p.constants.g_local / (w * w);

  using State = std::array<double, 2>;
  auto rhs = [w, g_eff](const State& x, State& dx, double) {
    dx[0] = x[1];
    dx[1] = -w * w * x[0] + g_eff;
  };

  Trajectory tr;
  tr.branch = branch;
  tr.acceleration = g_eff;
  tr.t.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) tr.t[i] = t0 * i / (n_samples - 1);
  tr.t.back() = t0;

  State x{z_start, 0.0};
  const double abs_tol = rel_tol * std::max(std::abs(z_start), std::abs(g_eff) / (w * w)) * 1e-3;
  auto stepper = ode::make_dense_output(abs_tol, rel_tol, ode::runge_kutta_dopri5<State>{});
  ode::integrate_times(stepper, rhs, x, tr.t.begin(), tr.t.end(), t0 / (64.0 * n_samples),
                       [&tr](const State& s, double) {
                         tr.z.push_back(s[0]);
                         tr.v.push_back(s[1]);
                       });
  return tr;
}

namespace detail {

/// Composite Simpson over uniformly spaced samples (odd sample count).
template <class F>
long double simpson(std::size_t n_samples, double h, F&& f) {
  if (n_samples < 3 || n_samples % 2 == 0) {
    throw InvalidArgument("Simpson quadrature needs an odd number (>= 3) of samples");
  }
  long double acc = f(0) + f(n_samples - 1);
  for (std::size_t i = 1; i + 1 < n_samples; ++i) acc += (i % 2 ? 4.0L : 2.0L) * f(i);
  return acc * static_cast<long double>(h) / 3.0L;
}

inline long double lagrangian(double m, double w2, double a, double z, double v) {
  const long double zl = z;
  const long double vl = v;
  return 0.5L * m * vl * vl - 0.5L * m * w2 * zl * zl + static_cast<long double>(m) * a * zl;
}

inline long double action_ld(const Trajectory& tr, const SystemParams& p) {
  const std::size_t n = tr.t.size();
  if (n < 3 || tr.z.size() != n || tr.v.size() != n) {
    throw InvalidArgument("trajectory samples are inconsistent");
  }
  const double t0 = p.oscillator.period();
  if (std::abs(tr.t.front()) > 1e-12 * t0 || std::abs(tr.t.back() - t0) > 1e-12 * t0) {
    throw InvalidArgument("trajectory must span exactly one period [0, t0]");
  }
  const double m = p.oscillator.mass;
  const double w2 = p.oscillator.omega_z * p.oscillator.omega_z;
  const double h = t0 / static_cast<double>(n - 1);
  const long double s = simpson(n, h, [&](std::size_t i) {
    return lagrangian(m, w2, tr.acceleration, tr.z[i], tr.v[i]);
  });
  return s / static_cast<long double>(p.constants.hbar);
}

}  // namespace detail

/// Action of a branch path over [0, t0] in units of hbar, by composite Simpson
/// on L = m zdot^2/2 - m w^2 z^2/2 + m g_eff z.
[[nodiscard]] inline double action(const Trajectory& tr, const SystemParams& p) {
  return static_cast<double>(detail::action_ld(tr, p));
}

enum class PhaseMethod { closed_form, quadrature, echo };

[[nodiscard]] inline std::string to_string(PhaseMethod m) {
  switch (m) {
    case PhaseMethod::closed_form: return "closed_form";
    case PhaseMethod::quadrature: return "quadrature";
    case PhaseMethod::echo: return "echo";
  }
  return "?";
}

struct PhaseResult {
  double delta_phi = 0.0;           // rad
  PhaseMethod method = PhaseMethod::closed_form;
  double action_plus = 0.0;         // units of hbar (quadrature/echo only)
  double action_minus = 0.0;
  double delta_phi_alt = 0.0;       // second algebraic form (closed form only)
  double convergence = 0.0;         // relative change on halving the step (quadrature only)
};

inline constexpr int kQuadraturePanels = 10000;

/// Gravity phase 16 pi m g dz / (hbar w) written in terms of the conventional
/// equilibrium offset dz = |g_pm| / w^2.
[[nodiscard]] inline double phase_from_displacement(const SystemParams& p) {
  const auto eq = equilibrium(p);
  const double sign = p.coupling.gradient < 0 ? -1.0 : 1.0;
  return sign * 16.0 * std::numbers::pi * p.oscillator.mass * p.constants.g_local * eq.delta_z /
         (p.constants.hbar * p.oscillator.omega_z);
}

/// Interferometer phase after one mechanical period.
///
/// closed_form: 16 lambda dlambda t0 / (hbar^2 w); delta_phi_alt holds the
/// equivalent g_NV mu_B B_g g t0^3 / (pi^2 hbar).
/// quadrature: S[z+] - S[z-] from Simpson actions with kQuadraturePanels panels,
/// refined until halving the step changes each action by <= 1e-8.
/// t0 must equal 2 pi / omega_z; other durations leave the branches apart.
[[nodiscard]] inline PhaseResult phase_shift(const SystemParams& p, double t0,
                                             PhaseMethod method = PhaseMethod::closed_form) {
  const double period = p.oscillator.period();
  if (!(std::abs(t0 - period) <= 1e-9 * period)) {
    throw InvalidArgument("t0 must equal one mechanical period 2 pi / omega_z");
  }
  PhaseResult res;
  res.method = method;
  const auto& k = p.constants;
  const double w = p.oscillator.omega_z;
  switch (method) {
    case PhaseMethod::closed_form: {
      const auto d = derive_coupling(p);
      const double sign = p.coupling.gradient < 0 ? -1.0 : 1.0;
      res.delta_phi = sign * 16.0 * d.lambda * d.delta_lambda * t0 / (k.hbar * k.hbar * w);
      res.delta_phi_alt = k.zeeman() * p.coupling.gradient * k.g_local * t0 * t0 * t0 /
                          (std::numbers::pi * std::numbers::pi * k.hbar);
      return res;
    }
    case PhaseMethod::quadrature: {
      int panels = kQuadraturePanels;
      long double sp = 0, sm = 0, change = 1;
      long double sp_coarse = detail::action_ld(trajectory(1, p, panels / 2 + 1), p);
      long double sm_coarse = detail::action_ld(trajectory(-1, p, panels / 2 + 1), p);
      for (;; panels *= 2) {
        sp = detail::action_ld(trajectory(1, p, panels + 1), p);
        sm = detail::action_ld(trajectory(-1, p, panels + 1), p);
        auto rel = [](long double a, long double b) {
          const long double scale = std::max(std::abs(a), std::abs(b));
          return scale == 0 ? 0.0L : std::abs(a - b) / scale;
        };
        change = std::max(rel(sp, sp_coarse), rel(sm, sm_coarse));
        if (change <= 1e-8L || panels >= (1 << 22)) break;
        sp_coarse = sp;
        sm_coarse = sm;
      }
      res.action_plus = static_cast<double>(sp);
      res.action_minus = static_cast<double>(sm);
      res.delta_phi = static_cast<double>(sp - sm);
      res.convergence = static_cast<double>(change);
      return res;
    }
    case PhaseMethod::echo:
      throw InvalidArgument("use echo_phase() for the two-period echo sequence");
  }
  return res;
}

struct FrequencyShift {
  double plus = 0.0;   // relative shift of the S_z = +1 branch
  double minus = 0.0;  // relative shift of the S_z = -1 branch
};

/// dw_pm / w = +/- g_NV mu_B B'' / (8 m w^2). The 1/w^2 makes the ratio
/// dimensionless; without it the expression does not reproduce the
/// 1.7e5 T/m^2 tolerance at dg/g = 1e-10.
[[nodiscard]] inline FrequencyShift second_order_frequency_shift(const SystemParams& p) {
  if (!std::isfinite(p.coupling.second_gradient)) {
    throw InvalidArgument("second gradient must be finite");
  }
  const double w = p.oscillator.omega_z;
  const double eps =
      p.constants.zeeman() * p.coupling.second_gradient / (8.0 * p.oscillator.mass * w * w);
  return {eps, -eps};
}

/// Largest |B''| whose frequency shift stays below `relative_precision`.
[[nodiscard]] inline double second_gradient_threshold(const SystemParams& p,
                                                      double relative_precision) {
  const double w = p.oscillator.omega_z;
  return relative_precision * 8.0 * p.oscillator.mass * w * w / p.constants.zeeman();
}

/// Two-period sequences. The pi-pulse swaps |+1> and |-1> at t0; the rotation
/// turns the trap and magnetic source by 180 degrees, which reverses gravity in
/// the chip frame and mirrors the bead's chip coordinates (z, zdot) -> (-z, -zdot).
enum class EchoProtocol { none, flip, rotate, flip_and_rotate };

[[nodiscard]] inline std::string to_string(EchoProtocol e) {
  switch (e) {
    case EchoProtocol::none: return "none";
    case EchoProtocol::flip: return "flip";
    case EchoProtocol::rotate: return "rotate";
    case EchoProtocol::flip_and_rotate: return "flip_and_rotate";
  }
  return "?";
}

namespace detail {

struct PathState {
  double z;
  double v;
};

// Action (units of hbar) of one period of a branch in the B''-perturbed trap,
// together with the end state. The trap frequency is w (1 + spin * eps).
inline std::pair<long double, PathState> perturbed_period(const SystemParams& p, int spin,
                                                          double gravity_sign, double eps,
                                                          PathState start, int panels) {
  const double w = p.oscillator.omega_z;
  const double ws = w * (1.0 + spin * eps);
  const double ws2 = ws * ws;
  const double m = p.oscillator.mass;
  const double a = gravity_sign * p.constants.g_local + spin * coupled_spin_acceleration(p);
  const double centre = a / ws2;
  const double t0 = p.oscillator.period();
  const double h = t0 / panels;
  const long double u0 = static_cast<long double>(start.z) - centre;
  auto path = [&](std::size_t i) -> std::pair<long double, long double> {
    const long double t = static_cast<long double>(h) * i;
    const long double c = std::cos(static_cast<long double>(ws) * t);
    const long double s = std::sin(static_cast<long double>(ws) * t);
    return {centre + u0 * c + start.v / static_cast<long double>(ws) * s,
            -u0 * ws * s + start.v * c};
  };
  const long double s = simpson(static_cast<std::size_t>(panels) + 1, h, [&](std::size_t i) {
    const auto [z, v] = path(i);
    return 0.5L * m * v * v - 0.5L * m * ws2 * z * z + static_cast<long double>(m) * a * z;
  });
  const auto [z_end, v_end] = path(static_cast<std::size_t>(panels));
  return {s / static_cast<long double>(p.constants.hbar),
          PathState{static_cast<double>(z_end), static_cast<double>(v_end)}};
}

}  // namespace detail

/// Phase after a two-period sequence of total length 2 t0, from quadrature of
/// both paths' actions in the perturbed traps w (1 +/- eps). Path A starts in
/// |+1>; the result is S_A - S_B, so with B'' = 0 and the flip+rotate protocol
/// it equals twice the single-period phase.
[[nodiscard]] inline PhaseResult echo_phase(const SystemParams& p, EchoProtocol protocol,
                                            bool with_second_gradient,
                                            int panels = kQuadraturePanels) {
  if (panels < 2 || panels % 2) throw InvalidArgument("panel count must be even");
  const double eps = with_second_gradient ? second_order_frequency_shift(p).plus : 0.0;
  const bool flip = protocol == EchoProtocol::flip || protocol == EchoProtocol::flip_and_rotate;
  const bool rotate =
      protocol == EchoProtocol::rotate || protocol == EchoProtocol::flip_and_rotate;
  const double z0 = p.constants.g_local / (p.oscillator.omega_z * p.oscillator.omega_z);

  long double total[2] = {0, 0};
  for (int path = 0; path < 2; ++path) {
    int spin = path == 0 ? 1 : -1;
    auto [s1, end] = detail::perturbed_period(p, spin, 1.0, eps, {z0, 0.0}, panels);
    if (flip) spin = -spin;
    if (rotate) end = {-end.z, -end.v};
    auto [s2, unused] = detail::perturbed_period(p, spin, rotate ? -1.0 : 1.0, eps, end, panels);
    (void)unused;
    total[path] = s1 + s2;
  }
  PhaseResult res;
  res.method = PhaseMethod::echo;
  res.action_plus = static_cast<double>(total[0]);
  res.action_minus = static_cast<double>(total[1]);
  res.delta_phi = static_cast<double>(total[0] - total[1]);
  return res;
}

/// with_rotation = true runs the pi-flip + rotation protocol; false runs the
/// unprotected 2 t0 sequence used as the reference for the B'' residue.
[[nodiscard]] inline PhaseResult echo_phase(const SystemParams& p, bool with_rotation,
                                            bool with_second_gradient) {
  return echo_phase(p, with_rotation ? EchoProtocol::flip_and_rotate : EchoProtocol::none,
                    with_second_gradient);
}

/// Phase contributed by B'' alone under a given protocol.
[[nodiscard]] inline double second_gradient_phase(const SystemParams& p, EchoProtocol protocol) {
  return echo_phase(p, protocol, true).delta_phi - echo_phase(p, protocol, false).delta_phi;
}

}  // namespace nvgrav::classical
