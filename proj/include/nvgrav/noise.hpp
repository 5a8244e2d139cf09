#pragma once

// Random-noise rates and the shot-noise budget of the gravimeter.

#include <cmath>
#include <limits>
#include <numbers>

#include "nvgrav/classical.hpp"
#include "nvgrav/constants.hpp"
#include "nvgrav/error.hpp"
#include "nvgrav/params.hpp"

namespace nvgrav::noise {

/// Dephasing budget limit on the magnetic fluctuation, rad/s.
inline constexpr double kFluctuationLimit = kTwoPi * 1e7;
/// Typical NV linewidth used to judge the Doppler shift, Hz.
inline constexpr double kNvLinewidth = 10e6;

/// Residual-gas damping. `gamma` uses the 8/pi prefactor,
/// `gamma_alt` the 8 pi transcription. Both in rad/s.
struct GasDamping {
  double gamma = 0.0;
  double gamma_alt = 0.0;
};

/// gamma_g / 2 = (8/pi) P / (v R rho).
[[nodiscard]] inline GasDamping gas_damping(const EnvironmentParams& env,
                                            const OscillatorParams& osc) {
  if (env.pressure < 0 || !(env.gas_speed > 0) || !(osc.radius > 0) || !(osc.density > 0)) {
    throw InvalidArgument("gas damping needs P >= 0 and positive v, R, rho");
  }
  const double base = env.pressure / (env.gas_speed * osc.radius * osc.density);
  return {2.0 * (8.0 / std::numbers::pi) * base, 2.0 * (8.0 * std::numbers::pi) * base};
}

/// gamma_sc / omega_z = (16 pi^3 / 15) ((eps - 1)/(eps + 2)) (R / lambda0)^3.
[[nodiscard]] inline double photon_scattering(const EnvironmentParams& env,
                                              const OscillatorParams& osc) {
  if (!(osc.permittivity > 1) || !(env.trap_wavelength > 0) || osc.radius < 0) {
    throw InvalidArgument("photon scattering needs eps > 1, lambda0 > 0, R >= 0");
  }
  const double pi3 = std::numbers::pi * std::numbers::pi * std::numbers::pi;
  const double x = osc.radius / env.trap_wavelength;
  return 16.0 * pi3 / 15.0 * (osc.permittivity - 1.0) / (osc.permittivity + 2.0) * x * x * x;
}

/// Maximum motional decoherence rate in the units of gamma_sc.
/// `literal` = gamma_sc (2r)^2, `alt` = gamma_sc r^2.
struct Decoherence {
  double literal = 0.0;
  double alt = 0.0;
};

[[nodiscard]] inline Decoherence max_decoherence(double gamma_sc, double r) {
  if (r < 0 || gamma_sc < 0) throw InvalidArgument("decoherence needs gamma_sc, r >= 0");
  return {gamma_sc * 4.0 * r * r, gamma_sc * r * r};
}

/// Field fluctuation from thermal motion in the gradient.
struct MagneticFluctuation {
  double tesla = 0.0;
  double angular = 0.0;  // g_NV mu_B Delta / hbar, rad/s
  bool feasible = true;  // angular < kFluctuationLimit
};

/// Delta = |B_g| sqrt(k_B T / (m omega_z^2)).
[[nodiscard]] inline MagneticFluctuation magnetic_fluctuation(double gradient,
                                                              const OscillatorParams& osc,
                                                              const PhysicalConstants& k = {}) {
  if (osc.temperature < 0 || !(osc.mass > 0) || !(osc.omega_z > 0)) {
    throw InvalidArgument("magnetic fluctuation needs T >= 0 and positive m, omega_z");
  }
  MagneticFluctuation f;
  f.tesla = std::abs(gradient) * std::sqrt(k.k_B * osc.temperature / osc.mass) / osc.omega_z;
  f.angular = k.zeeman() * f.tesla / k.hbar;
  f.feasible = f.angular < kFluctuationLimit;
  return f;
}

[[nodiscard]] inline MagneticFluctuation magnetic_fluctuation(const SystemParams& p) {
  return magnetic_fluctuation(p.coupling.gradient, p.oscillator, p.constants);
}

/// delta f = f0 dz omega_z / c, Hz.
[[nodiscard]] inline double doppler_shift(double f0, double amplitude, double omega_z,
                                          const PhysicalConstants& k = {}) {
  if (!(f0 > 0) || amplitude < 0 || !(omega_z > 0)) {
    throw InvalidArgument("Doppler shift needs f0, omega_z > 0 and amplitude >= 0");
  }
  return f0 * amplitude * omega_z / k.c;
}

/// v1 = sqrt(2 k_B T / m).
[[nodiscard]] inline double rms_velocity(double temperature, double mass,
                                         const PhysicalConstants& k = {}) {
  if (temperature < 0 || !(mass > 0)) throw InvalidArgument("rms velocity needs T >= 0, m > 0");
  return std::sqrt(2.0 * k.k_B * temperature / mass);
}

struct ShotNoise {
  double points = 0.0;     // N = M f_rep T
  double sigma_phi = 0.0;  // 1 / (V sqrt N), rad
  double relative = 0.0;   // sigma_phi / delta_phi
};

[[nodiscard]] inline ShotNoise shot_noise(double resonators, double repetition_rate,
                                          double duration, double visibility, double delta_phi) {
  if (!(resonators > 0) || !(repetition_rate > 0) || !(duration > 0) || !(delta_phi > 0)) {
    throw InvalidArgument("shot noise needs positive M, f_rep, duration and phase");
  }
  if (visibility < 0 || visibility > 1) throw InvalidArgument("visibility must lie in [0, 1]");
  ShotNoise s;
  s.points = resonators * repetition_rate * duration;
  s.sigma_phi = visibility > 0 ? 1.0 / (visibility * std::sqrt(s.points))
                               : std::numeric_limits<double>::infinity();
  s.relative = s.sigma_phi / delta_phi;
  return s;
}

/// Phase accuracy model used by the budget.
enum class BudgetMode { projection, fixed_phase };

/// dg/g = sigma_phi pi^2 hbar / (g_NV mu_B B_g g t0^3) for a single period.
[[nodiscard]] inline double relative_precision(double sigma_phi, double gradient, double t0,
                                               const PhysicalConstants& k = {}) {
  if (!(t0 > 0) || !(k.g_local > 0) || gradient == 0) {
    return std::numeric_limits<double>::infinity();
  }
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return sigma_phi * pi2 * k.hbar / (k.zeeman() * std::abs(gradient) * k.g_local * t0 * t0 * t0);
}

/// Every rate and constraint for one configuration.
struct NoiseBudget {
  double gamma_g = 0.0;          // rad/s, 8/pi convention
  double gamma_g_alt = 0.0;      // rad/s, 8 pi convention
  double gamma_sc = 0.0;         // rad/s
  double gamma_max = 0.0;        // rad/s, gamma_sc (2r)^2
  double gamma_max_alt = 0.0;    // rad/s, gamma_sc r^2
  MagneticFluctuation fluctuation;
  double doppler_shift = 0.0;    // Hz, amplitude = branch separation
  double rms_velocity = 0.0;     // m/s
  double delta_phi = 0.0;        // rad, one period
  ShotNoise shot;                // projection noise, V = visibility
  double visibility = 0.0;       // heuristic, from Q and T2
  double precision_projection = 0.0;
  double precision_fixed = 0.0;  // with sequence.sigma_phi
  bool fluctuation_ok = true;
  bool doppler_ok = true;
};

[[nodiscard]] inline NoiseBudget compute_budget(const SystemParams& p) {
  const auto& osc = p.oscillator;
  const auto& env = p.environment;
  const auto dc = derive_coupling(p);
  const double t0 = osc.period();
  NoiseBudget b;
  const auto gas = gas_damping(env, osc);
  b.gamma_g = gas.gamma;
  b.gamma_g_alt = gas.gamma_alt;
  b.gamma_sc = photon_scattering(env, osc) * osc.omega_z;
  const auto dec = max_decoherence(b.gamma_sc, dc.r);
  b.gamma_max = dec.literal;
  b.gamma_max_alt = dec.alt;
  b.fluctuation = magnetic_fluctuation(p);
  b.fluctuation_ok = b.fluctuation.feasible;
  b.doppler_shift = doppler_shift(env.microwave_frequency, 2.0 * dc.delta_z, osc.omega_z,
                                  p.constants);
  b.doppler_ok = b.doppler_shift < kNvLinewidth;
  b.rms_velocity = rms_velocity(osc.temperature, osc.mass, p.constants);
  b.delta_phi = std::abs(classical::phase_shift(p, t0, classical::PhaseMethod::closed_form).delta_phi);
  const double r2 = 2.0 * dc.r;
  b.visibility = std::exp(-kTwoPi / osc.quality_factor * r2 * r2) * std::exp(-t0 / p.spin.t2);
  if (b.delta_phi > 0) {
    b.shot = shot_noise(env.resonators, env.repetition_rate, p.sequence.measurement_time,
                        b.visibility, b.delta_phi);
    b.precision_projection = b.shot.relative;
    b.precision_fixed = p.sequence.sigma_phi / b.delta_phi;
  } else {
    b.precision_projection = b.precision_fixed = std::numeric_limits<double>::infinity();
  }
  return b;
}

}  // namespace nvgrav::noise
