#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "nvgrav/constants.hpp"
#include "nvgrav/error.hpp"

namespace nvgrav {

/// Centre-of-mass mode of the levitated bead (or cantilever), SI units.
struct OscillatorParams {
  double mass = 1e-16;                 // kg
  double omega_z = kTwoPi * 500.0;     // rad/s
  double quality_factor = 1e5;
  double temperature = 1e-4;           // K, CoM temperature
  double radius = 200e-9;              // m
  double density = 3000.0;             // kg/m^3
  double permittivity = 1.5;

  /// Homogeneous sphere: mass = 4/3 pi R^3 rho.
  [[nodiscard]] static OscillatorParams from_sphere(double radius, double density);
  [[nodiscard]] static OscillatorParams from_sphere(double radius, double density,
                                                    OscillatorParams base) {
    if (!(radius > 0.0) || !(density > 0.0)) {
      throw InvalidArgument("sphere radius and density must be positive");
    }
    base.radius = radius;
    base.density = density;
    base.mass = 4.0 / 3.0 * std::numbers::pi * radius * radius * radius * density;
    return base;
  }

  /// One mechanical period 2 pi / omega_z.
  [[nodiscard]] double period() const { return kTwoPi / omega_z; }
};

inline OscillatorParams OscillatorParams::from_sphere(double radius, double density) {
  return from_sphere(radius, density, OscillatorParams{});
}

struct SpinParams {
  double t1 = 10e-3;              // s
  double t2 = 2e-3;               // s
  double rabi = kTwoPi * 10e6;    // rad/s, microwave Rabi frequency Omega
};

/// Magnetic field gradients at the NV. Derived couplings are computed by
/// derive_coupling() so they can never drift from the primitives.
struct CouplingParams {
  double gradient = 1e6;          // B_g, T/m
  double second_gradient = 0.0;   // d^2B/dz^2, T/m^2
};

struct EnvironmentParams {
  double pressure = 1e-9 * (101325.0 / 760.0);  // Pa
  double gas_speed = 500.0;                     // m/s
  double trap_wavelength = 10e-6;               // m
  double microwave_frequency = 2.88e9;          // Hz
  double resonators = 100.0;                    // M
  double repetition_rate = 1e3;                 // Hz
};

/// Run-level settings shared by the simulators and the noise budget.
struct SequenceParams {
  int phase_points = 16;           // fringe scan length
  int fock_cutoff = 0;             // 0 = choose automatically
  double initial_nbar = 0.0;       // thermal occupancy before the first pulse
  double bath_nbar = 0.0;          // occupancy of the damping bath
  double sigma_phi = 10e-3;        // rad, fixed phase accuracy budget
  double measurement_time = 1.0;   // s
};

/// Complete description of one experiment configuration.
struct SystemParams {
  PhysicalConstants constants{};
  OscillatorParams oscillator{};
  SpinParams spin{};
  CouplingParams coupling{};
  EnvironmentParams environment{};
  SequenceParams sequence{};
};

/// Couplings and length scales that follow from SystemParams.
struct DerivedCoupling {
  double zero_point_length = 0.0;  // sqrt(hbar / 2 m omega_z), m
  double lambda = 0.0;             // g_NV mu_B B_g z_zpf, J
  double delta_lambda = 0.0;       // m g z_zpf / 2, J
  double r = 0.0;                  // lambda / hbar omega_z
  double r_g = 0.0;                // delta_lambda / hbar omega_z
  double z0 = 0.0;                 // gravitational sag g / omega_z^2, m
  double delta_z = 0.0;            // |g_pm| / omega_z^2 with g_pm = g_NV mu_B B_g / 2m, m
};

[[nodiscard]] inline DerivedCoupling derive_coupling(const SystemParams& p) {
  const auto& k = p.constants;
  const auto& osc = p.oscillator;
  DerivedCoupling d;
  const double w = osc.omega_z;
  d.zero_point_length = std::sqrt(k.hbar / (2.0 * osc.mass * w));
  d.lambda = k.zeeman() * p.coupling.gradient * d.zero_point_length;
  d.delta_lambda = 0.5 * osc.mass * k.g_local * d.zero_point_length;
  d.r = d.lambda / (k.hbar * w);
  d.r_g = d.delta_lambda / (k.hbar * w);
  d.z0 = k.g_local / (w * w);
  d.delta_z = std::abs(k.zeeman() * p.coupling.gradient / (2.0 * osc.mass)) / (w * w);
  return d;
}

/// Returns a copy of `base` whose gradient and gravity are rescaled so that
/// lambda / hbar omega = r and delta_lambda / hbar omega = r_g. Used to put the
/// quantum simulator in a regime a truncated Fock space can represent.
[[nodiscard]] inline SystemParams with_dimensionless_coupling(SystemParams base, double r,
                                                              double r_g) {
  const auto& k = base.constants;
  const double w = base.oscillator.omega_z;
  const double zpf = std::sqrt(k.hbar / (2.0 * base.oscillator.mass * w));
  base.coupling.gradient = r * k.hbar * w / (k.zeeman() * zpf);
  base.constants.g_local = 2.0 * r_g * k.hbar * w / (base.oscillator.mass * zpf);
  return base;
}

struct ValidationReport {
  std::vector<std::string> violations;
  DerivedCoupling derived;

  [[nodiscard]] bool ok() const { return violations.empty(); }
};

/// Checks every admissibility constraint and summarises the derived couplings.
/// Never throws; an empty violation list means the configuration is usable.
[[nodiscard]] inline ValidationReport validate(const SystemParams& p) {
  ValidationReport rep;
  auto require = [&](bool cond, const char* msg) {
    if (!cond) rep.violations.emplace_back(msg);
  };
  const auto& k = p.constants;
  require(k.hbar > 0 && k.k_B > 0 && k.mu_B > 0 && k.g_NV > 0 && k.D > 0 && k.c > 0 &&
              k.torr_to_pa > 0,
          "physical constants must be positive");
  require(k.g_local >= 0 && std::isfinite(k.g_local), "gravity must be finite and non-negative");

  const auto& o = p.oscillator;
  require(o.mass > 0, "mass must be positive");
  require(o.omega_z > 0, "trap frequency must be positive");
  require(o.quality_factor > 0, "quality factor must be positive");
  require(o.temperature >= 0, "temperature must be non-negative");
  require(o.radius > 0, "radius must be positive");
  require(o.density > 0, "density must be positive");
  require(o.permittivity > 1, "permittivity must exceed 1");

  const auto& s = p.spin;
  require(s.t2 > 0, "T2 must be positive");
  require(s.t1 > 0 && s.t1 >= s.t2 / 2, "T1 must be at least T2/2");
  require(s.rabi > 0, "Rabi frequency must be positive");

  require(std::isfinite(p.coupling.gradient), "gradient must be finite");
  require(std::isfinite(p.coupling.second_gradient), "second gradient must be finite");

  const auto& e = p.environment;
  require(e.pressure > 0, "pressure must be positive");
  require(e.gas_speed > 0, "gas speed must be positive");
  require(e.trap_wavelength > 0, "trap wavelength must be positive");
  require(e.microwave_frequency > 0, "microwave frequency must be positive");
  require(e.resonators > 0, "resonator count must be positive");
  require(e.repetition_rate > 0, "repetition rate must be positive");

  const auto& q = p.sequence;
  require(q.phase_points >= 8, "fringe needs at least 8 phase points");
  require(q.fock_cutoff == 0 || q.fock_cutoff >= 4, "Fock cutoff must be 0 (auto) or >= 4");
  require(q.initial_nbar >= 0 && q.bath_nbar >= 0, "thermal occupancies must be non-negative");
  require(q.sigma_phi > 0, "phase accuracy must be positive");
  require(q.measurement_time > 0, "measurement time must be positive");

  if (o.mass > 0 && o.omega_z > 0) rep.derived = derive_coupling(p);
  return rep;
}

}  // namespace nvgrav
