#pragma once

#include <numbers>

namespace nvgrav {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Physical constants used throughout the toolkit (CODATA 2018, SI).
///
/// Everything numeric flows from one instance of this struct. The local
/// gravitational acceleration lives here too because it is an input to every
/// phase formula, not a derived quantity; override it to model a different
/// site or to switch gravity off.
struct PhysicalConstants {
  double hbar = 1.054571817e-34;      // J s
  double k_B = 1.380649e-23;          // J/K
  double mu_B = 9.2740100783e-24;     // J/T
  double g_NV = 2.0;                  // electron Lande factor of the NV spin
  double D = kTwoPi * 2.88e9;         // zero-field splitting, rad/s
  double g_local = 9.80665;           // m/s^2
  double c = 299792458.0;             // m/s
  double torr_to_pa = 101325.0 / 760.0;

  /// g_NV mu_B, the Zeeman energy per tesla for |S_z| = 1.
  [[nodiscard]] constexpr double zeeman() const { return g_NV * mu_B; }
};

}  // namespace nvgrav
