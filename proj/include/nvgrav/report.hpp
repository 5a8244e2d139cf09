#pragma once

// Recomputes every quoted headline number and grades it.
//
// Verdicts: PASS (relative error within tolerance, or bound satisfied),
// ORDER (approximate quote, within a factor of ten), MISMATCH (anything
// else), EXCLUDED (cannot be graded as printed).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "nvgrav/classical.hpp"
#include "nvgrav/maps.hpp"
#include "nvgrav/noise.hpp"
#include "nvgrav/params.hpp"
#include "nvgrav/quantum.hpp"

namespace nvgrav::report {

enum class Comparison {
  approx,       // stated as equal / approximately equal
  order,        // stated as "of order"
  upper_bound,  // computed must not exceed the reference
  none,         // not gradable
};

enum class Verdict { pass, order, mismatch, excluded };

[[nodiscard]] inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::order: return "ORDER";
    case Verdict::mismatch: return "MISMATCH";
    case Verdict::excluded: return "EXCLUDED";
  }
  return "?";
}

struct Entry {
  std::string key;
  std::string unit;
  double reference = 0.0;
  double computed = 0.0;
  Comparison comparison = Comparison::approx;
  Verdict verdict = Verdict::excluded;
  std::string note;
};

[[nodiscard]] inline Verdict grade(double computed, double reference, Comparison cmp,
                                   double tolerance) {
  if (cmp == Comparison::none || !std::isfinite(computed)) return Verdict::excluded;
  if (cmp == Comparison::upper_bound) {
    return computed <= reference ? Verdict::pass : Verdict::mismatch;
  }
  const double rel = std::abs(computed - reference) / std::abs(reference);
  if (rel <= tolerance) return Verdict::pass;
  if (cmp == Comparison::order && computed > 0 && reference > 0 &&
      std::max(computed / reference, reference / computed) <= 10.0) {
    return Verdict::order;
  }
  return Verdict::mismatch;
}

struct Report {
  double tolerance = 0.1;
  std::vector<Entry> entries;

  [[nodiscard]] const Entry* find(const std::string& key) const {
    for (const auto& e : entries) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }
};

namespace detail {

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

}  // namespace detail

/// Builds the report from `base`. Each entry overrides only the parameters its
/// quoted setting pins down (e.g. omega_z = 2 pi kHz for the Doppler estimate).
[[nodiscard]] inline Report consistency_report(const SystemParams& base, double tolerance = 0.1) {
  if (!(tolerance > 0)) throw InvalidArgument("tolerance must be positive");
  Report rep;
  rep.tolerance = tolerance;
  auto add = [&](std::string key, std::string unit, double reference, double computed,
                 Comparison cmp, std::string note) {
    rep.entries.push_back({std::move(key), std::move(unit), reference, computed, cmp,
                           grade(computed, reference, cmp, tolerance), std::move(note)});
  };
  const auto& k = base.constants;
  constexpr double kQuotedR = 90.0;

  // Headline phase: B_g = 1e6 T/m, t0 = 2 ms, g = 9.8 m/s^2.
  SystemParams ph = base;
  ph.coupling.gradient = 1e6;
  ph.constants.g_local = 9.8;
  ph.oscillator.omega_z = kTwoPi / 2e-3;
  const double dphi = classical::phase_shift(ph, 2e-3).delta_phi;
  add("delta_phi", "rad", 1.4e9, dphi, Comparison::approx,
      "closed form, one period t0 = 2 ms");

  // Trap rates at R = 200 nm, eps = 1.5, lambda0 = 10 um, omega_z = 2 pi 500 Hz, P = 1e-9 Torr.
  SystemParams tr = base;
  tr.oscillator = OscillatorParams::from_sphere(200e-9, 3000.0, tr.oscillator);
  tr.oscillator.permittivity = 1.5;
  tr.oscillator.omega_z = kTwoPi * 500.0;
  tr.environment.trap_wavelength = 10e-6;
  tr.environment.pressure = 1e-9 * k.torr_to_pa;
  tr.environment.gas_speed = 500.0;
  const double gsc = noise::photon_scattering(tr.environment, tr.oscillator);
  add("gamma_sc_over_omega", "", 3.8e-5, gsc, Comparison::approx, "literal scattering formula");
  const auto gas = noise::gas_damping(tr.environment, tr.oscillator);
  add("gamma_g_over_omega", "", 4e-10, gas.gamma / tr.oscillator.omega_z, Comparison::order,
      "8/pi prefactor; the 8 pi transcription gives " +
          detail::sci(gas.gamma_alt / tr.oscillator.omega_z));
  const auto dec = noise::max_decoherence(gsc, kQuotedR);
  add("max_decoherence_over_omega", "", 0.3, dec.literal, Comparison::approx,
      "gamma_sc (2r)^2 at r = 90; the gamma_sc r^2 convention gives " + detail::sci(dec.alt));

  // Coupling at the default operating point.
  SystemParams op = base;
  op.coupling.gradient = 1e6;
  op.oscillator.mass = 1e-16;
  op.oscillator.omega_z = kTwoPi * 500.0;
  const auto dc = derive_coupling(op);
  add("coupling_r", "", kQuotedR, dc.r, Comparison::approx,
      "lambda / hbar omega_z recomputed for B_g = 1e6 T/m, m = 1e-16 kg, omega_z = 2 pi 500 Hz");
  add("sphere_mass", "kg", 1e-16, OscillatorParams::from_sphere(200e-9, 3000.0).mass,
      Comparison::order, "R = 200 nm with density read as 3000 kg/m^3 (printed as kg/cm^3)");
  const auto eq = classical::equilibrium(op);
  add("oscillation_amplitude", "m", 50e-9, 2.0 * eq.delta_z, Comparison::order,
      "2 dz with g_pm = g_NV mu_B B_g / 2m; the Hamiltonian coupling gives " +
          detail::sci(2.0 * eq.coupled_delta_z));
  const auto acc = classical::spin_acceleration(op);
  add("spin_acceleration", "m/s^2", acc.plus, classical::coupled_spin_acceleration(op),
      Comparison::approx,
      "reference: g_NV mu_B B_g / 2m; computed: force 2 g_NV mu_B B_g S_z of the Hamiltonian "
      "coupling, which the quoted phase requires");

  // Visibility guidance at the figure operating point (omega_z = 2 pi 500 Hz, r = 90).
  const double t0v = kTwoPi / (kTwoPi * 500.0);
  add("contrast_at_t0_eq_t2", "", 0.36,
      quantum::visibility_analytic(std::numeric_limits<double>::infinity(), t0v, t0v, kQuotedR),
      Comparison::approx, "exp(-t0/T2) at t0 = T2, no motional loss");
  add("min_quality_factor", "", 1e5,
      maps::threshold_quality_factor(std::numeric_limits<double>::infinity(), t0v, kQuotedR),
      Comparison::order, "Q reaching V = 1/e as T2 -> infinity, r = 90");
  add("min_t2", "s", 2e-3, t0v, Comparison::approx,
      "T2 reaching V = 1/e as Q -> infinity equals t0");

  // Shot-noise budget: M = 100, f_rep = 1 kHz, 1e5 points.
  const double points_needed = 1e5;
  add("time_for_1e5_points", "s", 2.0, points_needed / (100.0 * 1e3), Comparison::upper_bound,
      "N / (M f_rep) with M = 100, f_rep = 1 kHz");
  const auto shot = noise::shot_noise(100.0, 1e3, 1.0, 1.0, std::abs(dphi));
  add("shot_noise_precision", "", 1e-10, shot.relative, Comparison::upper_bound,
      "1 / (V sqrt N) / delta_phi with N = 1e5, V = 1; sigma_phi = " + detail::sci(shot.sigma_phi) +
          " rad");
  const auto grid = maps::precision_map(maps::default_gradient_axis(), maps::default_period_axis(),
                                        0.01, ph);
  const auto best = maps::best_feasible(grid);
  add("best_feasible_precision", "", 1e-10,
      best ? best->value : std::numeric_limits<double>::infinity(), Comparison::upper_bound,
      best ? "sigma_phi = 10 mrad, T = " + detail::sci(ph.oscillator.temperature) +
                 " K, best cell B_g = " + detail::sci(best->x) + " T/m, t0 = " +
                 detail::sci(best->y) + " s"
           : "no feasible cell");

  // Systematics.
  add("doppler_shift", "Hz", 6e-3,
      noise::doppler_shift(2.88e9, 100e-9, kTwoPi * 1e3, k), Comparison::approx,
      "f0 dz omega_z / c with dz = 100 nm, omega_z = 2 pi 1 kHz; far below the 10 MHz NV linewidth");
  add("rms_velocity", "m/s", 0.002, noise::rms_velocity(1e-3, 1e-16, k), Comparison::order,
      "sqrt(2 k_B T / m) at T = 1 mK, m = 1e-16 kg");
  SystemParams sg = base;
  sg.oscillator.mass = 1e-16;
  sg.oscillator.omega_z = kTwoPi * 1e3;
  add("second_gradient_threshold", "T/m^2", 1.7e5, classical::second_gradient_threshold(sg, 1e-10),
      Comparison::approx,
      "dw/w = g_NV mu_B B'' / (8 m omega_z^2) = 1e-10; the printed form lacks the omega_z^2 divisor");
  add("magnetic_drift_accuracy", "", 1e8, std::numeric_limits<double>::quiet_NaN(),
      Comparison::none, "exp(-t/t_drift) cannot exceed 1; not gradable as printed");
  return rep;
}

/// One line per entry: key, verdict, computed, reference, unit, note.
[[nodiscard]] inline std::string to_text(const Report& rep) {
  std::string out = "# consistency report, tolerance " + detail::sci(rep.tolerance) + "\n";
  for (const auto& e : rep.entries) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-28s %-9s computed=%-14s reference=%-14s unit=%s", e.key.c_str(),
                  to_string(e.verdict).c_str(),
                  std::isfinite(e.computed) ? detail::sci(e.computed).c_str() : "n/a",
                  detail::sci(e.reference).c_str(), e.unit.empty() ? "1" : e.unit.c_str());
    out += buf;
    out += "  note=" + e.note + "\n";
  }
  return out;
}

}  // namespace nvgrav::report
