#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nvgrav/error.hpp"
#include "nvgrav/params.hpp"
#include "nvgrav/units.hpp"

namespace nvgrav {

// Configuration files are INI-like:
//
//   # comment
//   [oscillator]
//   radius = 200 nm
//   omega_z = 500 Hz        # Hz is converted to rad/s
//
// Every key is optional and falls back to the SystemParams default. Unknown
// sections or keys are errors.

struct ConfigKey {
  std::string_view section;
  std::string_view key;
  Dimension dim;
  bool integer;
  std::function<double&(SystemParams&)> field;
};

inline const std::vector<ConfigKey>& config_keys() {
  using D = Dimension;
  static const std::vector<ConfigKey> keys{
      {"oscillator", "mass", D::mass, false, [](SystemParams& p) -> double& { return p.oscillator.mass; }},
      {"oscillator", "omega_z", D::angular_frequency, false, [](SystemParams& p) -> double& { return p.oscillator.omega_z; }},
      {"oscillator", "quality_factor", D::dimensionless, false, [](SystemParams& p) -> double& { return p.oscillator.quality_factor; }},
      {"oscillator", "temperature", D::temperature, false, [](SystemParams& p) -> double& { return p.oscillator.temperature; }},
      {"oscillator", "radius", D::length, false, [](SystemParams& p) -> double& { return p.oscillator.radius; }},
      {"oscillator", "density", D::density, false, [](SystemParams& p) -> double& { return p.oscillator.density; }},
      {"oscillator", "permittivity", D::dimensionless, false, [](SystemParams& p) -> double& { return p.oscillator.permittivity; }},
      {"spin", "t1", D::time, false, [](SystemParams& p) -> double& { return p.spin.t1; }},
      {"spin", "t2", D::time, false, [](SystemParams& p) -> double& { return p.spin.t2; }},
      {"spin", "rabi", D::angular_frequency, false, [](SystemParams& p) -> double& { return p.spin.rabi; }},
      {"coupling", "gradient", D::gradient, false, [](SystemParams& p) -> double& { return p.coupling.gradient; }},
      {"coupling", "second_gradient", D::second_gradient, false, [](SystemParams& p) -> double& { return p.coupling.second_gradient; }},
      {"environment", "gravity", D::acceleration, false, [](SystemParams& p) -> double& { return p.constants.g_local; }},
      {"environment", "pressure", D::pressure, false, [](SystemParams& p) -> double& { return p.environment.pressure; }},
      {"environment", "gas_speed", D::speed, false, [](SystemParams& p) -> double& { return p.environment.gas_speed; }},
      {"environment", "trap_wavelength", D::length, false, [](SystemParams& p) -> double& { return p.environment.trap_wavelength; }},
      {"environment", "microwave_frequency", D::rate, false, [](SystemParams& p) -> double& { return p.environment.microwave_frequency; }},
      {"environment", "resonators", D::dimensionless, false, [](SystemParams& p) -> double& { return p.environment.resonators; }},
      {"environment", "repetition_rate", D::rate, false, [](SystemParams& p) -> double& { return p.environment.repetition_rate; }},
      {"sequence", "initial_nbar", D::dimensionless, false, [](SystemParams& p) -> double& { return p.sequence.initial_nbar; }},
      {"sequence", "bath_nbar", D::dimensionless, false, [](SystemParams& p) -> double& { return p.sequence.bath_nbar; }},
      {"sequence", "sigma_phi", D::phase, false, [](SystemParams& p) -> double& { return p.sequence.sigma_phi; }},
      {"sequence", "measurement_time", D::time, false, [](SystemParams& p) -> double& { return p.sequence.measurement_time; }},
  };
  return keys;
}

// Integer keys are kept apart so the table above can hand out double&.
struct IntConfigKey {
  std::string_view section;
  std::string_view key;
  std::function<int&(SystemParams&)> field;
};

inline const std::vector<IntConfigKey>& int_config_keys() {
  static const std::vector<IntConfigKey> keys{
      {"sequence", "phase_points", [](SystemParams& p) -> int& { return p.sequence.phase_points; }},
      {"sequence", "fock_cutoff", [](SystemParams& p) -> int& { return p.sequence.fock_cutoff; }},
  };
  return keys;
}

/// Parse configuration text on top of `base`. Throws InvalidArgument with the
/// offending line number on any malformed, unknown or mis-dimensioned entry.
[[nodiscard]] inline SystemParams parse_config(std::string_view text, SystemParams base = {}) {
  std::string section;
  bool mass_set = false;
  bool sphere_set = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
    std::string_view line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidArgument(where() + "unterminated section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const auto& k : config_keys()) known = known || k.section == section;
      for (const auto& k : int_config_keys()) known = known || k.section == section;
      if (!known) throw InvalidArgument(where() + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument(where() + "expected key = value");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (section.empty()) throw InvalidArgument(where() + "key '" + key + "' outside any section");

    bool matched = false;
    for (const auto& k : config_keys()) {
      if (k.section != section || k.key != key) continue;
      try {
        k.field(base) = parse_quantity(value, k.dim);
      } catch (const InvalidArgument& e) {
        throw InvalidArgument(where() + e.what());
      }
      if (section == "oscillator" && key == "mass") mass_set = true;
      if (section == "oscillator" && (key == "radius" || key == "density")) sphere_set = true;
      matched = true;
    }
    for (const auto& k : int_config_keys()) {
      if (k.section != section || k.key != key) continue;
      double v = 0.0;
      try {
        v = parse_quantity(value, Dimension::dimensionless);
      } catch (const InvalidArgument& e) {
        throw InvalidArgument(where() + e.what());
      }
      if (v != std::floor(v)) throw InvalidArgument(where() + key + " must be an integer");
      k.field(base) = static_cast<int>(v);
      matched = true;
    }
    if (!matched) throw InvalidArgument(where() + "unknown key '" + key + "' in [" + section + "]");
  }
  if (sphere_set && !mass_set) {
    base.oscillator = OscillatorParams::from_sphere(base.oscillator.radius,
                                                    base.oscillator.density, base.oscillator);
  }
  return base;
}

/// Canonical text form: every key, SI units, round-trip precision.
[[nodiscard]] inline std::string to_config_text(const SystemParams& params) {
  SystemParams p = params;
  std::string out;
  std::string current;
  auto open = [&](std::string_view section) {
    if (current == section) return;
    if (!current.empty()) out += '\n';
    current = std::string(section);
    out += "[" + current + "]\n";
  };
  char buf[64];
  for (const auto& k : config_keys()) {
    open(k.section);
    std::snprintf(buf, sizeof buf, "%.17g", k.field(p));
    out += std::string(k.key) + " = " + buf;
    if (const auto sym = si_symbol(k.dim); !sym.empty()) out += " " + std::string(sym);
    out += '\n';
    if (k.section == "sequence" && k.key == "measurement_time") {
      for (const auto& ik : int_config_keys()) {
        out += std::string(ik.key) + " = " + std::to_string(ik.field(p)) + '\n';
      }
    }
  }
  return out;
}

/// 64-bit FNV-1a hash of the canonical config text, as 16 hex digits.
[[nodiscard]] inline std::string fingerprint(const SystemParams& p) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char ch : to_config_text(p)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nvgrav
