#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "nvgrav/constants.hpp"
#include "nvgrav/error.hpp"

namespace nvgrav {

/// Physical dimension of a configuration value. Every value is converted to
/// SI on ingestion; frequencies become angular (rad/s) except `rate`, which
/// stays in Hz (repetition rates, microwave carrier).
enum class Dimension {
  dimensionless,
  length,
  mass,
  time,
  angular_frequency,
  rate,
  temperature,
  pressure,
  density,
  speed,
  gradient,
  second_gradient,
  acceleration,
  phase,
};

struct UnitEntry {
  Dimension dim;
  std::string_view symbol;
  double scale;  // SI value of one unit
};

// Hz-type units on an angular_frequency value carry the 2 pi factor.
inline constexpr std::array kUnitTable{
    UnitEntry{Dimension::length, "m", 1.0},
    UnitEntry{Dimension::length, "mm", 1e-3},
    UnitEntry{Dimension::length, "um", 1e-6},
    UnitEntry{Dimension::length, "nm", 1e-9},
    UnitEntry{Dimension::mass, "kg", 1.0},
    UnitEntry{Dimension::mass, "g", 1e-3},
    UnitEntry{Dimension::time, "s", 1.0},
    UnitEntry{Dimension::time, "ms", 1e-3},
    UnitEntry{Dimension::time, "us", 1e-6},
    UnitEntry{Dimension::time, "ns", 1e-9},
    UnitEntry{Dimension::angular_frequency, "rad/s", 1.0},
    UnitEntry{Dimension::angular_frequency, "Hz", kTwoPi},
    UnitEntry{Dimension::angular_frequency, "kHz", kTwoPi * 1e3},
    UnitEntry{Dimension::angular_frequency, "MHz", kTwoPi * 1e6},
    UnitEntry{Dimension::angular_frequency, "GHz", kTwoPi * 1e9},
    UnitEntry{Dimension::rate, "Hz", 1.0},
    UnitEntry{Dimension::rate, "kHz", 1e3},
    UnitEntry{Dimension::rate, "MHz", 1e6},
    UnitEntry{Dimension::rate, "GHz", 1e9},
    UnitEntry{Dimension::temperature, "K", 1.0},
    UnitEntry{Dimension::temperature, "mK", 1e-3},
    UnitEntry{Dimension::temperature, "uK", 1e-6},
    UnitEntry{Dimension::temperature, "nK", 1e-9},
    UnitEntry{Dimension::pressure, "Pa", 1.0},
    UnitEntry{Dimension::pressure, "mbar", 100.0},
    UnitEntry{Dimension::pressure, "Torr", 101325.0 / 760.0},
    UnitEntry{Dimension::density, "kg/m3", 1.0},
    UnitEntry{Dimension::density, "g/cm3", 1e3},
    UnitEntry{Dimension::speed, "m/s", 1.0},
    UnitEntry{Dimension::gradient, "T/m", 1.0},
    UnitEntry{Dimension::second_gradient, "T/m2", 1.0},
    UnitEntry{Dimension::acceleration, "m/s2", 1.0},
    UnitEntry{Dimension::phase, "rad", 1.0},
    UnitEntry{Dimension::phase, "mrad", 1e-3},
};

/// Canonical SI symbol written back out by the serializer.
[[nodiscard]] constexpr std::string_view si_symbol(Dimension dim) {
  switch (dim) {
    case Dimension::dimensionless: return "";
    case Dimension::length: return "m";
    case Dimension::mass: return "kg";
    case Dimension::time: return "s";
    case Dimension::angular_frequency: return "rad/s";
    case Dimension::rate: return "Hz";
    case Dimension::temperature: return "K";
    case Dimension::pressure: return "Pa";
    case Dimension::density: return "kg/m3";
    case Dimension::speed: return "m/s";
    case Dimension::gradient: return "T/m";
    case Dimension::second_gradient: return "T/m2";
    case Dimension::acceleration: return "m/s2";
    case Dimension::phase: return "rad";
  }
  return "";
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

/// Parse "<number>[ ]<unit>" into SI. A bare number is taken as already SI
/// (rad/s for angular frequencies). Throws InvalidArgument on anything else.
[[nodiscard]] inline double parse_quantity(std::string_view text, Dimension dim) {
  const std::string_view s = detail::trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr == s.data()) {
    throw InvalidArgument("not a number: '" + std::string(text) + "'");
  }
  if (!std::isfinite(value)) {
    throw InvalidArgument("non-finite value: '" + std::string(text) + "'");
  }
  const std::string_view unit = detail::trim(s.substr(static_cast<std::size_t>(ptr - s.data())));
  if (unit.empty()) return value;
  if (dim == Dimension::dimensionless) {
    throw InvalidArgument("unexpected unit '" + std::string(unit) + "' on dimensionless value");
  }
  for (const auto& entry : kUnitTable) {
    if (entry.dim == dim && entry.symbol == unit) return value * entry.scale;
  }
  throw InvalidArgument("unknown unit '" + std::string(unit) + "' in '" + std::string(text) + "'");
}

}  // namespace nvgrav
