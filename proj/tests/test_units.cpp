#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nvgrav/units.hpp"

using nvgrav::Dimension;
using nvgrav::parse_quantity;

namespace {

struct Case {
  const char* text;
  Dimension dim;
  double si;
};

class UnitConversion : public ::testing::TestWithParam<Case> {};

TEST_P(UnitConversion, ConvertsToSi) {
  const auto& c = GetParam();
  EXPECT_NEAR(parse_quantity(c.text, c.dim), c.si, 1e-12 * std::abs(c.si)) << c.text;
}

constexpr double kPi = std::numbers::pi;

INSTANTIATE_TEST_SUITE_P(
    Table, UnitConversion,
    ::testing::Values(Case{"200 nm", Dimension::length, 200e-9},
                      Case{"10 um", Dimension::length, 10e-6},
                      Case{"1.5mm", Dimension::length, 1.5e-3},
                      Case{"1e-16 kg", Dimension::mass, 1e-16},
                      Case{"2 g", Dimension::mass, 2e-3},
                      Case{"2ms", Dimension::time, 2e-3},
                      Case{"100 us", Dimension::time, 100e-6},
                      Case{"500 Hz", Dimension::angular_frequency, 2 * kPi * 500},
                      Case{"2.88 GHz", Dimension::angular_frequency, 2 * kPi * 2.88e9},
                      Case{"10 MHz", Dimension::angular_frequency, 2 * kPi * 1e7},
                      Case{"3141.5 rad/s", Dimension::angular_frequency, 3141.5},
                      Case{"1 kHz", Dimension::rate, 1e3},
                      Case{"2.88 GHz", Dimension::rate, 2.88e9},
                      Case{"0.1 mK", Dimension::temperature, 1e-4},
                      Case{"1 uK", Dimension::temperature, 1e-6},
                      Case{"1e-9 Torr", Dimension::pressure, 1e-9 * 101325.0 / 760.0},
                      Case{"760 Torr", Dimension::pressure, 101325.0},
                      Case{"1 mbar", Dimension::pressure, 100.0},
                      Case{"3 g/cm3", Dimension::density, 3000.0},
                      Case{"1e6 T/m", Dimension::gradient, 1e6},
                      Case{"1.7e5 T/m2", Dimension::second_gradient, 1.7e5},
                      Case{"9.8 m/s2", Dimension::acceleration, 9.8},
                      Case{"10 mrad", Dimension::phase, 1e-2},
                      Case{"42", Dimension::dimensionless, 42.0},
                      Case{"  7.5  ", Dimension::time, 7.5}));

TEST(Units, RejectsUnknownUnit) {
  EXPECT_THROW((void)parse_quantity("5 furlongs", Dimension::length), nvgrav::InvalidArgument);
}

TEST(Units, RejectsUnitOfWrongDimension) {
  EXPECT_THROW((void)parse_quantity("5 ms", Dimension::length), nvgrav::InvalidArgument);
  EXPECT_THROW((void)parse_quantity("5 Hz", Dimension::dimensionless), nvgrav::InvalidArgument);
}

TEST(Units, RejectsGarbage) {
  EXPECT_THROW((void)parse_quantity("", Dimension::length), nvgrav::InvalidArgument);
  EXPECT_THROW((void)parse_quantity("abc", Dimension::length), nvgrav::InvalidArgument);
  EXPECT_THROW((void)parse_quantity("inf", Dimension::length), nvgrav::InvalidArgument);
}

TEST(Units, EveryDimensionHasItsSiSymbolInTable) {
  for (const auto& e : nvgrav::kUnitTable) {
    const auto sym = nvgrav::si_symbol(e.dim);
    if (sym.empty()) continue;
    EXPECT_DOUBLE_EQ(parse_quantity("1 " + std::string(sym), e.dim), 1.0) << sym;
  }
}

}  // namespace
