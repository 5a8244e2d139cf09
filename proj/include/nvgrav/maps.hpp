#pragma once

// Visibility and precision heatmaps over two swept parameters.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nvgrav/error.hpp"
#include "nvgrav/noise.hpp"
#include "nvgrav/parallel.hpp"
#include "nvgrav/params.hpp"
#include "nvgrav/quantum.hpp"

namespace nvgrav::maps {

struct AxisSpec {
  std::string name;
  std::string unit;
  double min = 0.0;
  double max = 0.0;
  int points = 1;
  bool log = false;

  void check() const {
    if (points < 1) throw InvalidArgument("axis '" + name + "' needs at least one point");
    if (!(min <= max)) throw InvalidArgument("axis '" + name + "' needs min <= max");
    if (log && !(min > 0)) throw InvalidArgument("log axis '" + name + "' needs min > 0");
    if (points == 1 && min != max) throw InvalidArgument("single-point axis '" + name + "' needs min == max");
  }

  [[nodiscard]] std::vector<double> values() const {
    check();
    std::vector<double> v(static_cast<std::size_t>(points));
    if (points == 1) {
      v[0] = min;
      return v;
    }
    for (int i = 0; i < points; ++i) {
      const double f = static_cast<double>(i) / (points - 1);
      v[static_cast<std::size_t>(i)] =
          log ? std::exp(std::log(min) + f * (std::log(max) - std::log(min)))
              : min + f * (max - min);
    }
    v.front() = min;
    v.back() = max;
    return v;
  }
};

enum class Semantic { visibility, relative_precision };

[[nodiscard]] inline std::string to_string(Semantic s) {
  return s == Semantic::visibility ? "visibility" : "relative_precision";
}

/// Values and masks stored row-major with y as the row index:
/// cell (ix, iy) lives at iy * nx + ix.
struct HeatmapGrid {
  AxisSpec x_axis;
  AxisSpec y_axis;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> values;
  std::vector<unsigned char> feasible;
  Semantic semantic = Semantic::visibility;

  [[nodiscard]] std::size_t nx() const { return x.size(); }
  [[nodiscard]] std::size_t ny() const { return y.size(); }
  [[nodiscard]] std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx() + ix; }
  [[nodiscard]] double value(std::size_t ix, std::size_t iy) const { return values[index(ix, iy)]; }
  [[nodiscard]] bool is_feasible(std::size_t ix, std::size_t iy) const {
    return feasible[index(ix, iy)] != 0;
  }
};

struct Cell {
  std::size_t ix = 0;
  std::size_t iy = 0;
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
};

/// Feasible cell with the best value: largest visibility or smallest dg/g.
/// Ties resolve to the lowest index. Empty when nothing is feasible.
[[nodiscard]] inline std::optional<Cell> best_feasible(const HeatmapGrid& g) {
  std::optional<Cell> best;
  for (std::size_t iy = 0; iy < g.ny(); ++iy) {
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      if (!g.is_feasible(ix, iy)) continue;
      const double v = g.value(ix, iy);
      const bool better = !best || (g.semantic == Semantic::visibility ? v > best->value
                                                                         : v < best->value);
      if (better) best = Cell{ix, iy, g.x[ix], g.y[iy], v};
    }
  }
  return best;
}

/// Scan over x = quality factor, y = T2 (s). Feasible means V >= 1/e.
[[nodiscard]] inline HeatmapGrid visibility_map(const AxisSpec& q_axis, const AxisSpec& t2_axis,
                                                double t0, double r, int workers = 1) {
  if (!(t0 > 0) || r < 0) throw InvalidArgument("visibility map needs t0 > 0 and r >= 0");
  HeatmapGrid g{q_axis, t2_axis, q_axis.values(), t2_axis.values(), {}, {}, Semantic::visibility};
  g.values.assign(g.nx() * g.ny(), 0.0);
  g.feasible.assign(g.nx() * g.ny(), 0);
  const double threshold = std::exp(-1.0);
  parallel_for(g.ny(), workers, [&](std::size_t iy) {
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      const double v = quantum::visibility_analytic(g.x[ix], g.y[iy], t0, r);
      g.values[g.index(ix, iy)] = v;
      g.feasible[g.index(ix, iy)] = v >= threshold ? 1 : 0;
    }
  });
  return g;
}

/// Smallest Q reaching V = 1/e at dephasing time T2; infinite when T2 <= t0.
[[nodiscard]] inline double threshold_quality_factor(double t2, double t0, double r) {
  const double budget = 1.0 - t0 / t2;
  if (!(budget > 0)) return std::numeric_limits<double>::infinity();
  return kTwoPi * 4.0 * r * r / budget;
}

/// Points on the V = 1/e contour, one per T2 value (Q = inf where unreachable).
[[nodiscard]] inline std::vector<std::pair<double, double>> visibility_contour(
    const std::vector<double>& t2_values, double t0, double r) {
  std::vector<std::pair<double, double>> out;
  out.reserve(t2_values.size());
  for (const double t2 : t2_values) out.emplace_back(t2, threshold_quality_factor(t2, t0, r));
  return out;
}

/// Scan over x = B_g (T/m), y = t0 (s). Each cell sets omega_z = 2 pi/t0
/// and is feasible when the thermal field fluctuation stays below the limit.
/// Temperature and mass come from `base.oscillator`.
[[nodiscard]] inline HeatmapGrid precision_map(const AxisSpec& bg_axis, const AxisSpec& t0_axis,
                                               double sigma_phi, const SystemParams& base,
                                               int workers = 1) {
  if (!(sigma_phi > 0)) throw InvalidArgument("phase accuracy must be positive");
  HeatmapGrid g{bg_axis, t0_axis, bg_axis.values(), t0_axis.values(), {}, {},
                Semantic::relative_precision};
  if (!(g.y.front() > 0)) throw InvalidArgument("t0 axis must be positive");
  g.values.assign(g.nx() * g.ny(), 0.0);
  g.feasible.assign(g.nx() * g.ny(), 0);
  parallel_for(g.ny(), workers, [&](std::size_t iy) {
    OscillatorParams osc = base.oscillator;
    osc.omega_z = kTwoPi / g.y[iy];
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      g.values[g.index(ix, iy)] =
          noise::relative_precision(sigma_phi, g.x[ix], g.y[iy], base.constants);
      g.feasible[g.index(ix, iy)] =
          noise::magnetic_fluctuation(g.x[ix], osc, base.constants).feasible ? 1 : 0;
    }
  });
  return g;
}

/// Default axes.
[[nodiscard]] inline AxisSpec default_quality_axis(int points = 100) {
  return {"quality_factor", "", 1e3, 1e8, points, true};
}
[[nodiscard]] inline AxisSpec default_t2_axis(int points = 100) {
  return {"t2", "s", 0.1e-3, 100e-3, points, true};
}
[[nodiscard]] inline AxisSpec default_gradient_axis(int points = 100) {
  return {"gradient", "T/m", 1e4, 1e7, points, true};
}
[[nodiscard]] inline AxisSpec default_period_axis(int points = 100) {
  return {"t0", "s", 0.1e-3, 2e-3, points, false};
}

}  // namespace nvgrav::maps
