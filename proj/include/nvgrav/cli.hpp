#pragma once

// Subcommand implementations behind the nvgrav executable. Each command takes
// a fully resolved RunConfig, writes its data files plus sidecars into
// out_dir and a human summary to `log`, and returns the process exit status.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nvgrav/classical.hpp"
#include "nvgrav/config.hpp"
#include "nvgrav/dd.hpp"
#include "nvgrav/error.hpp"
#include "nvgrav/io.hpp"
#include "nvgrav/maps.hpp"
#include "nvgrav/noise.hpp"
#include "nvgrav/params.hpp"
#include "nvgrav/quantum.hpp"
#include "nvgrav/report.hpp"

namespace nvgrav::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  SystemParams params;
  std::filesystem::path out_dir = "nvgrav_out";
  std::uint64_t seed = 1;
  int workers = 1;
};

/// Reads and parses a configuration file on top of the defaults.
[[nodiscard]] inline SystemParams load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Prints violations and returns false if the configuration is unusable.
inline bool check_valid(const SystemParams& p, std::ostream& log) {
  const auto rep = validate(p);
  for (const auto& v : rep.violations) log << "error: " << v << "\n";
  return rep.ok();
}

}  // namespace detail

// ---------------------------------------------------------------- phase

struct PhaseOptions {
  std::string method = "all";  // closed_form | quadrature | echo | all
};

[[nodiscard]] inline int cmd_phase(const RunConfig& cfg, const PhaseOptions& opt, std::ostream& log) {
  const auto& p = cfg.params;
  if (!detail::check_valid(p, log)) return kExitFailure;
  const bool all = opt.method == "all";
  if (!all && opt.method != "closed_form" && opt.method != "quadrature" && opt.method != "echo") {
    log << "error: unknown method '" << opt.method << "'\n";
    return kExitUsage;
  }
  const double t0 = p.oscillator.period();
  const auto dc = derive_coupling(p);
  const auto eq = classical::equilibrium(p);
  const auto closed = classical::phase_shift(p, t0, classical::PhaseMethod::closed_form);

  std::vector<io::Row> rows;
  rows.push_back({"t0", t0});
  rows.push_back({"z0", eq.z0});
  rows.push_back({"delta_z", eq.delta_z});
  rows.push_back({"r", dc.r});
  rows.push_back({"r_g", dc.r_g});
  rows.push_back({"delta_phi_closed_form", closed.delta_phi});
  rows.push_back({"delta_phi_closed_form_alt", closed.delta_phi_alt});
  rows.push_back({"delta_phi_from_displacement", classical::phase_from_displacement(p)});
  log << "t0          = " << detail::num(t0) << " s\n"
      << "z0          = " << detail::num(eq.z0) << " m\n"
      << "delta_z     = " << detail::num(eq.delta_z) << " m\n"
      << "r           = " << detail::num(dc.r) << "\n"
      << "delta_phi   = " << detail::num(closed.delta_phi) << " rad (closed form)\n";
  if (all || opt.method == "quadrature") {
    const auto q = classical::phase_shift(p, t0, classical::PhaseMethod::quadrature);
    rows.push_back({"delta_phi_quadrature", q.delta_phi});
    rows.push_back({"action_plus", q.action_plus});
    rows.push_back({"action_minus", q.action_minus});
    log << "delta_phi   = " << detail::num(q.delta_phi) << " rad (quadrature)\n";
  }
  if (all || opt.method == "echo") {
    for (const auto proto : {classical::EchoProtocol::none, classical::EchoProtocol::flip,
                             classical::EchoProtocol::rotate,
                             classical::EchoProtocol::flip_and_rotate}) {
      const auto e = classical::echo_phase(p, proto, true);
      const double residue = classical::second_gradient_phase(p, proto);
      rows.push_back({"echo_" + classical::to_string(proto), e.delta_phi});
      rows.push_back({"echo_" + classical::to_string(proto) + "_second_gradient_part", residue});
      log << "echo " << classical::to_string(proto) << ": delta_phi = " << detail::num(e.delta_phi)
          << " rad, second-gradient part = " << detail::num(residue) << " rad\n";
    }
  }
  const auto shift = classical::second_order_frequency_shift(p);
  rows.push_back({"relative_frequency_shift", shift.plus});

  const auto file = cfg.out_dir / "phase.csv";
  io::write_file(file, io::to_csv({"quantity", "value"}, rows));
  io::write_sidecar(file, "phase", p, cfg.seed, {{"method", opt.method}});
  return kExitOk;
}

// ---------------------------------------------------------------- ramsey

struct RamseyOptions {
  double r = 0.5;
  double r_g = 0.1;
  bool use_config_coupling = false;
  bool allow_large_r = false;
  bool damping = false;    // motional damping at omega_z / Q
  bool dephasing = false;  // spin dephasing with T2
};

inline constexpr double kDeskScaleR = 4.0;

[[nodiscard]] inline int cmd_ramsey(const RunConfig& cfg, const RamseyOptions& opt,
                                    std::ostream& log) {
  SystemParams p = cfg.params;
  if (!detail::check_valid(p, log)) return kExitFailure;
  if (!opt.use_config_coupling) p = with_dimensionless_coupling(p, opt.r, opt.r_g);
  const auto dc = derive_coupling(p);
  if (dc.r > kDeskScaleR || dc.r_g > kDeskScaleR) {
    const int need = quantum::suggest_cutoff(dc.r, dc.r_g, p.sequence.initial_nbar);
    if (!opt.allow_large_r) {
      log << "error: r = " << detail::num(dc.r) << ", r_g = " << detail::num(dc.r_g)
          << " exceed the desk-scale limit " << kDeskScaleR
          << "; pass --allow-large-r to run anyway (needs N_cut ~ " << need << ")\n";
      return kExitFailure;
    }
    log << "warning: large coupling, N_cut ~ " << need << ", dimension " << 3 * (need + 1)
        << "; cost grows as N_cut^3 per step\n";
  }

  quantum::RamseyOptions ro;
  ro.n_cut = p.sequence.fock_cutoff;
  ro.initial_nbar = p.sequence.initial_nbar;
  ro.phases = quantum::uniform_phases(p.sequence.phase_points);
  const auto diss = quantum::Dissipators::from(p, opt.damping, opt.dephasing);

  quantum::Fringe fr;
  try {
    fr = quantum::ramsey_run(p, ro, diss);
  } catch (const CutoffError& e) {
    log << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  const double t0 = p.oscillator.period();
  const double expected =
      quantum::wrap_phase(classical::phase_shift(p, t0, classical::PhaseMethod::closed_form).delta_phi);
  const double heuristic = quantum::visibility_analytic(
      opt.damping ? p.oscillator.quality_factor : std::numeric_limits<double>::infinity(),
      opt.dephasing ? p.spin.t2 : std::numeric_limits<double>::infinity(), t0, dc.r);

  std::vector<io::Row> rows;
  for (std::size_t i = 0; i < fr.phases.size(); ++i) rows.push_back({fr.phases[i], fr.populations[i]});
  const auto file = cfg.out_dir / "fringe.csv";
  io::write_file(file, io::to_csv({"phi", "P0"}, rows, {"fingerprint=" + fingerprint(p)}));
  const int n_cut = ro.n_cut > 0 ? ro.n_cut : quantum::suggest_cutoff(dc.r, dc.r_g, ro.initial_nbar);
  nlohmann::ordered_json fit{{"delta_phi", fr.delta_phi},      {"visibility", fr.visibility},
                             {"residual", fr.residual},        {"converged", fr.converged},
                             {"expected_delta_phi", expected}, {"heuristic_visibility", heuristic},
                             {"n_cut", n_cut}};
  io::write_sidecar(file, "ramsey", p, cfg.seed,
                    {{"r", opt.r},
                     {"r_g", opt.r_g},
                     {"use_config_coupling", opt.use_config_coupling},
                     {"allow_large_r", opt.allow_large_r},
                     {"damping", opt.damping},
                     {"dephasing", opt.dephasing}},
                    {{"fit", fit}});
  log << "r = " << detail::num(dc.r) << ", r_g = " << detail::num(dc.r_g) << ", N_cut = " << n_cut
      << "\n"
      << "delta_phi (mod 2pi) = " << detail::num(fr.delta_phi) << " rad, closed form "
      << detail::num(expected) << " rad\n"
      << "visibility = " << detail::num(fr.visibility) << " (heuristic " << detail::num(heuristic)
      << "), fit residual " << detail::num(fr.residual) << "\n";
  if (!fr.converged) {
    log << "error: fringe fit failed, residual " << detail::num(fr.residual) << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- map

struct MapOptions {
  std::string kind = "precision";  // visibility | precision
  std::optional<maps::AxisSpec> x_axis;
  std::optional<maps::AxisSpec> y_axis;
  double r = 90.0;           // visibility: coupling at the operating point
  double t0 = 2e-3;          // visibility: interrogation time
  double sigma_phi = 10e-3;  // precision: phase accuracy
};

[[nodiscard]] inline int cmd_map(const RunConfig& cfg, const MapOptions& opt, std::ostream& log) {
  const auto& p = cfg.params;
  if (!detail::check_valid(p, log)) return kExitFailure;
  maps::HeatmapGrid grid;
  nlohmann::ordered_json options{{"kind", opt.kind}};
  if (opt.kind == "visibility") {
    const auto xa = opt.x_axis.value_or(maps::default_quality_axis());
    const auto ya = opt.y_axis.value_or(maps::default_t2_axis());
    grid = maps::visibility_map(xa, ya, opt.t0, opt.r, cfg.workers);
    options["r"] = opt.r;
    options["t0"] = opt.t0;
  } else if (opt.kind == "precision") {
    const auto xa = opt.x_axis.value_or(maps::default_gradient_axis());
    const auto ya = opt.y_axis.value_or(maps::default_period_axis());
    grid = maps::precision_map(xa, ya, opt.sigma_phi, p, cfg.workers);
    options["sigma_phi"] = opt.sigma_phi;
  } else {
    log << "error: unknown map kind '" << opt.kind << "'\n";
    return kExitUsage;
  }
  std::vector<io::Row> rows;
  rows.reserve(grid.values.size());
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      rows.push_back({grid.x[ix], grid.y[iy], grid.value(ix, iy), grid.is_feasible(ix, iy) ? 1 : 0});
    }
  }
  const auto file = cfg.out_dir / ("map_" + opt.kind + ".csv");
  io::write_file(file, io::to_csv({grid.x_axis.name, grid.y_axis.name, maps::to_string(grid.semantic),
                                   "feasible"},
                                  rows));
  auto axis_json = [](const maps::AxisSpec& a) {
    return nlohmann::ordered_json{{"name", a.name}, {"unit", a.unit}, {"min", a.min},
                                  {"max", a.max},   {"points", a.points}, {"log", a.log}};
  };
  nlohmann::ordered_json extra{{"x_axis", axis_json(grid.x_axis)},
                               {"y_axis", axis_json(grid.y_axis)},
                               {"value", maps::to_string(grid.semantic)}};
  const auto best = maps::best_feasible(grid);
  if (best) {
    extra["best_feasible"] = {{"x", best->x}, {"y", best->y}, {"value", best->value}};
    log << "best feasible cell: " << grid.x_axis.name << " = " << detail::num(best->x) << ", "
        << grid.y_axis.name << " = " << detail::num(best->y) << ", "
        << maps::to_string(grid.semantic) << " = " << detail::num(best->value) << "\n";
  } else {
    extra["best_feasible"] = nullptr;
    log << "feasible region is empty\n";
  }
  if (opt.kind == "visibility") {
    nlohmann::ordered_json contour = nlohmann::ordered_json::array();
    for (const auto& [t2, q] : maps::visibility_contour(grid.y, opt.t0, opt.r)) {
      contour.push_back({{"t2", t2}, {"q_min", std::isfinite(q) ? nlohmann::ordered_json(q) : nullptr}});
    }
    extra["threshold_contour"] = contour;
    log << "V >= 1/e needs Q > " << detail::num(maps::threshold_quality_factor(
                                         std::numeric_limits<double>::infinity(), opt.t0, opt.r))
        << " and T2 > " << detail::num(opt.t0) << " s\n";
  }
  io::write_sidecar(file, "map", p, cfg.seed, options, extra);
  return kExitOk;
}

// ---------------------------------------------------------------- dd

struct DDOptions {
  dd::OUNoise noise{};
  dd::DriveSpec drive{};
  int trajectories = 1000;
  int samples = 100;
  double free_duration = 600e-6;
  double driven_duration = 2e-3;
};

[[nodiscard]] inline int cmd_dd(const RunConfig& cfg, const DDOptions& opt, std::ostream& log) {
  dd::OUNoise noise = opt.noise;
  noise.seed = cfg.seed;
  std::vector<std::string> warnings;
  try {
    warnings = dd::check_drive(opt.drive);
  } catch (const InvalidArgument& e) {
    log << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  for (const auto& w : warnings) log << "warning: " << w << "\n";
  const auto free = dd::free_decay(noise, opt.free_duration, opt.trajectories, opt.samples, cfg.workers);
  const auto driven = dd::decoupled_decay(noise, opt.drive, opt.driven_duration, opt.trajectories,
                                          opt.samples, cfg.workers);
  const double ratio = (std::isfinite(free.best.t2) && std::isfinite(driven.best.t2))
                           ? driven.best.t2 / free.best.t2
                           : std::numeric_limits<double>::quiet_NaN();
  nlohmann::ordered_json options{{"sigma", noise.sigma},
                                 {"tau_c", noise.tau_c},
                                 {"omega1", opt.drive.omega1},
                                 {"omega2", opt.drive.omega2},
                                 {"carrier", opt.drive.carrier},
                                 {"drive_noise", opt.drive.relative_noise},
                                 {"drive_noise_tau", opt.drive.noise_tau},
                                 {"trajectories", opt.trajectories},
                                 {"samples", opt.samples},
                                 {"free_duration", opt.free_duration},
                                 {"driven_duration", opt.driven_duration}};
  auto fit_json = [](const dd::DecayFit& f) {
    auto t = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nullptr; };
    return nlohmann::ordered_json{{"p", f.p}, {"t2", t(f.t2)}, {"stderr", f.stderr_t2},
                                  {"rms_residual", f.rms_residual}};
  };
  auto write_env = [&](const dd::CoherenceEnvelope& env, const std::string& name) {
    std::vector<io::Row> rows;
    for (std::size_t i = 0; i < env.times.size(); ++i) {
      rows.push_back({env.times[i], env.coherence[i], env.stderr[i]});
    }
    const auto file = cfg.out_dir / name;
    io::write_file(file, io::to_csv({"t", "coherence", "stderr"}, rows));
    io::write_sidecar(file, "dd", cfg.params, cfg.seed, options,
                      {{"fit_exponential", fit_json(env.exponential)},
                       {"fit_gaussian", fit_json(env.gaussian)},
                       {"fit_best", fit_json(env.best)},
                       {"t2_ratio", std::isfinite(ratio) ? nlohmann::ordered_json(ratio) : nullptr}});
  };
  write_env(free, "dd_free.csv");
  write_env(driven, "dd_driven.csv");
  auto show = [&](const char* label, const dd::CoherenceEnvelope& env) {
    log << label << ": T2 = "
        << (std::isfinite(env.best.t2) ? detail::num(env.best.t2) + " s" : std::string("inf"))
        << " (p = " << env.best.p << ", +/- " << detail::num(env.best.stderr_t2) << "), exponential "
        << detail::num(env.exponential.t2) << ", gaussian " << detail::num(env.gaussian.t2) << "\n";
  };
  show("free", free);
  show("driven", driven);
  log << "motional-narrowing T2* = " << detail::num(dd::motional_narrowing_t2(noise.sigma, noise.tau_c))
      << " s\n"
      << "prolongation T2/T2* = " << (std::isfinite(ratio) ? detail::num(ratio) : std::string("undefined"))
      << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
  double tolerance = 0.1;
};

[[nodiscard]] inline int cmd_report(const RunConfig& cfg, const ReportOptions& opt, std::ostream& log) {
  if (!detail::check_valid(cfg.params, log)) return kExitFailure;
  const auto rep = report::consistency_report(cfg.params, opt.tolerance);
  const auto text = report::to_text(rep);
  const auto file = cfg.out_dir / "report.txt";
  io::write_file(file, text);
  io::write_sidecar(file, "report", cfg.params, cfg.seed, {{"tolerance", opt.tolerance}});
  log << text;
  return kExitOk;
}

}  // namespace nvgrav::cli
