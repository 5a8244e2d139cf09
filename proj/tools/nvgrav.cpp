#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "nvgrav/cli.hpp"
#include "nvgrav/units.hpp"

namespace {

using nvgrav::Dimension;
using nvgrav::parse_quantity;

// Flags that override the resolved configuration, accepted by every subcommand.
struct Overrides {
  std::optional<std::string> gradient, second_gradient, gravity, t0, omega_z, t2, q, mass,
      temperature;
  std::optional<double> nbar, bath_nbar;
  std::optional<int> ncut, phases;

  void apply(nvgrav::SystemParams& p) const {
    if (mass) p.oscillator.mass = parse_quantity(*mass, Dimension::mass);
    if (omega_z) p.oscillator.omega_z = parse_quantity(*omega_z, Dimension::angular_frequency);
    if (t0) p.oscillator.omega_z = nvgrav::kTwoPi / parse_quantity(*t0, Dimension::time);
    if (q) p.oscillator.quality_factor = parse_quantity(*q, Dimension::dimensionless);
    if (temperature) p.oscillator.temperature = parse_quantity(*temperature, Dimension::temperature);
    if (t2) p.spin.t2 = parse_quantity(*t2, Dimension::time);
    if (gradient) p.coupling.gradient = parse_quantity(*gradient, Dimension::gradient);
    if (second_gradient) {
      p.coupling.second_gradient = parse_quantity(*second_gradient, Dimension::second_gradient);
    }
    if (gravity) p.constants.g_local = parse_quantity(*gravity, Dimension::acceleration);
    if (nbar) p.sequence.initial_nbar = *nbar;
    if (bath_nbar) p.sequence.bath_nbar = *bath_nbar;
    if (ncut) p.sequence.fock_cutoff = *ncut;
    if (phases) p.sequence.phase_points = *phases;
  }
};

struct AxisFlags {
  std::optional<std::string> min, max;
  std::optional<int> points;
  std::optional<bool> log;

  [[nodiscard]] bool any() const { return min || max || points || log; }

  [[nodiscard]] nvgrav::maps::AxisSpec resolve(nvgrav::maps::AxisSpec a, Dimension dim) const {
    if (min) a.min = parse_quantity(*min, dim);
    if (max) a.max = parse_quantity(*max, dim);
    if (points) a.points = *points;
    if (log) a.log = *log;
    a.check();
    return a;
  }
};

}  // namespace

int main(int argc, char** argv) {
  namespace cli = nvgrav::cli;
  CLI::App app{"NV-spin / mechanical-oscillator gravimeter simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "nvgrav_out";
  std::uint64_t seed = 1;
  int workers = 1;
  Overrides ov;
  app.add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "master random seed");
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--gradient", ov.gradient, "B_g, e.g. '1e6 T/m'");
  app.add_option("--second-gradient", ov.second_gradient, "d2B/dz2, e.g. '1.7e5 T/m2'");
  app.add_option("--gravity", ov.gravity, "local g, e.g. '9.8 m/s2'");
  app.add_option("--t0", ov.t0, "mechanical period, sets omega_z = 2 pi / t0, e.g. '2ms'");
  app.add_option("--omega-z", ov.omega_z, "trap frequency, e.g. '500 Hz'");
  app.add_option("--t2", ov.t2, "spin dephasing time, e.g. '2ms'");
  app.add_option("--q", ov.q, "mechanical quality factor");
  app.add_option("--mass", ov.mass, "oscillator mass, e.g. '1e-16 kg'");
  app.add_option("--temperature", ov.temperature, "CoM temperature, e.g. '0.1 mK'");
  app.add_option("--nbar", ov.nbar, "initial thermal occupancy");
  app.add_option("--bath-nbar", ov.bath_nbar, "damping bath occupancy");
  app.add_option("--ncut", ov.ncut, "Fock cutoff (0 = automatic)");
  app.add_option("--phases", ov.phases, "fringe phase points");

  auto* phase = app.add_subcommand("phase", "interferometer phase: closed form, quadrature, echo");
  cli::PhaseOptions phase_opt;
  phase->add_option("--method", phase_opt.method, "closed_form | quadrature | echo | all")
      ->check(CLI::IsMember({"closed_form", "quadrature", "echo", "all"}));

  auto* ramsey = app.add_subcommand("ramsey", "Ramsey fringe on the truncated hybrid space");
  cli::RamseyOptions ramsey_opt;
  ramsey->add_option("--r", ramsey_opt.r, "dimensionless coupling lambda / hbar omega_z");
  ramsey->add_option("--rg", ramsey_opt.r_g, "dimensionless gravity offset");
  ramsey->add_flag("--use-config-coupling", ramsey_opt.use_config_coupling,
                   "use B_g and g from the configuration instead of --r/--rg");
  ramsey->add_flag("--allow-large-r", ramsey_opt.allow_large_r, "permit r above the desk-scale limit");
  ramsey->add_flag("--damping", ramsey_opt.damping, "motional damping at omega_z / Q");
  ramsey->add_flag("--dephasing", ramsey_opt.dephasing, "spin dephasing with T2");

  auto* map = app.add_subcommand("map", "visibility or precision heatmap");
  cli::MapOptions map_opt;
  AxisFlags xf, yf;
  std::optional<std::string> map_t0, sigma_phi;
  map->add_option("--kind", map_opt.kind, "visibility | precision")
      ->check(CLI::IsMember({"visibility", "precision"}));
  map->add_option("--x-min", xf.min);
  map->add_option("--x-max", xf.max);
  map->add_option("--nx", xf.points);
  map->add_option("--x-log", xf.log);
  map->add_option("--y-min", yf.min);
  map->add_option("--y-max", yf.max);
  map->add_option("--ny", yf.points);
  map->add_option("--y-log", yf.log);
  map->add_option("--map-r", map_opt.r, "visibility map coupling r");
  map->add_option("--map-t0", map_t0, "visibility map interrogation time");
  map->add_option("--sigma-phi", sigma_phi, "precision map phase accuracy, e.g. '10 mrad'");

  auto* ddc = app.add_subcommand("dd", "dynamical decoupling Monte Carlo");
  cli::DDOptions dd_opt;
  std::optional<std::string> sigma, tau_c, omega1, omega2, carrier, drive_tau, free_dur, driven_dur;
  ddc->add_option("--sigma", sigma, "detuning noise std, e.g. '10 kHz'");
  ddc->add_option("--tau-c", tau_c, "noise correlation time, e.g. '2us'");
  ddc->add_option("--omega1", omega1, "drive Rabi frequency, e.g. '1 MHz'");
  ddc->add_option("--omega2", omega2, "phase-modulation frequency, e.g. '10 kHz'");
  ddc->add_option("--carrier", carrier, "carrier frequency, e.g. '2.88 GHz'");
  ddc->add_option("--drive-noise", dd_opt.drive.relative_noise, "relative drive amplitude noise");
  ddc->add_option("--drive-tau", drive_tau, "drive noise correlation time");
  ddc->add_option("--trajectories", dd_opt.trajectories)->check(CLI::Range(100, 100000000));
  ddc->add_option("--samples", dd_opt.samples)->check(CLI::Range(2, 100000));
  ddc->add_option("--free-duration", free_dur);
  ddc->add_option("--driven-duration", driven_dur);

  auto* rep = app.add_subcommand("report", "consistency report of quoted numbers");
  cli::ReportOptions rep_opt;
  rep->add_option("--tolerance", rep_opt.tolerance, "relative tolerance for PASS")
      ->check(CLI::PositiveNumber);

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  cli::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg.params = cli::load_config(config_path);
    ov.apply(cfg.params);
    cfg.out_dir = out_dir;
    cfg.seed = seed;
    cfg.workers = workers;
    if (map_t0) map_opt.t0 = parse_quantity(*map_t0, Dimension::time);
    if (sigma_phi) map_opt.sigma_phi = parse_quantity(*sigma_phi, Dimension::phase);
    if (*map) {
      using nvgrav::maps::default_gradient_axis;
      const bool vis = map_opt.kind == "visibility";
      if (xf.any()) {
        map_opt.x_axis = xf.resolve(vis ? nvgrav::maps::default_quality_axis() : default_gradient_axis(),
                                    vis ? Dimension::dimensionless : Dimension::gradient);
      }
      if (yf.any()) {
        map_opt.y_axis = yf.resolve(
            vis ? nvgrav::maps::default_t2_axis() : nvgrav::maps::default_period_axis(), Dimension::time);
      }
    }
    if (sigma) dd_opt.noise.sigma = parse_quantity(*sigma, Dimension::angular_frequency);
    if (tau_c) dd_opt.noise.tau_c = parse_quantity(*tau_c, Dimension::time);
    if (omega1) dd_opt.drive.omega1 = parse_quantity(*omega1, Dimension::angular_frequency);
    if (omega2) dd_opt.drive.omega2 = parse_quantity(*omega2, Dimension::angular_frequency);
    if (carrier) dd_opt.drive.carrier = parse_quantity(*carrier, Dimension::angular_frequency);
    if (drive_tau) dd_opt.drive.noise_tau = parse_quantity(*drive_tau, Dimension::time);
    if (free_dur) dd_opt.free_duration = parse_quantity(*free_dur, Dimension::time);
    if (driven_dur) dd_opt.driven_duration = parse_quantity(*driven_dur, Dimension::time);
  } catch (const nvgrav::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitUsage;
  }
  ramsey_opt.dephasing = ramsey_opt.dephasing || ov.t2.has_value();
  ramsey_opt.damping = ramsey_opt.damping || ov.q.has_value();

  try {
    if (*phase) return cli::cmd_phase(cfg, phase_opt, std::cout);
    if (*ramsey) return cli::cmd_ramsey(cfg, ramsey_opt, std::cout);
    if (*map) return cli::cmd_map(cfg, map_opt, std::cout);
    if (*ddc) return cli::cmd_dd(cfg, dd_opt, std::cout);
    if (*rep) return cli::cmd_report(cfg, rep_opt, std::cout);
  } catch (const nvgrav::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitFailure;
  }
  return cli::kExitUsage;
}
