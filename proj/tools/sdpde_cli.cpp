// Command-line driver: run, pair, sweep-n, verify, attractor.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdpde/analysis.hpp"
#include "sdpde/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace sdpde;

namespace {

enum Exit { ok = 0, validation = 1, check_failed = 2, io = 3 };

struct Common {
  std::string config;
  std::string out;
  std::string dt;
  std::optional<int> modes;
  std::uint64_t seed = 1;
  bool plot_data = false;
  bool strict = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config, "scenario config file")->required();
  cmd->add_option("--out", c.out, "output directory (default: [output] dir)");
  cmd->add_option("--dt", c.dt, "override the time step (e.g. 0.01 or 1/128)");
  cmd->add_option("--modes", c.modes, "override the number of Galerkin modes");
  cmd->add_option("--seed", c.seed, "seed for randomized samples and ensembles");
  cmd->add_flag("--plot-data", c.plot_data, "write per-figure CSV files");
  cmd->add_flag("--strict", c.strict, "exit 2 when any check fails");
}

Scenario load(const Common& c) {
  ScenarioOverrides o;
  if (!c.dt.empty()) {
    try {
      o.dt = parse_number(c.dt);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--dt: ") + e.what());
    }
  }
  o.modes = c.modes;
  return load_scenario(c.config, o);
}

fs::path output_dir(const Common& c, const Scenario& s) {
  fs::path dir = c.out.empty() ? fs::path(s.output.directory) : fs::path(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

int finish(const VerificationReport& rep, const fs::path& dir, bool strict) {
  for (const auto& r : rep.records) {
    std::printf("%s %-24s margin=%.6g%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.margin,
                r.note.empty() ? "" : "  # ", r.note.c_str());
  }
  const fs::path path = dir / "report.json";
  export_report(rep, path.string());
  std::printf("report: %s\n", path.string().c_str());
  if (strict && !rep.all_passed()) {
    for (const auto& r : rep.records) {
      if (!r.passed) {
        std::fprintf(stderr, "check failed: %s\n", r.name.c_str());
        break;
      }
    }
    return check_failed;
  }
  return ok;
}

void write_plot_data(const VerificationReport& rep, const fs::path& dir) {
  for (const auto& r : rep.records) {
    if (!r.series.empty()) export_series(r, (dir / (r.name + ".csv")).string());
  }
}

int cmd_run(const Common& c) {
  const Scenario s = load(c);
  const fs::path dir = output_dir(c, s);
  const Trajectory traj = run(s);
  const fs::path path = dir / "trajectory.csv";
  export_trajectory(traj, path.string(), s.output.coefficients);
  std::printf("t=%.6g ||u||=%.10g ||A^1/2 u||=%.10g eta=%.6g\n", traj.horizon(),
              traj.norm_l2.back(), traj.norm_h1.back(), traj.eta.back());
  std::printf("trajectory: %s\n", path.string().c_str());
  if (c.plot_data) {
    export_series(energy_check(traj, s), (dir / "energy.csv").string());
    export_series(dissipativity_check(traj, s), (dir / "dissipativity.csv").string());
  }
  return ok;
}

int cmd_pair(const Common& c, double delta) {
  const Scenario s = load(c);
  const fs::path dir = output_dir(c, s);
  VerificationReport rep;
  rep.scenario_config = to_config_text(s);
  rep.records.push_back(continuous_dependence_check(s, {delta}));
  if (c.plot_data) {
    const double c4 = rep.records.back().metric_value("C4");
    const PairedRun full = paired_run(s, delta, Perturbation::state, c4);
    const PairedRun half = paired_run(s, 0.5 * delta, Perturbation::state, c4);
    CheckRecord curves;
    std::vector<double> t(full.d_series.size());
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = static_cast<double>(j) * s.dt;
    curves.series = {{"t", t}, {"D_delta", full.d_series}, {"D_half_delta", half.d_series}};
    export_series(curves, (dir / "pair.csv").string());
  }
  return finish(rep, dir, c.strict);
}

int cmd_sweep(const Common& c, int n_max) {
  const Scenario s = load(c);
  const fs::path dir = output_dir(c, s);
  VerificationReport rep;
  rep.scenario_config = to_config_text(s);
  rep.records.push_back(limiting_solution_study(s, n_max));
  export_series(rep.records.back(), (dir / "sweep_n.csv").string());
  return finish(rep, dir, c.strict);
}

int cmd_verify(const Common& c) {
  const Scenario s = load(c);
  const fs::path dir = output_dir(c, s);
  VerifyOptions opt;
  opt.seed = c.seed;
  VerificationReport rep = verify(s, opt);
  rep.scenario_config = to_config_text(s);
  if (c.plot_data) write_plot_data(rep, dir);
  return finish(rep, dir, c.strict);
}

int cmd_attractor(const Common& c, int members) {
  const Scenario s = load(c);
  const fs::path dir = output_dir(c, s);
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> normal;
  std::vector<Scenario> ensemble;
  for (int i = 0; i < members; ++i) {
    // Initial sizes spread geometrically over [0.1, 10].
    const double size = members == 1 ? 1.0 : 0.1 * std::pow(100.0, i / double(members - 1));
    Scenario m = s;
    m.initial.u0.assign(static_cast<std::size_t>(s.modes), 0.0);
    double nsq = 0.0;
    for (double& v : m.initial.u0) {
      v = normal(rng);
      nsq += v * v;
    }
    for (double& v : m.initial.u0) v *= size / std::sqrt(nsq);
    ensemble.push_back(std::move(m));
  }
  const std::vector<EnsembleMember> runs = run_members(ensemble);
  VerificationReport rep;
  rep.scenario_config = to_config_text(s);
  rep.records.push_back(absorbing_check(runs));
  rep.records.push_back(attraction_diagnostic(runs));
  if (c.plot_data) write_plot_data(rep, dir);
  return finish(rep, dir, c.strict);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galerkin solver and estimate checks for reaction-diffusion equations with "
               "state-dependent delay"};
  app.require_subcommand(1);

  Common common;
  double delta = 1e-3;
  int n_max = 6;
  int members = 4;

  CLI::App* run_cmd = app.add_subcommand("run", "single simulation, exports trajectory.csv");
  add_common(run_cmd, common);
  CLI::App* pair_cmd = app.add_subcommand("pair", "continuous-dependence experiment");
  add_common(pair_cmd, common);
  pair_cmd->add_option("--delta", delta, "perturbation size")->check(CLI::PositiveNumber);
  CLI::App* sweep_cmd = app.add_subcommand("sweep-n", "distributed-to-discrete convergence study");
  add_common(sweep_cmd, common);
  sweep_cmd->add_option("--n-max", n_max, "largest kernel index")->check(CLI::Range(1, 30));
  CLI::App* verify_cmd = app.add_subcommand("verify", "full verification report");
  add_common(verify_cmd, common);
  CLI::App* attr_cmd = app.add_subcommand("attractor", "absorbing-set and attraction diagnostics");
  add_common(attr_cmd, common);
  attr_cmd->add_option("--ensemble", members, "ensemble size")->check(CLI::Range(1, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return validation;
  }

  try {
    if (*run_cmd) return cmd_run(common);
    if (*pair_cmd) return cmd_pair(common, delta);
    if (*sweep_cmd) return cmd_sweep(common, n_max);
    if (*verify_cmd) return cmd_verify(common);
    if (*attr_cmd) return cmd_attractor(common, members);
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return io;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid scenario: %s\n", e.what());
    return validation;
  } catch (const SimulationError& e) {
    std::fprintf(stderr, "simulation failed: %s\n", e.what());
    return check_failed;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return check_failed;
  }
  return ok;
}
