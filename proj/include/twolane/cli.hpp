#pragma once

/**
 * @brief Command-line front end: run, sweep, refine, diagnose, presets.
 *
 * Exit status: 0 success, 1 invalid input (config, model, arguments),
 * 2 runtime assertion (maximum principle, I/O).
 */

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "twolane/config.hpp"
#include "twolane/csv.hpp"
#include "twolane/harness.hpp"
#include "twolane/simulate.hpp"

namespace twolane {

/// Environment variable naming the default output directory.
inline constexpr const char* out_dir_env = "TWOLANE_OUT_DIR";

namespace detail {

inline std::string default_out_dir() {
  const char* env = std::getenv(out_dir_env);
  return env && *env ? std::string(env) : std::string(".");
}

inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  return f;
}

inline SimulationConfig resolve_config(const std::string& config_path, const std::string& preset) {
  if (!config_path.empty() && !preset.empty()) throw ConfigError("give either --config or --preset, not both");
  if (!config_path.empty()) return load_config(config_path);
  if (!preset.empty()) return scenario(preset);
  throw ConfigError("one of --config or --preset is required");
}

inline std::string snapshot_name(std::size_t k) {
  std::ostringstream s;
  s << "snapshot_" << std::setw(3) << std::setfill('0') << k << ".csv";
  return s.str();
}

struct DiagnoseReport {
  bool ok = true;
  std::vector<std::string> lines;

  void check(bool pass, const std::string& what) {
    ok = ok && pass;
    lines.push_back(std::string(pass ? "[PASS] " : "[FAIL] ") + what);
  }
};

inline DiagnoseReport diagnose(const SimulationConfig& c, RunResult& result) {
  RunOptions opts;
  opts.trace = true;
  if (c.model.is_local()) opts.entropy_levels = {0.1, 0.3, 0.5, 0.7, 0.9};
  result = run(c, opts);
  DiagnoseReport rep;
  std::ostringstream s;
  s.precision(6);

  double lo = 0.0, hi = 0.0;
  bool in_box = true;
  for (const auto& d : result.trace)
    for (int i = 0; i < n_lanes; ++i) {
      lo = std::min(lo, d.min[i]);
      hi = std::max(hi, d.max[i] - c.model.rho_max[i]);
      in_box = in_box && d.min[i] >= -bound_tolerance && d.max[i] <= c.model.rho_max[i] + bound_tolerance;
    }
  s << "maximum principle: min excursion " << lo << ", max excursion " << hi;
  rep.check(in_box, s.str());

  const double ledger = result.trace.back().mass_ledger_residual;
  s.str("");
  s << "mass ledger residual " << ledger << " (limit 1e-9)";
  rep.check(ledger <= 1e-9, s.str());

  if (!c.model.is_local()) {
    const double tv0 = result.trace.front().tv_w_sum;
    double sup_tv = 0.0, worst_ratio = 0.0;
    for (const auto& d : result.trace) {
      sup_tv = std::max(sup_tv, d.tv_w_sum);
      worst_ratio = std::max(worst_ratio, d.tv_w_sum / tv_bound(tv_bound_inputs(c.model, tv0, d.t)));
    }
    s.str("");
    s << "TV(W) bound: sup TV(W) = " << sup_tv << ", max TV(W)/bound = " << worst_ratio << " (limit 1.01)";
    rep.check(worst_ratio <= 1.01, s.str());
  }
  if (c.model.lane_change.bounds.h == 0.0) {
    double worst_increase = 0.0;
    for (std::size_t k = 1; k < result.snapshots.size(); ++k)
      worst_increase = std::max(worst_increase, result.snapshots[k].diag.tv_w_sum - result.snapshots[k - 1].diag.tv_w_sum);
    s.str("");
    s << "TV(W) non-increasing without lane changes: worst increase " << worst_increase << " (limit 1e-9)";
    rep.check(worst_increase <= 1e-9, s.str());
  }
  if (c.model.is_local()) {
    s.str("");
    s << "entropy residual (k = 0.1..0.9) " << result.entropy_residual_max << " (limit 1e-8)";
    rep.check(result.entropy_residual_max <= 1e-8, s.str());
  }
  return rep;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-lane nonlocal traffic balance laws: simulation and verification harness", "twolane"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir = detail::default_out_dir();
  std::vector<double> etas, times;
  std::vector<std::size_t> n_list;
  std::size_t n_cells = 0;
  double eta = 0.1;

  auto* presets_cmd = app.add_subcommand("presets", "List the scenario names");

  auto* run_cmd = app.add_subcommand("run", "Run one configuration and write snapshot + diagnostics CSVs");
  run_cmd->add_option("--config", config_path, "JSON configuration file");
  run_cmd->add_option("--preset", preset, "Scenario name instead of a config file");
  run_cmd->add_option("--out", out_dir, std::string("Output directory (default $") + out_dir_env + " or .)");

  auto* sweep_cmd = app.add_subcommand("sweep", "eta-sweep against the local reference; writes l1_table.csv and tv_table.csv");
  sweep_cmd->add_option("--preset", preset, "Scenario name");
  sweep_cmd->add_option("--config", config_path, "JSON configuration file");
  sweep_cmd->add_option("--etas", etas, "Comma-separated eta values (default: the scenario's list)")->delimiter(',');
  sweep_cmd->add_option("--times", times, "Comma-separated output times (default: the scenario's)")->delimiter(',');
  sweep_cmd->add_option("--n-cells", n_cells, "Cells (default: the scenario's)");
  sweep_cmd->add_option("--out", out_dir, "Output directory");

  auto* refine_cmd = app.add_subcommand("refine", "Self-convergence study; writes refinement.csv");
  refine_cmd->add_option("--preset", preset, "Scenario name");
  refine_cmd->add_option("--config", config_path, "JSON configuration file");
  refine_cmd->add_option("--n-cells", n_list, "Comma-separated nested resolutions")->delimiter(',')->required();
  refine_cmd->add_option("--eta", eta, "Nonlocal range (0 = local)");
  refine_cmd->add_option("--out", out_dir, "Output directory");

  auto* diag_cmd = app.add_subcommand("diagnose", "Run with full diagnostics and report the property checks");
  diag_cmd->add_option("--preset", preset, "Scenario name");
  diag_cmd->add_option("--config", config_path, "JSON configuration file");
  diag_cmd->add_option("--out", out_dir, "Also write diagnostics.csv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (presets_cmd->parsed()) {
      for (auto name : scenario_names) out << name << '\n';
      return 0;
    }
    if (run_cmd->parsed()) {
      const auto c = detail::resolve_config(config_path, preset);
      const auto result = run(c);
      for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
        auto f = detail::open_output(out_dir, detail::snapshot_name(k));
        write_snapshot_csv(f, result.snapshots[k], c.grid);
      }
      std::vector<DiagnosticsRecord> records;
      for (const auto& s : result.snapshots) records.push_back(s.diag);
      auto f = detail::open_output(out_dir, "diagnostics.csv");
      write_diagnostics_csv(f, records);
      out << "wrote " << result.snapshots.size() << " snapshots to " << out_dir << '\n';
      return 0;
    }
    if (sweep_cmd->parsed()) {
      auto c = detail::resolve_config(config_path, preset);
      if (n_cells) c = with_resolution(c, n_cells);
      if (!times.empty()) c.out_times = times;
      const auto list = etas.empty() ? c.eta_list : etas;
      const auto sweep = eta_sweep(c, list);
      auto l1 = detail::open_output(out_dir, "l1_table.csv");
      write_l1_table(l1, sweep.l1_table);
      auto tv = detail::open_output(out_dir, "tv_table.csv");
      write_tv_table(tv, sweep.tv_table);
      out << "wrote l1_table.csv (" << sweep.l1_table.size() << " rows) and tv_table.csv to " << out_dir << '\n';
      return 0;
    }
    if (refine_cmd->parsed()) {
      const auto c = detail::resolve_config(config_path, preset);
      const auto rows = refinement_study(c, n_list, eta);
      auto f = detail::open_output(out_dir, "refinement.csv");
      write_refinement_table(f, rows);
      write_refinement_table(out, rows);
      return 0;
    }
    if (diag_cmd->parsed()) {
      const auto c = detail::resolve_config(config_path, preset);
      RunResult result;
      const auto rep = detail::diagnose(c, result);
      for (const auto& line : rep.lines) out << line << '\n';
      if (diag_cmd->count("--out")) {
        auto f = detail::open_output(out_dir, "diagnostics.csv");
        write_diagnostics_csv(f, result.trace);
      }
      return rep.ok ? 0 : 2;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const BoundViolation& e) {
    err << "runtime assertion: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace twolane
