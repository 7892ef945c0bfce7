#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "twolane/core.hpp"
#include "twolane/diagnostics.hpp"
#include "twolane/models.hpp"
#include "twolane/scheme.hpp"

namespace twolane {

struct Snapshot {
  LaneState state;
  /// Cell-anchored W; empty for the local model.
  NonlocalField w;
  DiagnosticsRecord diag;
};

struct StepEvent {
  const LaneState& before;
  const LaneState& after;
  double dt;
  const BoundaryFluxes& fluxes;
};

struct RunOptions {
  /// Record diagnostics after every step, not just at output times.
  bool trace = false;
  /// Kruzhkov levels k checked on every step; empty disables the measurement.
  std::vector<double> entropy_levels;
  std::function<void(const StepEvent&)> on_step;
};

struct RunResult {
  std::vector<Snapshot> snapshots;
  std::vector<DiagnosticsRecord> trace;
  std::size_t steps = 0;
  /// Worst per-step ledger residual relative to the mass before the step.
  double max_step_ledger_rel = 0.0;
  double entropy_residual_max = std::numeric_limits<double>::quiet_NaN();
  /// Space-time integral of the positive residual part, largest over the levels.
  double entropy_defect = std::numeric_limits<double>::quiet_NaN();

  const Snapshot& final_snapshot() const { return snapshots.back(); }
};

inline Snapshot make_snapshot(const LaneState& state, const ModelSpec& model, const Grid& grid) {
  Snapshot s{state, {}, measure(state, model, grid)};
  if (!model.is_local()) s.w = nonlocal_field(state, model, grid);
  return s;
}

/// Advances the configured initial datum through every output time.
/// Snapshot 0 is the initial state. Deterministic for a given config.
inline RunResult run(const SimulationConfig& config, const RunOptions& options = {}) {
  const auto& grid = config.grid;
  const auto& model = config.model;
  require_valid(model, grid);
  for (std::size_t k = 0; k < config.out_times.size(); ++k) {
    if (!(config.out_times[k] >= 0.0) || !std::isfinite(config.out_times[k])) throw std::invalid_argument("run: output times must be finite and >= 0");
    if (k > 0 && config.out_times[k] < config.out_times[k - 1]) throw std::invalid_argument("run: output times must be sorted");
  }
  if (!(config.max_dt > 0.0)) throw std::invalid_argument("run: max_dt must be positive");

  LaneState state = config.initial_state();
  check_bounds(state, model.rho_max);

  RunResult result;
  double ledger = 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double entropy_since_snapshot = nan;
  std::vector<double> defect(options.entropy_levels.size(), 0.0);
  auto note_entropy = [](double& acc, double value) { acc = std::isnan(acc) ? value : std::max(acc, value); };

  result.snapshots.push_back(make_snapshot(state, model, grid));
  if (options.trace) result.trace.push_back(result.snapshots.back().diag);

  for (const double target : config.out_times) {
    const double landing_tol = 1e-12 * std::max(1.0, std::abs(target));
    while (state.t < target - landing_tol) {
      const double remaining = target - state.t;
      double dt = std::min(cfl_dt(state, model, grid, config.cfl, remaining), config.max_dt);
      const bool lands = state.t + dt >= target - landing_tol;
      if (lands) dt = remaining;

      BoundaryFluxes fluxes;
      LaneState next = step(state, model, grid, dt, &fluxes);
      if (lands) next.t = target;

      const double m0 = total_mass(state, grid);
      const double m1 = total_mass(next, grid);
      double budget = 0.0;
      for (int i = 0; i < n_lanes; ++i) budget += fluxes.inflow[i] - fluxes.outflow[i];
      const double residual = std::abs((m1 - m0) - dt * budget);
      ledger += residual;
      result.max_step_ledger_rel = std::max(result.max_step_ledger_rel, residual / std::max(m0, std::numeric_limits<double>::min()));

      double entropy_step = nan;
      for (std::size_t l = 0; l < options.entropy_levels.size(); ++l) {
        const auto cells = entropy_residual_cells(state, next, model, grid, dt, options.entropy_levels[l]);
        double positive = 0.0;
        for (const auto& lane : cells)
          for (double r : lane) {
            note_entropy(entropy_step, r);
            positive += std::max(r, 0.0);
          }
        defect[l] += positive * grid.dx() * dt;
      }
      if (!std::isnan(entropy_step)) {
        note_entropy(entropy_since_snapshot, entropy_step);
        note_entropy(result.entropy_residual_max, entropy_step);
      }
      if (options.on_step) options.on_step(StepEvent{state, next, dt, fluxes});

      state = std::move(next);
      ++result.steps;
      if (options.trace) {
        auto d = measure(state, model, grid);
        d.mass_ledger_residual = ledger;
        d.entropy_residual_max = entropy_step;
        result.trace.push_back(d);
      }
    }
    state.t = target;
    result.snapshots.push_back(make_snapshot(state, model, grid));
    result.snapshots.back().diag.mass_ledger_residual = ledger;
    result.snapshots.back().diag.entropy_residual_max = entropy_since_snapshot;
    entropy_since_snapshot = nan;
  }
  if (!defect.empty()) result.entropy_defect = *std::max_element(defect.begin(), defect.end());
  return result;
}

}  // namespace twolane
