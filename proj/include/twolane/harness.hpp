#pragma once

/**
 * @brief Experiment drivers: eta-sweeps against the local reference,
 * grid-refinement studies and the uniform-state ODE check.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "twolane/diagnostics.hpp"
#include "twolane/models.hpp"
#include "twolane/simulate.hpp"

namespace twolane {

struct L1Row {
  double eta = 0.0;
  double t = 0.0;
  std::array<double, n_lanes> l1{};
  double l1_sum = 0.0;
};

struct TvRow {
  double eta = 0.0;
  double t = 0.0;
  double tv_w_sum = 0.0;
  double tv_rho_sum = 0.0;
  double bound = 0.0;
};

struct SweepMember {
  double eta = 0.0;
  RunResult result;
};

struct SweepResult {
  std::vector<double> eta_list;
  Grid grid;
  /// Local reference (eta = 0), always present.
  SweepMember reference;
  /// One member per eta_list entry, descending eta.
  std::vector<SweepMember> members;
  std::vector<L1Row> l1_table;
  std::vector<TvRow> tv_table;

  const SweepMember& member(double eta) const {
    for (const auto& m : members)
      if (m.eta == eta) return m;
    throw std::out_of_range("no sweep member for eta = " + std::to_string(eta));
  }
};

namespace detail {

inline RunResult run_member(const SimulationConfig& base, double eta) {
  RunOptions opts;
  opts.trace = true;
  try {
    return run(with_eta(base, eta), opts);
  } catch (const BoundViolation& e) {
    throw BoundViolation("eta = " + std::to_string(eta) + ": " + e.what());
  } catch (const ModelError& e) {
    throw ModelError("eta = " + std::to_string(eta) + ": " + e.what());
  }
}

}  // namespace detail

/// Runs every eta in eta_list plus the local reference on one shared grid and
/// tabulates L1 distances to the reference at each output time and the TV
/// curves. Members run concurrently when `parallel` is set; results do not
/// depend on it.
inline SweepResult eta_sweep(const SimulationConfig& base, std::vector<double> eta_list, bool parallel = true) {
  if (eta_list.empty()) throw std::invalid_argument("eta_sweep: eta_list must not be empty");
  for (double e : eta_list)
    if (!(e >= 0.0) || !std::isfinite(e)) throw std::invalid_argument("eta_sweep: eta values must be >= 0");
  std::sort(eta_list.begin(), eta_list.end(), std::greater<>());
  eta_list.erase(std::unique(eta_list.begin(), eta_list.end()), eta_list.end());

  SweepResult out;
  out.eta_list = eta_list;
  out.grid = base.grid;

  std::vector<double> jobs{0.0};
  for (double e : eta_list)
    if (e != 0.0) jobs.push_back(e);
  std::vector<RunResult> results(jobs.size());
  if (parallel) {
    std::vector<std::future<RunResult>> futures;
    for (double e : jobs) futures.push_back(std::async(std::launch::async, detail::run_member, std::cref(base), e));
    for (std::size_t k = 0; k < jobs.size(); ++k) results[k] = futures[k].get();
  } else {
    for (std::size_t k = 0; k < jobs.size(); ++k) results[k] = detail::run_member(base, jobs[k]);
  }
  out.reference = {0.0, std::move(results[0])};
  for (double e : eta_list) {
    if (e == 0.0) {
      out.members.push_back(out.reference);
    } else {
      const auto at = std::find(jobs.begin(), jobs.end(), e) - jobs.begin();
      out.members.push_back({e, std::move(results[static_cast<std::size_t>(at)])});
    }
  }

  const auto& ref_snaps = out.reference.result.snapshots;
  for (const auto& m : out.members) {
    const auto& snaps = m.result.snapshots;
    for (std::size_t k = 1; k < snaps.size(); ++k) {
      const auto d = l1_distance(snaps[k].state, ref_snaps[k].state, out.grid);
      out.l1_table.push_back({m.eta, snaps[k].state.t, d.lane, d.sum});
    }
  }
  std::stable_sort(out.l1_table.begin(), out.l1_table.end(), [](const L1Row& a, const L1Row& b) { return a.t < b.t; });
  std::stable_sort(out.l1_table.begin(), out.l1_table.end(), [](const L1Row& a, const L1Row& b) { return a.eta > b.eta; });

  for (const auto& m : out.members) {
    const auto& trace = m.result.trace;
    if (trace.empty()) continue;
    const double tv0 = trace.front().tv_w_sum;
    const auto model = with_eta(base, m.eta).model;
    for (const auto& d : trace) out.tv_table.push_back({m.eta, d.t, d.tv_w_sum, d.tv_rho_sum(), tv_bound(tv_bound_inputs(model, tv0, d.t))});
  }
  return out;
}

/// Preset sweep at a given resolution and set of output times.
inline SweepResult eta_sweep(std::string_view preset, const std::vector<double>& eta_list, std::size_t n_cells, const std::vector<double>& out_times,
                             bool parallel = true) {
  auto base = with_out_times(with_resolution(scenario(preset), n_cells), out_times);
  return eta_sweep(base, eta_list, parallel);
}

/// Restriction by averaging `factor` consecutive cells.
inline std::vector<double> coarsen(const std::vector<double>& fine, std::size_t factor) {
  if (factor == 0 || fine.size() % factor != 0) throw std::invalid_argument("coarsen: factor must divide the cell count");
  std::vector<double> out(fine.size() / factor);
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < factor; ++k) acc += fine[j * factor + k];
    out[j] = acc / static_cast<double>(factor);
  }
  return out;
}

struct RefinementRow {
  std::size_t n_cells = 0;
  double dx = 0.0;
  /// L1 error (both lanes summed); NaN for the first self-convergence level.
  double error = std::numeric_limits<double>::quiet_NaN();
  /// log2 of the previous error over this one; NaN when undefined.
  double order = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void check_nested(const std::vector<std::size_t>& n_list) {
  if (n_list.size() < 2) throw std::invalid_argument("refinement: need at least two resolutions");
  for (std::size_t k = 1; k < n_list.size(); ++k) {
    if (n_list[k] <= n_list[k - 1]) throw std::invalid_argument("refinement: n_cells_list must be strictly increasing");
    if (n_list[k] % n_list[k - 1] != 0) throw std::invalid_argument("refinement: non-nested grids (each n_cells must divide the next)");
  }
}

inline void fill_orders(std::vector<RefinementRow>& rows) {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double prev = rows[k - 1].error;
    const double cur = rows[k].error;
    if (prev > 0.0 && cur > 0.0 && std::isfinite(prev) && std::isfinite(cur))
      rows[k].order = std::log(prev / cur) / std::log(static_cast<double>(rows[k].n_cells) / static_cast<double>(rows[k - 1].n_cells));
  }
}

inline LaneState final_state(const SimulationConfig& c) { return run(c).final_snapshot().state; }

}  // namespace detail

/// Self-convergence: level k is compared with level k-1 after conservative
/// coarsening, at the last output time.
inline std::vector<RefinementRow> refinement_study(const SimulationConfig& base, const std::vector<std::size_t>& n_cells_list, double fixed_eta) {
  detail::check_nested(n_cells_list);
  const auto cfg = with_eta(base, fixed_eta);
  std::vector<RefinementRow> rows;
  LaneState coarse;
  for (std::size_t k = 0; k < n_cells_list.size(); ++k) {
    const auto c = with_resolution(cfg, n_cells_list[k]);
    const LaneState fine = detail::final_state(c);
    RefinementRow row{n_cells_list[k], c.grid.dx()};
    if (k > 0) {
      const std::size_t factor = n_cells_list[k] / n_cells_list[k - 1];
      double err = 0.0;
      const double dx_coarse = c.grid.dx() * static_cast<double>(factor);
      for (int i = 0; i < n_lanes; ++i) {
        const auto restricted = coarsen(fine.rho[i], factor);
        for (std::size_t j = 0; j < restricted.size(); ++j) err += std::abs(restricted[j] - coarse.rho[i][j]) * dx_coarse;
      }
      row.error = err;
    }
    rows.push_back(row);
    coarse = fine;
  }
  detail::fill_orders(rows);
  return rows;
}

inline std::vector<RefinementRow> refinement_study(std::string_view preset, const std::vector<std::size_t>& n_cells_list, double fixed_eta) {
  return refinement_study(scenario(preset), n_cells_list, fixed_eta);
}

/// Error against an exact solution given as cell averages exact(lane, a, b, t).
using ExactAverage = std::function<double(int lane, double a, double b, double t)>;

inline std::vector<RefinementRow> refinement_vs_exact(const SimulationConfig& base, const std::vector<std::size_t>& n_cells_list, double fixed_eta,
                                                      const ExactAverage& exact) {
  detail::check_nested(n_cells_list);
  const auto cfg = with_eta(base, fixed_eta);
  std::vector<RefinementRow> rows;
  for (const std::size_t n : n_cells_list) {
    const auto c = with_resolution(cfg, n);
    const LaneState u = detail::final_state(c);
    double err = 0.0;
    for (int i = 0; i < n_lanes; ++i)
      for (std::size_t j = 0; j < n; ++j) err += std::abs(u.rho[i][j] - exact(i, c.grid.interface(j), c.grid.interface(j + 1), u.t)) * c.grid.dx();
    rows.push_back({n, c.grid.dx(), err});
  }
  detail::fill_orders(rows);
  return rows;
}

struct OdeRow {
  double dt = 0.0;
  double max_error = 0.0;
};

/// Uniform two-lane state with H = 1: rho1 - rho2 = 0.2 exp(-2t) exactly.
/// Reports the largest deviation over all steps and cells for each dt.
inline std::vector<OdeRow> ode_oracle_check(double t_final, const std::vector<double>& dt_list) {
  std::vector<OdeRow> rows;
  for (const double dt : dt_list) {
    if (!(dt > 0.0)) throw std::invalid_argument("ode_oracle_check: dt must be positive");
    auto c = scenario("uniform_ode");
    c.out_times = {t_final};
    c.max_dt = dt;
    double worst = 0.0;
    RunOptions opts;
    opts.on_step = [&worst](const StepEvent& e) {
      const double exact = 0.2 * std::exp(-2.0 * e.after.t);
      for (std::size_t j = 0; j < e.after.n_cells(); ++j) worst = std::max(worst, std::abs(e.after.rho[0][j] - e.after.rho[1][j] - exact));
    };
    run(c, opts);
    rows.push_back({dt, worst});
  }
  return rows;
}

}  // namespace twolane
