#pragma once

/**
 * @brief Measurements on lane states: total variation, the uniform TV bound
 * on the nonlocal field, discrete Kruzhkov entropy residuals, mass and L1
 * distances.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "twolane/core.hpp"
#include "twolane/models.hpp"
#include "twolane/scheme.hpp"

namespace twolane {

/// sum_j |a[j+1] - a[j]|.
inline double total_variation(std::span<const double> a) {
  double tv = 0.0;
  for (std::size_t j = 1; j < a.size(); ++j) tv += std::abs(a[j] - a[j - 1]);
  return tv;
}

/// Sum of per-lane variations (l1 vector norm).
inline double total_variation(const std::array<std::vector<double>, n_lanes>& lanes) {
  return total_variation(lanes[0]) + total_variation(lanes[1]);
}

struct TvBoundInputs {
  /// TV of the initial nonlocal field, summed over lanes.
  double tv0 = 0.0;
  std::array<double, n_lanes> rho_max{1.0, 1.0};
  RateBounds rate;
  double t = 0.0;
};

/// Uniform-in-eta bound on TV(W(t)):
///   (tv0 + 4 (|m|/m2 + |m|/m1 + 1) H_BV) * exp(2 t K),
///   K = |m| H1/m2 + H/m1 + |m| H1/m1 + 2 H1 + |m| H1/m1 + H/m2 + |m| H1/m2,
/// with m = rho_max and |m| its max norm.
inline double tv_bound(const TvBoundInputs& in) {
  const double m1 = in.rho_max[0];
  const double m2 = in.rho_max[1];
  const double m = std::max(m1, m2);
  const auto& r = in.rate;
  const double prefactor = in.tv0 + 4.0 * (m / m2 + m / m1 + 1.0) * r.h_bv;
  const double rate = m * r.h1 / m2 + r.h / m1 + m * r.h1 / m1 + 2.0 * r.h1 + m * r.h1 / m1 + r.h / m2 + m * r.h1 / m2;
  return prefactor * std::exp(2.0 * in.t * rate);
}

inline TvBoundInputs tv_bound_inputs(const ModelSpec& model, double tv0, double t) { return {tv0, model.rho_max, model.lane_change.bounds, t}; }

/// Per-cell Kruzhkov residual for alpha(u) = |u - k|:
///   (alpha(after) - alpha(before))/dt + (Q_{j+1/2} - Q_{j-1/2})/dx - sgn(after - k) s_j,
/// with Q(a, b) = F(a v k, b v k) - F(a ^ k, b ^ k) from the Godunov flux F and
/// s_j the lane's source (+S lane 1, -S lane 2) as evaluated by the scheme.
/// Nonpositive up to rounding for an entropy-admissible update.
inline std::array<std::vector<double>, n_lanes> entropy_residual_cells(const LaneState& before, const LaneState& after, const ModelSpec& model,
                                                                      const Grid& grid, double dt, double k) {
  const std::size_t n = before.n_cells();
  if (after.n_cells() != n || grid.n_cells() != n) throw std::invalid_argument("entropy_residual: grid mismatch");
  if (!(dt > 0.0)) throw std::invalid_argument("entropy_residual: dt must be positive");
  if (std::abs((after.t - before.t) - dt) > 1e-9 * std::max(1.0, std::abs(after.t))) throw std::invalid_argument("entropy_residual: states are not one step apart");

  std::array<std::vector<double>, n_lanes> w = before.rho;
  if (!model.is_local()) w = nonlocal_field(before, model, grid).w;
  const auto source = detail::source_column(before, w, model, grid);

  std::array<std::vector<double>, n_lanes> out;
  for (int i = 0; i < n_lanes; ++i) {
    const auto& law = model.velocity[i];
    const auto& u = before.rho[i];
    const auto& v = after.rho[i];
    auto q = [&](double a, double b) {
      return godunov_flux(std::max(a, k), std::max(b, k), law) - godunov_flux(std::min(a, k), std::min(b, k), law);
    };
    std::vector<double> qf(n + 1);
    qf[0] = q(u[0], u[0]);
    for (std::size_t j = 0; j + 1 < n; ++j) qf[j + 1] = q(u[j], u[j + 1]);
    qf[n] = q(u[n - 1], u[n - 1]);
    auto& r = out[i];
    r.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double s = i == 0 ? source[j] : -source[j];
      const double sgn = v[j] > k ? 1.0 : (v[j] < k ? -1.0 : 0.0);
      r[j] = (std::abs(v[j] - k) - std::abs(u[j] - k)) / dt + (qf[j + 1] - qf[j]) / grid.dx() - sgn * s;
    }
  }
  return out;
}

/// Largest per-cell residual, per lane.
inline std::array<double, n_lanes> entropy_residual(const LaneState& before, const LaneState& after, const ModelSpec& model, const Grid& grid,
                                                    double dt, double k) {
  const auto cells = entropy_residual_cells(before, after, model, grid, dt, k);
  std::array<double, n_lanes> out{};
  for (int i = 0; i < n_lanes; ++i) out[i] = *std::max_element(cells[i].begin(), cells[i].end());
  return out;
}

/// dx * sum_j max(r_j, 0) over both lanes: the step's entropy production in excess of admissibility.
inline double entropy_defect(const LaneState& before, const LaneState& after, const ModelSpec& model, const Grid& grid, double dt, double k) {
  double acc = 0.0;
  for (const auto& lane : entropy_residual_cells(before, after, model, grid, dt, k))
    for (double r : lane) acc += std::max(r, 0.0);
  return acc * grid.dx();
}

struct L1Distance {
  std::array<double, n_lanes> lane{};
  double sum = 0.0;
};

/// sum_j |a - b| dx per lane and summed.
inline L1Distance l1_distance(const LaneState& a, const LaneState& b, const Grid& grid) {
  if (a.n_cells() != grid.n_cells() || b.n_cells() != grid.n_cells()) throw std::invalid_argument("l1_distance: grid mismatch");
  L1Distance d;
  for (int i = 0; i < n_lanes; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.n_cells(); ++j) acc += std::abs(a.rho[i][j] - b.rho[i][j]);
    d.lane[i] = acc * grid.dx();
  }
  d.sum = d.lane[0] + d.lane[1];
  return d;
}

inline double total_mass(const LaneState& s, const Grid& grid) {
  double acc = 0.0;
  for (int i = 0; i < n_lanes; ++i)
    for (double r : s.rho[i]) acc += r;
  return acc * grid.dx();
}

struct DiagnosticsRecord {
  double t = 0.0;
  std::array<double, n_lanes> tv_rho{};
  std::array<double, n_lanes> tv_w{};
  double tv_w_sum = 0.0;
  double mass_total = 0.0;
  /// Accumulated |mass change - boundary flux budget| since t = 0.
  double mass_ledger_residual = 0.0;
  std::array<double, n_lanes> min{};
  std::array<double, n_lanes> max{};
  /// Largest entropy residual seen since the previous record (NaN when not measured).
  double entropy_residual_max = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> l1_vs_reference;

  double tv_rho_sum() const { return tv_rho[0] + tv_rho[1]; }
};

/// Snapshot measurements; W is the cell-anchored field (W = rho for the local model).
inline DiagnosticsRecord measure(const LaneState& state, const ModelSpec& model, const Grid& grid) {
  DiagnosticsRecord d;
  d.t = state.t;
  const auto w = model.is_local() ? state.rho : nonlocal_field(state, model, grid).w;
  for (int i = 0; i < n_lanes; ++i) {
    d.tv_rho[i] = total_variation(state.rho[i]);
    d.tv_w[i] = total_variation(w[i]);
    const auto [lo, hi] = std::minmax_element(state.rho[i].begin(), state.rho[i].end());
    d.min[i] = *lo;
    d.max[i] = *hi;
  }
  d.tv_w_sum = d.tv_w[0] + d.tv_w[1];
  d.mass_total = total_mass(state, grid);
  return d;
}

}  // namespace twolane
