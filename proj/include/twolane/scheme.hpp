#pragma once

/**
 * @brief First-order finite-volume updates.
 *
 * Nonlocal model: interface flux rho_j * V(W_{j+1/2}) where W_{j+1/2} only
 * sees cells strictly downstream of the interface. Local model: Godunov flux.
 * The lane-change source is added in the same explicit update, +S to lane 1
 * and -S to lane 2. Both ends use zero-order extrapolation ghost cells.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "twolane/core.hpp"
#include "twolane/models.hpp"
#include "twolane/nonlocal.hpp"

namespace twolane {

/// Boundary fluxes of one step, per lane: what entered at x_min and left at x_max.
struct BoundaryFluxes {
  std::array<double, n_lanes> inflow{};
  std::array<double, n_lanes> outflow{};
};

/// sup of V_i over [0, rho_max_i], maximised over lanes.
inline double max_wave_speed(const ModelSpec& model) {
  double vmax = 0.0;
  for (int i = 0; i < n_lanes; ++i) {
    const auto& v = model.velocity[i];
    for (std::size_t s = 0; s < validation_samples; ++s) {
      const double rho = model.rho_max[i] * static_cast<double>(s) / static_cast<double>(validation_samples - 1);
      vmax = std::max(vmax, std::abs(v(rho)));
    }
  }
  return vmax;
}

/// Largest explicit source step keeping the update inside the box: 1 / (2 H max_i 1/rho_max_i).
inline double source_time_limit(const ModelSpec& model) {
  const double h = model.lane_change.bounds.h;
  if (h == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (2.0 * h * std::max(1.0 / model.rho_max[0], 1.0 / model.rho_max[1]));
}

inline bool has_dynamics(const ModelSpec& model) { return max_wave_speed(model) > 0.0 || model.lane_change.bounds.h > 0.0; }

/// dt = cfl * min(dx / sup V, source limit), never more than `remaining`.
/// A model with no dynamics gets dt = remaining.
inline double cfl_dt([[maybe_unused]] const LaneState& state, const ModelSpec& model, const Grid& grid, double cfl,
                     double remaining = std::numeric_limits<double>::infinity()) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl_dt: cfl must lie in (0, 1]");
  const double vmax = max_wave_speed(model);
  const double convective = vmax > 0.0 ? grid.dx() / vmax : std::numeric_limits<double>::infinity();
  const double limit = std::min(convective, source_time_limit(model));
  if (!std::isfinite(limit)) return remaining;
  return std::min(cfl * limit, remaining);
}

/// Godunov flux for f(u) = u V(u): min of f over [ul, ur] if ul <= ur, else max over [ur, ul].
inline double godunov_flux(double ul, double ur, const VelocityLaw& law) {
  const double top = law.rho_ref;
  constexpr double tol = 1e-10;
  if (!(ul >= -tol && ul <= top + tol && ur >= -tol && ur <= top + tol)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "godunov_flux: states (" << ul << ", " << ur << ") outside [0, " << top << "]";
    throw BoundViolation(msg.str());
  }
  auto f = [&law](double u) { return u * law(u); };
  const double fl = f(ul);
  const double fr = f(ur);
  if (ul == ur) return fl;

  // Stationary point of f: closed form for affine V, golden-section search otherwise.
  double sigma;
  if (law.family == VelocityFamily::greenshields) {
    sigma = 0.5 * law.rho_ref;
  } else {
    constexpr double g = 0.6180339887498949;
    double a = 0.0, b = top;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, top); ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = f(d);
      }
    }
    sigma = 0.5 * (a + b);
  }
  const double lo = std::min(ul, ur);
  const double hi = std::max(ul, ur);
  const bool interior = sigma > lo && sigma < hi;
  if (ul < ur) {
    double m = std::min(fl, fr);
    if (interior) m = std::min(m, f(sigma));
    return m;
  }
  double m = std::max(fl, fr);
  if (interior) m = std::max(m, f(sigma));
  return m;
}

namespace detail {

/// Source rate of every cell for lane 1 (lane 2 receives its negation).
inline std::vector<double> source_column(const LaneState& state, const std::array<std::vector<double>, n_lanes>& w, const ModelSpec& model,
                                         const Grid& grid) {
  const std::size_t n = state.n_cells();
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j)
    s[j] = source_rate(state.rho[0][j], state.rho[1][j], w[0][j], w[1][j], grid.cell_center(j), model);
  return s;
}

/// Conservative update given the n+1 interface fluxes of each lane.
inline LaneState apply_update(const LaneState& state, const std::array<std::vector<double>, n_lanes>& flux, const std::vector<double>& source,
                              const ModelSpec& model, double dx, double dt, BoundaryFluxes* boundary) {
  const std::size_t n = state.n_cells();
  const double lambda = dt / dx;
  LaneState next(n, state.t + dt);
  for (int i = 0; i < n_lanes; ++i) {
    const auto& r = state.rho[i];
    const auto& f = flux[i];
    auto& out = next.rho[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double exchange = i == 0 ? dt * source[j] : -(dt * source[j]);
      out[j] = r[j] - lambda * (f[j + 1] - f[j]) + exchange;
    }
    if (boundary) {
      boundary->inflow[i] = f[0];
      boundary->outflow[i] = f[n];
    }
  }
  check_bounds(next, model.rho_max);
  return next;
}

inline void check_step(const LaneState& state, const Grid& grid, double dt) {
  if (state.n_cells() != grid.n_cells()) throw std::invalid_argument("step: state does not match the grid");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("step: dt must be positive");
}

}  // namespace detail

/// Cell-anchored nonlocal field of a state (right tail continued by the last cell).
inline NonlocalField nonlocal_field(const LaneState& state, const ModelSpec& model, const Grid& grid, Anchoring anchoring = Anchoring::cell) {
  const auto kw = kernel_weights(grid.dx(), model.eta);
  NonlocalField field;
  field.anchoring = anchoring;
  field.eta = model.eta;
  for (int i = 0; i < n_lanes; ++i) {
    const auto& r = state.rho[i];
    field.w[i] = anchoring == Anchoring::cell ? eval_cell_anchored(r, kw) : eval_interface_anchored(r, kw);
  }
  return field;
}

/// One explicit step of the nonlocal system (eta > 0).
inline LaneState nonlocal_step(const LaneState& state, const ModelSpec& model, const Grid& grid, double dt, BoundaryFluxes* boundary = nullptr) {
  if (!(model.eta > 0.0)) throw std::invalid_argument("nonlocal_step: eta must be > 0; use local_step for eta = 0");
  detail::check_step(state, grid, dt);
  const std::size_t n = state.n_cells();
  const auto kw = kernel_weights(grid.dx(), model.eta);

  std::array<std::vector<double>, n_lanes> w_cell;
  std::array<std::vector<double>, n_lanes> flux;
  for (int i = 0; i < n_lanes; ++i) {
    const auto& r = state.rho[i];
    const auto& v = model.velocity[i];
    w_cell[i] = eval_cell_anchored(r, kw);
    const auto w_half = eval_interface_anchored(r, kw);
    auto& f = flux[i];
    f.resize(n + 1);
    // Ghost cell left of x_min carries rho[0]; downstream of x_min is W at the left edge of cell 0.
    f[0] = r[0] * v(w_cell[i][0]);
    for (std::size_t j = 0; j < n; ++j) f[j + 1] = r[j] * v(w_half[j]);
  }
  const auto source = detail::source_column(state, w_cell, model, grid);
  return detail::apply_update(state, flux, source, model, grid.dx(), dt, boundary);
}

/// Local-model step with an arbitrary two-point flux(ul, ur, law).
template <typename Flux>
LaneState local_step_with(const LaneState& state, const ModelSpec& model, const Grid& grid, double dt, Flux&& two_point,
                          BoundaryFluxes* boundary = nullptr) {
  detail::check_step(state, grid, dt);
  const std::size_t n = state.n_cells();
  std::array<std::vector<double>, n_lanes> flux;
  for (int i = 0; i < n_lanes; ++i) {
    const auto& r = state.rho[i];
    const auto& law = model.velocity[i];
    auto& f = flux[i];
    f.resize(n + 1);
    f[0] = two_point(r[0], r[0], law);
    for (std::size_t j = 0; j + 1 < n; ++j) f[j + 1] = two_point(r[j], r[j + 1], law);
    f[n] = two_point(r[n - 1], r[n - 1], law);
  }
  const auto source = detail::source_column(state, state.rho, model, grid);
  return detail::apply_update(state, flux, source, model, grid.dx(), dt, boundary);
}

/// One Godunov step of the local system; the source sees w = rho.
inline LaneState local_step(const LaneState& state, const ModelSpec& model, const Grid& grid, double dt, BoundaryFluxes* boundary = nullptr) {
  return local_step_with(state, model, grid, dt, [](double a, double b, const VelocityLaw& law) { return godunov_flux(a, b, law); }, boundary);
}

inline LaneState step(const LaneState& state, const ModelSpec& model, const Grid& grid, double dt, BoundaryFluxes* boundary = nullptr) {
  return model.is_local() ? local_step(state, model, grid, dt, boundary) : nonlocal_step(state, model, grid, dt, boundary);
}

}  // namespace twolane
