#pragma once

/**
 * @brief Shared domain types: the uniform 1-D mesh, the two-lane state,
 * velocity laws, the lane-change rate and the assembled model.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "twolane/errors.hpp"

namespace twolane {

inline constexpr int n_lanes = 2;

/// Uniform mesh of [x_min, x_max] with n_cells cells.
class Grid {
 public:
  Grid() : Grid(-4.0, 4.0, 1600) {}

  Grid(double x_min, double x_max, std::size_t n_cells)
      : x_min_(x_min), x_max_(x_max), n_cells_(n_cells), dx_((x_max - x_min) / static_cast<double>(n_cells)) {
    if (!(x_max > x_min)) throw std::invalid_argument("Grid: x_max must exceed x_min");
    if (n_cells < 2) throw std::invalid_argument("Grid: n_cells must be at least 2");
    if (!(dx_ > 0.0) || !std::isfinite(dx_)) throw std::invalid_argument("Grid: degenerate cell width");
  }

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t n_cells() const { return n_cells_; }
  double dx() const { return dx_; }
  double length() const { return x_max_ - x_min_; }

  double cell_center(std::size_t j) const { return x_min_ + (static_cast<double>(j) + 0.5) * dx_; }
  /// Left edge of cell j; interface(n_cells) is x_max.
  double interface(std::size_t j) const { return x_min_ + static_cast<double>(j) * dx_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_cells_;
  double dx_;
};

/// Cell averages of both lane densities at time t. rho[0] is lane 1.
struct LaneState {
  std::array<std::vector<double>, n_lanes> rho;
  double t = 0.0;

  LaneState() = default;
  explicit LaneState(std::size_t n_cells, double t0 = 0.0) : rho{std::vector<double>(n_cells, 0.0), std::vector<double>(n_cells, 0.0)}, t(t0) {}
  LaneState(std::vector<double> rho1, std::vector<double> rho2, double t0 = 0.0) : rho{std::move(rho1), std::move(rho2)}, t(t0) {
    if (rho[0].size() != rho[1].size()) throw std::invalid_argument("LaneState: lane arrays differ in length");
  }

  std::size_t n_cells() const { return rho[0].size(); }
  const std::vector<double>& rho1() const { return rho[0]; }
  const std::vector<double>& rho2() const { return rho[1]; }
};

enum class Anchoring { cell, interface };

/// Values of the nonlocal operator for both lanes.
struct NonlocalField {
  std::array<std::vector<double>, n_lanes> w;
  Anchoring anchoring = Anchoring::cell;
  double eta = 0.0;

  bool empty() const { return w[0].empty(); }
};

enum class VelocityFamily { greenshields, custom };

/// Speed as a function of density for one lane, with its derivative.
struct VelocityLaw {
  VelocityFamily family = VelocityFamily::custom;
  double v_free = 0.0;
  double rho_ref = 0.0;
  std::function<double(double)> evaluate;
  std::function<double(double)> derivative;

  double operator()(double rho) const { return evaluate(rho); }
};

/// Bounds on the lane-change rate and its partial derivatives, supplied by
/// the caller: sup|H|, sup|dH/dw1|, sup|dH/dw2| and sup_w TV_x H(w, .).
struct RateBounds {
  double h = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
  double h_bv = 0.0;
};

/// Lane-change rate H(w1, w2, x) >= 0.
struct LaneChange {
  std::function<double(double, double, double)> rate;
  RateBounds bounds;
  std::string description;

  double operator()(double w1, double w2, double x) const { return rate(w1, w2, x); }
};

enum class BoundaryPolicy { outflow_extrapolation };

struct ModelSpec {
  std::array<VelocityLaw, n_lanes> velocity;
  std::array<double, n_lanes> rho_max{1.0, 1.0};
  LaneChange lane_change;
  /// eta == 0 selects the local model.
  double eta = 0.0;
  BoundaryPolicy boundary = BoundaryPolicy::outflow_extrapolation;

  bool is_local() const { return eta == 0.0; }
  double rho_max_norm() const { return std::max(rho_max[0], rho_max[1]); }
};

struct Violation {
  std::string assumption;
  std::string detail;

  std::string message() const { return assumption + ": " + detail; }
};

inline constexpr std::size_t validation_samples = 1024;

/// Sampled check of the structural model assumptions. The lane-change rate
/// is sampled for x in [x_lo, x_hi].
inline std::vector<Violation> validate_model(const ModelSpec& spec, double x_lo, double x_hi) {
  std::vector<Violation> out;
  auto report = [&](std::string assumption, std::string detail) { out.push_back({std::move(assumption), std::move(detail)}); };

  if (!(spec.eta >= 0.0) || !std::isfinite(spec.eta)) report("Nonlocal impact", "eta must be >= 0");

  bool rho_max_ok = true;
  for (int i = 0; i < n_lanes; ++i) {
    if (!(spec.rho_max[i] > 0.0) || !std::isfinite(spec.rho_max[i])) {
      report("Maximum lane densities", "rho_max of lane " + std::to_string(i + 1) + " must be positive");
      rho_max_ok = false;
    }
  }
  if (!rho_max_ok) return out;

  for (int i = 0; i < n_lanes; ++i) {
    const auto& v = spec.velocity[i];
    const std::string lane = "lane " + std::to_string(i + 1);
    if (!v.evaluate || !v.derivative) {
      report("Lane-wise velocities", lane + " has no velocity function");
      continue;
    }
    bool increasing = false;
    bool negative = false;
    for (std::size_t s = 0; s < validation_samples; ++s) {
      const double rho = spec.rho_max[i] * static_cast<double>(s) / static_cast<double>(validation_samples - 1);
      const double dv = v.derivative(rho);
      const double val = v.evaluate(rho);
      if (!increasing && !(dv <= 0.0)) {
        std::ostringstream msg;
        msg << "V' > 0 detected (" << lane << ", rho = " << rho << ", V' = " << dv << ")";
        report("Lane-wise velocities", msg.str());
        increasing = true;
      }
      if (!negative && !(val >= 0.0)) {
        std::ostringstream msg;
        msg << "V < 0 detected (" << lane << ", rho = " << rho << ", V = " << val << "); the upwind scheme needs V >= 0";
        report("Lane-wise velocities", msg.str());
        negative = true;
      }
    }
  }

  const auto& h = spec.lane_change;
  if (!h.rate) {
    report("RHS, lane changing", "no lane-change rate");
    return out;
  }
  const auto& b = h.bounds;
  if (!(b.h >= 0.0 && b.h1 >= 0.0 && b.h2 >= 0.0 && b.h_bv >= 0.0)) report("RHS, lane changing", "rate bounds must be nonnegative");

  constexpr std::size_t nw = 33;
  const double wmax = spec.rho_max_norm();
  const double dw = wmax / static_cast<double>(nw - 1);
  const double dxs = (x_hi - x_lo) / static_cast<double>(validation_samples - 1);
  const double slack = 1e-9;
  double sup_h = 0.0, sup_h1 = 0.0, sup_h2 = 0.0;
  bool negative = false;
  std::vector<double> row(nw * nw);
  std::vector<double> last(nw * nw);
  // Variation in x accumulated per (w1, w2) sample.
  std::vector<double> tv_x(nw * nw, 0.0);
  for (std::size_t s = 0; s < validation_samples; ++s) {
    const double x = x_lo + dxs * static_cast<double>(s);
    for (std::size_t a = 0; a < nw; ++a) {
      for (std::size_t c = 0; c < nw; ++c) {
        const double val = h(dw * static_cast<double>(a), dw * static_cast<double>(c), x);
        row[a * nw + c] = val;
        if (!negative && !(val >= 0.0)) {
          std::ostringstream msg;
          msg << "H < 0 detected (w1 = " << dw * a << ", w2 = " << dw * c << ", x = " << x << ", H = " << val << ")";
          report("RHS, lane changing", msg.str());
          negative = true;
        }
        sup_h = std::max(sup_h, std::abs(val));
        if (a > 0) sup_h1 = std::max(sup_h1, std::abs(val - row[(a - 1) * nw + c]) / dw);
        if (c > 0) sup_h2 = std::max(sup_h2, std::abs(val - row[a * nw + c - 1]) / dw);
        if (s > 0) tv_x[a * nw + c] += std::abs(val - last[a * nw + c]);
      }
    }
    std::swap(row, last);
  }
  double sup_tv = 0.0;
  for (double v : tv_x) sup_tv = std::max(sup_tv, v);

  auto check_bound = [&](const char* name, double supplied, double sampled) {
    if (sampled > supplied * (1.0 + slack) + slack) {
      std::ostringstream msg;
      msg << "supplied bound " << name << " = " << supplied << " is below the sampled value " << sampled;
      report("RHS, lane changing", msg.str());
    }
  };
  check_bound("H", b.h, sup_h);
  check_bound("H1", b.h1, sup_h1);
  check_bound("H2", b.h2, sup_h2);
  check_bound("H_BV", b.h_bv, sup_tv);
  return out;
}

inline std::vector<Violation> validate_model(const ModelSpec& spec) { return validate_model(spec, -10.0, 10.0); }

inline void require_valid(const ModelSpec& spec, const Grid& grid) {
  const auto violations = validate_model(spec, grid.x_min(), grid.x_max());
  if (violations.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& v : violations) msg += "\n  " + v.message();
  throw ModelError(msg);
}

inline constexpr double bound_tolerance = 1e-10;

/// Throws BoundViolation if any cell leaves [-tol, rho_max + tol].
inline void check_bounds(const LaneState& state, const std::array<double, n_lanes>& rho_max, double tol = bound_tolerance) {
  for (int i = 0; i < n_lanes; ++i) {
    const auto& r = state.rho[i];
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (!(r[j] >= -tol && r[j] <= rho_max[i] + tol)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "maximum principle violated: lane " << i + 1 << ", cell " << j << ", t = " << state.t << ", rho = " << r[j]
            << " outside [0, " << rho_max[i] << "]";
        throw BoundViolation(msg.str());
      }
    }
  }
}

}  // namespace twolane
