#pragma once

/**
 * @brief Concrete velocity laws, the lane-change source term, initial data
 * profiles and the named scenario catalogue.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "twolane/core.hpp"

namespace twolane {

/// V(rho) = v_free (1 - rho / rho_ref).
inline VelocityLaw greenshields(double v_free, double rho_ref) {
  if (!(v_free > 0.0)) throw ModelError("greenshields: v_free must be positive");
  if (!(rho_ref > 0.0)) throw ModelError("greenshields: rho_ref must be positive");
  VelocityLaw law;
  law.family = VelocityFamily::greenshields;
  law.v_free = v_free;
  law.rho_ref = rho_ref;
  law.evaluate = [v_free, rho_ref](double rho) { return v_free * (1.0 - rho / rho_ref); };
  law.derivative = [v_free, rho_ref](double) { return -v_free / rho_ref; };
  return law;
}

/// Arbitrary user law; rho_ref is the density range the law is used on.
inline VelocityLaw custom_velocity(std::function<double(double)> v, std::function<double(double)> dv, double rho_ref) {
  VelocityLaw law;
  law.family = VelocityFamily::custom;
  law.rho_ref = rho_ref;
  law.v_free = v(0.0);
  law.evaluate = std::move(v);
  law.derivative = std::move(dv);
  return law;
}

/// H = scale on [a, b], 0 elsewhere; sharp indicator in x.
inline LaneChange indicator_rate(double a, double b, double scale = 1.0) {
  if (!(b > a)) throw ModelError("indicator_rate: need a < b");
  if (!(scale >= 0.0)) throw ModelError("indicator_rate: scale must be >= 0");
  LaneChange h;
  h.rate = [a, b, scale](double, double, double x) { return (x >= a && x <= b) ? scale : 0.0; };
  h.bounds = {scale, 0.0, 0.0, 2.0 * scale};
  h.description = "indicator[" + std::to_string(a) + "," + std::to_string(b) + "]*" + std::to_string(scale);
  return h;
}

inline LaneChange constant_rate(double c) {
  if (!(c >= 0.0)) throw ModelError("constant_rate: rate must be >= 0");
  LaneChange h;
  h.rate = [c](double, double, double) { return c; };
  h.bounds = {c, 0.0, 0.0, 0.0};
  h.description = "constant " + std::to_string(c);
  return h;
}

inline LaneChange no_lane_change() { return constant_rate(0.0); }

struct SourceSpec {
  LaneChange lane_change;
  std::array<double, n_lanes> rho_max{1.0, 1.0};
};

/// Rate added to lane 1 and subtracted from lane 2:
/// (rho2 / rho2_max - rho1 / rho1_max) * H(w1, w2, x).
inline double source_rate(double rho1, double rho2, double w1, double w2, double x, const LaneChange& h,
                          const std::array<double, n_lanes>& rho_max) {
  return (rho2 / rho_max[1] - rho1 / rho_max[0]) * h(w1, w2, x);
}

inline double source_rate(double rho1, double rho2, double w1, double w2, double x, const SourceSpec& spec) {
  return source_rate(rho1, rho2, w1, w2, x, spec.lane_change, spec.rho_max);
}

inline double source_rate(double rho1, double rho2, double w1, double w2, double x, const ModelSpec& model) {
  return source_rate(rho1, rho2, w1, w2, x, model.lane_change, model.rho_max);
}

/// Cell average of a lane's initial density over [a, b].
using InitialProfile = std::function<double(int lane, double a, double b)>;

/// value on [from, to]; either end may be infinite.
struct Segment {
  double value = 0.0;
  double from = -std::numeric_limits<double>::infinity();
  double to = std::numeric_limits<double>::infinity();
};

/// Sum of segment values weighted by their overlap fraction with each cell.
inline InitialProfile piecewise_profile(std::array<std::vector<Segment>, n_lanes> segments) {
  auto shared = std::make_shared<const std::array<std::vector<Segment>, n_lanes>>(std::move(segments));
  return [shared](int lane, double a, double b) {
    double acc = 0.0;
    for (const auto& s : (*shared)[lane]) {
      const double lo = std::max(a, s.from);
      const double hi = std::min(b, s.to);
      if (hi > lo) acc += s.value * (hi - lo);
    }
    return acc / (b - a);
  };
}

inline InitialProfile uniform_profile(double lane1, double lane2) {
  return [lane1, lane2](int lane, double, double) { return lane == 0 ? lane1 : lane2; };
}

inline LaneState sample_initial(const InitialProfile& profile, const Grid& grid) {
  LaneState s(grid.n_cells());
  for (int i = 0; i < n_lanes; ++i)
    for (std::size_t j = 0; j < grid.n_cells(); ++j) s.rho[i][j] = profile(i, grid.interface(j), grid.interface(j + 1));
  return s;
}

/// Everything a run needs. `model.eta` is the member that run() uses;
/// `eta_list` is the sweep set attached to a preset.
struct SimulationConfig {
  std::string name;
  Grid grid;
  InitialProfile initial;
  ModelSpec model;
  std::vector<double> eta_list;
  double cfl = 0.5;
  std::vector<double> out_times;
  /// Optional cap on the time step (oracle studies with prescribed dt).
  double max_dt = std::numeric_limits<double>::infinity();

  LaneState initial_state() const { return sample_initial(initial, grid); }
  double final_time() const { return out_times.empty() ? 0.0 : *std::max_element(out_times.begin(), out_times.end()); }
};

inline SimulationConfig with_eta(SimulationConfig c, double eta) {
  c.model.eta = eta;
  return c;
}

inline SimulationConfig with_resolution(SimulationConfig c, std::size_t n_cells) {
  c.grid = Grid(c.grid.x_min(), c.grid.x_max(), n_cells);
  return c;
}

inline SimulationConfig with_out_times(SimulationConfig c, std::vector<double> out_times) {
  c.out_times = std::move(out_times);
  return c;
}

inline constexpr std::array<std::string_view, 7> scenario_names{"fig1_t03", "fig1_t1", "fig2_tx", "fig3_tv", "uniform_ode", "riemann_local", "s_zero_tv"};

namespace detail {

inline ModelSpec greenshields_model(LaneChange h, double eta) {
  ModelSpec m;
  m.velocity = {greenshields(1.0, 1.0), greenshields(1.0, 1.0)};
  m.rho_max = {1.0, 1.0};
  m.lane_change = std::move(h);
  m.eta = eta;
  return m;
}

/// Lane 1: 0.6 for x >= 0. Lane 2: 0.4 for x <= 0.1.
inline InitialProfile lane_change_datum() {
  return piecewise_profile({std::vector<Segment>{{0.6, 0.0, std::numeric_limits<double>::infinity()}},
                            std::vector<Segment>{{0.4, -std::numeric_limits<double>::infinity(), 0.1}}});
}

inline std::vector<double> time_range(double step, int count) {
  std::vector<double> t;
  for (int k = 1; k <= count; ++k) t.push_back(step * k);
  return t;
}

}  // namespace detail

/// Named preset. Unknown names throw ConfigError.
inline SimulationConfig scenario(std::string_view name) {
  SimulationConfig c;
  c.name = std::string(name);
  c.grid = Grid(-4.0, 4.0, 1600);
  c.cfl = 0.5;
  const std::vector<double> fig_etas{0.1, 0.01, 0.005};
  if (name == "fig1_t03" || name == "fig1_t1") {
    c.initial = detail::lane_change_datum();
    c.model = detail::greenshields_model(indicator_rate(-2.0, 2.0), fig_etas.front());
    c.eta_list = fig_etas;
    c.out_times = {name == "fig1_t03" ? 0.3 : 1.0};
  } else if (name == "fig2_tx") {
    c.initial = detail::lane_change_datum();
    c.model = detail::greenshields_model(indicator_rate(-2.0, 2.0), 0.1);
    c.eta_list = {0.0, 0.1, 0.005};
    c.out_times = detail::time_range(0.05, 20);
  } else if (name == "fig3_tv") {
    c.initial = detail::lane_change_datum();
    c.model = detail::greenshields_model(indicator_rate(-2.0, 2.0), fig_etas.front());
    c.eta_list = fig_etas;
    c.out_times = detail::time_range(0.1, 10);
  } else if (name == "uniform_ode") {
    c.grid = Grid(-4.0, 4.0, 64);
    c.initial = uniform_profile(0.6, 0.4);
    c.model = detail::greenshields_model(constant_rate(1.0), 0.1);
    c.eta_list = {0.1};
    c.out_times = {1.0};
  } else if (name == "riemann_local") {
    c.initial = piecewise_profile({std::vector<Segment>{{0.6, 0.0, std::numeric_limits<double>::infinity()}}, std::vector<Segment>{}});
    c.model = detail::greenshields_model(no_lane_change(), 0.0);
    c.eta_list = {0.0};
    c.out_times = {0.3, 1.0};
  } else if (name == "s_zero_tv") {
    c.initial = detail::lane_change_datum();
    c.model = detail::greenshields_model(no_lane_change(), fig_etas.front());
    c.eta_list = fig_etas;
    c.out_times = detail::time_range(0.1, 10);
  } else {
    throw ConfigError("unknown scenario '" + std::string(name) + "'");
  }
  return c;
}

}  // namespace twolane
