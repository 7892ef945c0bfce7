#include <catch_amalgamated.hpp>

#include "twolane/core.hpp"
#include "twolane/models.hpp"
#include "twolane/scheme.hpp"

using namespace twolane;
using Catch::Matchers::ContainsSubstring;

namespace {

ModelSpec greenshields_pair(LaneChange h) {
  ModelSpec m;
  m.velocity = {greenshields(1.0, 1.0), greenshields(1.0, 1.0)};
  m.rho_max = {1.0, 1.0};
  m.lane_change = std::move(h);
  return m;
}

bool mentions(const std::vector<Violation>& vs, const std::string& text) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.message().find(text) != std::string::npos; });
}

}  // namespace

TEST_CASE("grid geometry is closed", "[core]") {
  for (std::size_t n : {2u, 7u, 800u, 1600u}) {
    const Grid g(-4.0, 4.0, n);
    CHECK(g.dx() == Catch::Approx(8.0 / n));
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(std::abs((g.interface(j + 1) - g.interface(j)) - g.dx()) <= 8 * g.dx() * 1e-15 * n);
      if (j + 1 < n) CHECK(std::abs((g.cell_center(j + 1) - g.cell_center(j)) - g.dx()) <= 8 * g.dx() * 1e-15 * n);
    }
    CHECK(std::abs(g.interface(n) - g.x_max()) <= 1e-12 * std::abs(g.x_max()));
    CHECK(g.cell_center(0) == Catch::Approx(-4.0 + 0.5 * g.dx()));
  }
}

TEST_CASE("grid rejects degenerate input", "[core]") {
  CHECK_THROWS_AS(Grid(1.0, 1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(Grid(1.0, 0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(Grid(0.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("lane state copies do not alias", "[core]") {
  const Grid g(-1.0, 1.0, 20);
  auto model = greenshields_pair(indicator_rate(-0.5, 0.5));
  model.eta = 0.1;
  LaneState a(g.n_cells());
  for (std::size_t j = 0; j < g.n_cells(); ++j) {
    a.rho[0][j] = j < 10 ? 0.0 : 0.6;
    a.rho[1][j] = j < 12 ? 0.4 : 0.0;
  }
  const LaneState original = a;
  LaneState copy = a;
  const LaneState next = nonlocal_step(copy, model, g, 0.01);
  CHECK(copy.rho == original.rho);
  CHECK(a.rho == original.rho);
  CHECK(next.rho != original.rho);
  copy.rho[0][3] = 0.9;
  CHECK(a.rho[0][3] == original.rho[0][3]);
}

TEST_CASE("lane state lengths must agree", "[core]") {
  CHECK_THROWS_AS(LaneState({0.1, 0.2}, {0.1}), std::invalid_argument);
}

TEST_CASE("validate_model: Greenshields passes", "[core][validate]") {
  auto m = greenshields_pair(no_lane_change());
  CHECK(validate_model(m).empty());
}

TEST_CASE("validate_model: increasing velocity is reported", "[core][validate]") {
  auto m = greenshields_pair(no_lane_change());
  m.velocity[1] = custom_velocity([](double r) { return r; }, [](double) { return 1.0; }, 1.0);
  const auto vs = validate_model(m);
  REQUIRE_FALSE(vs.empty());
  CHECK(mentions(vs, "Lane-wise velocities: V' > 0 detected"));
  CHECK(mentions(vs, "lane 2"));
}

TEST_CASE("validate_model: indicator lane change with bound 1 passes", "[core][validate]") {
  auto m = greenshields_pair(indicator_rate(-2.0, 2.0));
  CHECK(m.lane_change.bounds.h == 1.0);
  CHECK(validate_model(m).empty());
  CHECK(validate_model(m, -4.0, 4.0).empty());
}

TEST_CASE("validate_model: understated rate bounds are reported", "[core][validate]") {
  auto m = greenshields_pair(indicator_rate(-2.0, 2.0));
  m.lane_change.bounds.h = 0.5;
  CHECK(mentions(validate_model(m), "supplied bound H = 0.5"));

  auto w_dep = greenshields_pair(no_lane_change());
  w_dep.lane_change.rate = [](double w1, double w2, double) { return 2.0 * w1 + w2; };
  w_dep.lane_change.bounds = {3.0, 1.0, 1.0, 0.0};
  const auto vs = validate_model(w_dep);
  CHECK(mentions(vs, "H1"));
  CHECK_FALSE(mentions(vs, "H2 ="));

  auto bv = greenshields_pair(indicator_rate(-2.0, 2.0));
  bv.lane_change.bounds.h_bv = 1.0;
  CHECK(mentions(validate_model(bv), "H_BV"));
}

TEST_CASE("validate_model: negative rate and negative speed", "[core][validate]") {
  auto m = greenshields_pair(no_lane_change());
  m.lane_change.rate = [](double, double, double x) { return x; };
  m.lane_change.bounds = {10.0, 0.0, 0.0, 20.0};
  CHECK(mentions(validate_model(m), "H < 0"));

  auto slow = greenshields_pair(no_lane_change());
  slow.velocity[0] = greenshields(1.0, 0.5);
  CHECK(mentions(validate_model(slow), "V < 0"));
}

TEST_CASE("validate_model: nonpositive rho_max", "[core][validate]") {
  auto m = greenshields_pair(no_lane_change());
  m.rho_max[0] = 0.0;
  CHECK(mentions(validate_model(m), "Maximum lane densities"));
}

TEST_CASE("check_bounds tolerates 1e-10 and rejects beyond", "[core]") {
  LaneState s({0.0, 1.0 + 5e-11}, {-5e-11, 0.5});
  CHECK_NOTHROW(check_bounds(s, {1.0, 1.0}));
  s.rho[1][0] = -2e-10;
  CHECK_THROWS_AS(check_bounds(s, {1.0, 1.0}), BoundViolation);
  s.rho[1][0] = 0.0;
  s.rho[0][1] = 1.0 + 2e-10;
  CHECK_THROWS_WITH(check_bounds(s, {1.0, 1.0}), ContainsSubstring("lane 1"));
}
