#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "twolane/nonlocal.hpp"

using namespace twolane;

namespace {

/// q = 0.5 exactly: dx / eta = ln 2.
KernelWeights half_decay() { return kernel_weights(std::log(2.0), 1.0); }

}  // namespace

TEST_CASE("kernel weights", "[nonlocal]") {
  const auto kw = kernel_weights(0.01, 0.1);
  CHECK(kw.q == Catch::Approx(std::exp(-0.1)));
  CHECK(kw.w + kw.q == 1.0);
  CHECK(kw.q > 0.0);
  CHECK(kw.q < 1.0);
  const auto hd = half_decay();
  CHECK(hd.q == Catch::Approx(0.5).epsilon(1e-15));

  const auto tiny = kernel_weights(0.01, 1e-12);
  CHECK(tiny.q == 0.0);
  CHECK(tiny.w == 1.0);

  CHECK_THROWS_AS(kernel_weights(0.01, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kernel_weights(0.0, 0.1), std::invalid_argument);
}

TEST_CASE("cell-anchored examples", "[nonlocal]") {
  SECTION("constant input is reproduced exactly") {
    const std::vector<double> rho(37, 0.6);
    for (double eta : {1e-3, 0.05, 0.1, 1.0, 100.0}) {
      const auto w = eval_cell_anchored(rho, kernel_weights(0.01, eta), 0.6);
      for (double v : w) CHECK(v == 0.6);
    }
  }
  SECTION("[1, 0] with zero tail and q = 1/2") {
    const std::vector<double> rho{1.0, 0.0};
    const auto kw = half_decay();
    const auto w = eval_cell_anchored(rho, kw, 0.0);
    const auto brute = oracle::brute_cell_anchored(rho, kw.dx, kw.eta, 0.0);
    CHECK(w[0] == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(w[1] == Catch::Approx(0.0).margin(1e-15));
    CHECK(w[0] == Catch::Approx(brute[0]).epsilon(1e-13));
  }
  SECTION("[0, 0, 1] with unit tail and q = 1/2") {
    const std::vector<double> rho{0.0, 0.0, 1.0};
    const auto kw = half_decay();
    const auto w = eval_cell_anchored(rho, kw, 1.0);
    CHECK(w[0] == Catch::Approx(0.25).epsilon(1e-14));
    CHECK(w[1] == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(w[2] == 1.0);
    const auto brute = oracle::brute_cell_anchored(rho, kw.dx, kw.eta, 1.0);
    for (int j = 0; j < 3; ++j) CHECK(w[j] == Catch::Approx(brute[j]).epsilon(1e-13));
  }
}

TEST_CASE("interface-anchored examples", "[nonlocal]") {
  SECTION("constant") {
    const std::vector<double> rho(12, 0.35);
    for (double v : eval_interface_anchored(rho, kernel_weights(0.1, 0.3), 0.35)) CHECK(v == 0.35);
  }
  SECTION("[1, 0] sees only the downstream cell and the tail") {
    const auto w = eval_interface_anchored(std::vector<double>{1.0, 0.0}, half_decay(), 0.0);
    CHECK(w[0] == 0.0);
    CHECK(w[1] == 0.0);
  }
  SECTION("eta -> 0 gives the downstream neighbour") {
    std::mt19937_64 gen(3);
    const auto rho = oracle::random_vector(gen, 50, 0.0, 1.0);
    const auto w = eval_interface_anchored(rho, kernel_weights(0.01, 1e-12), 0.25);
    for (std::size_t j = 0; j + 1 < rho.size(); ++j) CHECK(w[j] == rho[j + 1]);
    CHECK(w.back() == 0.25);
    const auto w_small = eval_interface_anchored(rho, kernel_weights(0.01, 1e-4), 0.25);
    for (std::size_t j = 0; j + 1 < rho.size(); ++j) CHECK(w_small[j] == Catch::Approx(rho[j + 1]).margin(1e-30));
  }
  SECTION("interface values equal the next cell-anchored value") {
    std::mt19937_64 gen(5);
    const auto rho = oracle::random_vector(gen, 64, 0.0, 1.0);
    const auto kw = kernel_weights(0.02, 0.07);
    const auto wc = eval_cell_anchored(rho, kw, 0.3);
    const auto wh = eval_interface_anchored(rho, kw, 0.3);
    for (std::size_t j = 0; j + 1 < rho.size(); ++j) CHECK(wh[j] == Catch::Approx(wc[j + 1]).epsilon(1e-14));
    const auto brute = oracle::brute_interface(rho, kw.dx, kw.eta, 0.3);
    CHECK(oracle::max_rel_diff(wh, brute) < 1e-12);
  }
}

TEST_CASE("nonlocal operator errors", "[nonlocal]") {
  const std::vector<double> rho{0.1, 0.2, 0.3};
  KernelWeights bad{0.5, 0.5, 0.0, 0.1};
  CHECK_THROWS_AS(eval_cell_anchored(rho, bad, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(eval_interface_anchored(rho, bad, 0.3), std::invalid_argument);
  std::vector<double> out(2);
  CHECK_THROWS_AS(eval_cell_anchored<double>(rho, kernel_weights(0.1, 0.1), 0.3, out), std::invalid_argument);
  CHECK_THROWS_AS(eval_cell_anchored(std::vector<double>{}, kernel_weights(0.1, 0.1), 0.0), std::invalid_argument);
}

TEST_CASE("recursion matches the O(n^2) weighted sum", "[nonlocal][property]") {
  std::mt19937_64 gen(20240611);
  std::uniform_int_distribution<std::size_t> size(1, 512);
  std::uniform_real_distribution<double> log_eta(std::log(1e-3), std::log(10.0));
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = size(gen);
    const double dx = 8.0 / 512.0;
    const double eta = std::exp(log_eta(gen));
    const auto rho = oracle::random_vector(gen, n, 0.0, 1.0);
    const double tail = oracle::random_vector(gen, 1, 0.0, 1.0)[0];
    const auto kw = kernel_weights(dx, eta);
    CHECK(oracle::max_rel_diff(eval_cell_anchored(rho, kw, tail), oracle::brute_cell_anchored(rho, dx, eta, tail)) < 1e-12);
  }
}

TEST_CASE("operator properties on random data", "[nonlocal][property]") {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial * 3;
    const double dx = 0.01 * (1 + trial % 5);
    const double eta = 0.002 * (1 + trial % 17);
    const auto kw = kernel_weights(dx, eta);
    const auto a = oracle::random_vector(gen, n, 0.0, 1.0);
    const double ta = oracle::random_vector(gen, 1, 0.0, 1.0)[0];

    for (auto anchored : {+[](std::span<const double> r, const KernelWeights& k, double t) { return eval_cell_anchored(r, k, t); },
                          +[](std::span<const double> r, const KernelWeights& k, double t) { return eval_interface_anchored(r, k, t); }}) {
      const auto wa = anchored(a, kw, ta);
      // Convex averaging.
      const double lo = std::min(*std::min_element(a.begin(), a.end()), ta);
      const double hi = std::max(*std::max_element(a.begin(), a.end()), ta);
      for (double v : wa) {
        CHECK(v >= lo);
        CHECK(v <= hi);
      }
      // Monotonicity.
      auto b = a;
      for (auto& v : b) v += 0.3 * oracle::random_vector(gen, 1, 0.0, 1.0)[0];
      const auto wb = anchored(b, kw, ta);
      for (std::size_t j = 0; j < n; ++j) CHECK(wa[j] <= wb[j]);
      // Linearity.
      const double alpha = 0.7, beta = -1.3;
      std::vector<double> combo(n);
      for (std::size_t j = 0; j < n; ++j) combo[j] = alpha * a[j] + beta * b[j];
      const auto wc = anchored(combo, kw, alpha * ta + beta * ta);
      std::vector<double> expected(n);
      for (std::size_t j = 0; j < n; ++j) expected[j] = alpha * wa[j] + beta * wb[j];
      CHECK(oracle::max_rel_diff(wc, expected) < 1e-12);
    }

    // TV non-expansion (cell-anchored).
    const auto w = eval_cell_anchored(a, kw, ta);
    CHECK(oracle::tv(w) <= oracle::tv(a) + std::abs(a.back() - ta) + 1e-12);
    const auto matched = eval_cell_anchored(a, kw, a.back());
    CHECK(oracle::tv(matched) <= oracle::tv(a) + 1e-12);
  }
}

TEST_CASE("identity residual", "[nonlocal][identity]") {
  SECTION("constant data") {
    const std::vector<double> rho(40, 0.42);
    const auto kw = kernel_weights(0.01, 0.1);
    CHECK(identity_residual(rho, eval_cell_anchored(rho, kw), kw) == 0.0);
  }
  SECTION("sine data at dx = 1e-3, eta = 0.1") {
    const double dx = 1e-3, eta = 0.1;
    const std::size_t n = 20000;
    std::vector<double> rho(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = j * dx, b = (j + 1) * dx;
      rho[j] = (std::cos(a) - std::cos(b)) / dx;  // cell average of sin
    }
    const auto kw = kernel_weights(dx, eta);
    const auto w = eval_cell_anchored(rho, kw, rho.back());
    // Away from the truncated right end, W matches the closed form at cell left edges to O(dx).
    double worst = 0.0;
    for (std::size_t j = 0; j < n - 5000; ++j) worst = std::max(worst, std::abs(w[j] - oracle::w_of_sin(j * dx, eta)));
    CHECK(worst < 2.0 * dx);
    const std::vector<double> head_rho(rho.begin(), rho.end() - 5000);
    const std::vector<double> head_w(w.begin(), w.end() - 5000);
    CHECK(identity_residual(head_rho, head_w, kw) <= 5.0 * dx);
  }
  SECTION("random data converges under refinement at fixed eta") {
    std::mt19937_64 gen(11);
    const double eta = 0.05;
    // Same piecewise-constant profile on [0, 1] resolved by successively finer meshes.
    const auto base = oracle::random_vector(gen, 100, 0.0, 1.0);
    double prev = 0.0;
    for (std::size_t factor : {10u, 20u, 40u}) {
      std::vector<double> rho;
      for (double v : base)
        for (std::size_t k = 0; k < factor; ++k) rho.push_back(v);
      const double dx = 1.0 / static_cast<double>(rho.size());
      const auto kw = kernel_weights(dx, eta);
      const double r = identity_residual(rho, eval_cell_anchored(rho, kw), kw);
      CHECK(std::isfinite(r));
      if (factor == 10u) CHECK(dx == Catch::Approx(1e-3));
      if (prev > 0.0) CHECK(r < 0.6 * prev);
      prev = r;
    }
  }
  SECTION("needs three cells") {
    const std::vector<double> rho{0.1, 0.2};
    const auto kw = kernel_weights(0.1, 0.1);
    CHECK_THROWS_AS(identity_residual(rho, rho, kw), std::invalid_argument);
  }
}
