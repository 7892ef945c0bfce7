#pragma once

/**
 * @brief Downstream exponential average
 *
 *   W[rho](x) = (1/eta) * int_x^inf exp((x - y)/eta) rho(y) dy
 *
 * evaluated exactly for piecewise-constant rho by a backward recursion over
 * the cells, O(n) per lane. Beyond x_max the density is continued by a
 * constant right_boundary value.
 */

#include <algorithm>
#include <cmath>
#include <concepts>
#include <span>
#include <stdexcept>
#include <vector>

namespace twolane {

/// q = exp(-dx/eta) is the decay across one cell, w = 1 - q the weight of a
/// cell seen from its own left edge.
struct KernelWeights {
  double q = 0.0;
  double w = 1.0;
  double eta = 0.0;
  double dx = 0.0;
};

/// exp(-dx/eta) underflows past this ratio; the operator is then the identity.
inline constexpr double underflow_ratio = 700.0;

inline KernelWeights kernel_weights(double dx, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("kernel_weights: eta must be > 0 (eta = 0 is the local model)");
  if (!(dx > 0.0)) throw std::invalid_argument("kernel_weights: dx must be > 0");
  const double ratio = dx / eta;
  if (ratio > underflow_ratio) return {0.0, 1.0, eta, dx};
  const double q = std::exp(-ratio);
  return {q, 1.0 - q, eta, dx};
}

namespace detail {

inline void check_kernel(const KernelWeights& kw) {
  if (!(kw.eta > 0.0)) throw std::invalid_argument("nonlocal operator: eta must be > 0 (route eta = 0 to the local path)");
}

template <typename Real>
void check_sizes(std::span<const Real> rho, std::span<Real> out) {
  if (rho.empty()) throw std::invalid_argument("nonlocal operator: empty density array");
  if (out.size() != rho.size()) throw std::invalid_argument("nonlocal operator: output length does not match input");
}

}  // namespace detail

/// W at the left edge of each cell. The recursion W[j] = W[j+1] + w (rho[j] - W[j+1])
/// is the convex combination w rho[j] + q W[j+1]; written this way a constant
/// input is reproduced exactly.
template <std::floating_point Real>
void eval_cell_anchored(std::span<const Real> rho, const KernelWeights& kw, Real right_boundary, std::span<Real> out) {
  detail::check_kernel(kw);
  detail::check_sizes(rho, out);
  const std::size_t n = rho.size();
  if (kw.q == 0.0) {
    std::copy(rho.begin(), rho.end(), out.begin());
    return;
  }
  const Real w = static_cast<Real>(kw.w);
  Real next = right_boundary;
  for (std::size_t j = n; j-- > 0;) {
    next = next + w * (rho[j] - next);
    out[j] = next;
  }
}

/// W at interface j+1/2, built from cells strictly right of it; the last
/// interface sees only the constant continuation.
template <std::floating_point Real>
void eval_interface_anchored(std::span<const Real> rho, const KernelWeights& kw, Real right_boundary, std::span<Real> out) {
  detail::check_kernel(kw);
  detail::check_sizes(rho, out);
  const std::size_t n = rho.size();
  out[n - 1] = right_boundary;
  if (kw.q == 0.0) {
    std::copy(rho.begin() + 1, rho.end(), out.begin());
    return;
  }
  const Real w = static_cast<Real>(kw.w);
  for (std::size_t j = n - 1; j-- > 0;) out[j] = out[j + 1] + w * (rho[j + 1] - out[j + 1]);
}

inline std::vector<double> eval_cell_anchored(std::span<const double> rho, const KernelWeights& kw, double right_boundary) {
  std::vector<double> out(rho.size());
  eval_cell_anchored<double>(rho, kw, right_boundary, out);
  return out;
}

inline std::vector<double> eval_cell_anchored(std::span<const double> rho, const KernelWeights& kw) {
  if (rho.empty()) throw std::invalid_argument("nonlocal operator: empty density array");
  return eval_cell_anchored(rho, kw, rho.back());
}

inline std::vector<double> eval_interface_anchored(std::span<const double> rho, const KernelWeights& kw, double right_boundary) {
  std::vector<double> out(rho.size());
  eval_interface_anchored<double>(rho, kw, right_boundary, out);
  return out;
}

inline std::vector<double> eval_interface_anchored(std::span<const double> rho, const KernelWeights& kw) {
  if (rho.empty()) throw std::invalid_argument("nonlocal operator: empty density array");
  return eval_interface_anchored(rho, kw, rho.back());
}

/// Discrete defect of dW/dx = (W - rho)/eta, scaled by eta so it carries
/// density units. O(dx) for the exact cell-anchored W.
inline double identity_residual(std::span<const double> rho, std::span<const double> w_cell, const KernelWeights& kw) {
  if (rho.size() != w_cell.size()) throw std::invalid_argument("identity_residual: length mismatch");
  if (rho.size() < 3) throw std::invalid_argument("identity_residual: need at least 3 cells");
  detail::check_kernel(kw);
  double res = 0.0;
  for (std::size_t j = 1; j + 1 < rho.size(); ++j) {
    const double lhs = (w_cell[j + 1] - w_cell[j]) / kw.dx;
    const double rhs = (w_cell[j] - rho[j]) / kw.eta;
    res = std::max(res, std::abs(lhs - rhs) * kw.eta);
  }
  return res;
}

}  // namespace twolane
