#ifndef JETPAT_KERNELS_HPP
#define JETPAT_KERNELS_HPP

// Hermite polynomials and L1-normalized derivative-of-Gaussian (DtG) kernels
// up to second order. Every 2-D kernel is kept in separable form.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "jetpat/image.hpp"

namespace jetpat {

/// Highest derivative order of the jet family.
inline constexpr int kMaxJetOrder = 2;

/// Number of members in the DtG family up to kMaxJetOrder: (k+2)!/(2 k!).
inline constexpr int kJetSize = (kMaxJetOrder + 1) * (kMaxJetOrder + 2) / 2;

/// Derivative orders (m along x, n along y) of each family member, in jet order.
struct DerivativeOrder {
  int m;
  int n;
  constexpr int total() const noexcept { return m + n; }
  friend constexpr bool operator==(DerivativeOrder, DerivativeOrder) = default;
};

inline constexpr std::array<DerivativeOrder, kJetSize> kJetOrders{
    {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}};

/// Physicists' Hermite polynomial H_m(x) via the three-term recurrence
/// H_{m+1} = 2x H_m - 2m H_{m-1}.
inline double hermite_eval(int m, double x) {
  if (m < 0) throw std::invalid_argument("hermite_eval: negative order " + std::to_string(m));
  double prev = 1.0;
  if (m == 0) return prev;
  double curr = 2.0 * x;
  for (int k = 1; k < m; ++k) {
    const double next = 2.0 * x * curr - 2.0 * k * prev;
    prev = curr;
    curr = next;
  }
  return curr;
}

/// Unnormalized m-th derivative of the 1-D Gaussian at scale sigma, via the Hermite form.
inline double gaussian_derivative(int m, double sigma, double x) {
  const double s = sigma * std::numbers::sqrt2;
  const double gauss = std::exp(-x * x / (2.0 * sigma * sigma)) /
                       (sigma * std::sqrt(2.0 * std::numbers::pi));
  return std::pow(-1.0 / s, m) * hermite_eval(m, x / s) * gauss;
}

/// Default half-width of the sampled grid: ceil(4 sigma).
inline int default_support_radius(double sigma) {
  return static_cast<int>(std::ceil(4.0 * sigma));
}

namespace detail {

inline void check_kernel_args(int m, double sigma, int support_radius) {
  if (m < 0 || m > kMaxJetOrder)
    throw std::invalid_argument("DtG order must be in [0, 2], got " + std::to_string(m));
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("DtG sigma must be positive, got " + std::to_string(sigma));
  if (support_radius < 1)
    throw std::invalid_argument("DtG support radius must be >= 1, got " +
                                std::to_string(support_radius));
}

}  // namespace detail

/// Raw samples of G_sigma^m at the integers -r..r (index 0 is x = -r).
inline std::vector<double> dtg_samples_1d(int m, double sigma, int support_radius) {
  detail::check_kernel_args(m, sigma, support_radius);
  std::vector<double> taps(2 * static_cast<std::size_t>(support_radius) + 1);
  for (int x = -support_radius; x <= support_radius; ++x)
    taps[x + support_radius] = gaussian_derivative(m, sigma, x);
  // Enforce exact parity; pow/exp rounding can leave the mirrored samples a few ulps apart.
  const double parity = (m % 2 == 0) ? 1.0 : -1.0;
  for (int x = 1; x <= support_radius; ++x)
    taps[support_radius - x] = parity * taps[support_radius + x];
  if (m % 2 == 1) taps[support_radius] = 0.0;
  return taps;
}

/// Samples of G_sigma^m rescaled so that the sum of absolute taps is one.
///
/// Derivative taps (m >= 1) are made exactly zero-sum so that a constant image has a
/// vanishing derivative response. Odd orders are zero-sum by antisymmetry; for m = 2 the
/// residual DC of the truncated samples is removed along the Gaussian profile
/// (t -= (sum t / sum g) * g), which keeps the taps symmetric and localized.
inline std::vector<double> dtg_taps_1d(int m, double sigma, int support_radius) {
  auto taps = dtg_samples_1d(m, sigma, support_radius);
  if (m > 0 && m % 2 == 0) {
    const auto gauss = dtg_samples_1d(0, sigma, support_radius);
    double dc = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < taps.size(); ++i) {
      dc += taps[i];
      mass += gauss[i];
    }
    for (std::size_t i = 0; i < taps.size(); ++i) taps[i] -= dc / mass * gauss[i];
  }
  double l1 = 0.0;
  for (double t : taps) l1 += std::abs(t);
  for (double& t : taps) t /= l1;
  return taps;
}

/// Separable 2-D DtG kernel G^{(m,n)}(x, y) = G^m(x) G^n(y).
class DtgKernel {
public:
  DtgKernel(int m, int n, double sigma, int support_radius)
      : order_{m, n},
        sigma_(sigma),
        support_radius_(support_radius),
        taps_x_(dtg_taps_1d(m, sigma, support_radius)),
        taps_y_(dtg_taps_1d(n, sigma, support_radius)) {}

  DerivativeOrder order() const noexcept { return order_; }
  int m() const noexcept { return order_.m; }
  int n() const noexcept { return order_.n; }
  double sigma() const noexcept { return sigma_; }
  int support_radius() const noexcept { return support_radius_; }
  int width() const noexcept { return 2 * support_radius_ + 1; }
  const std::vector<double>& taps_x() const noexcept { return taps_x_; }
  const std::vector<double>& taps_y() const noexcept { return taps_y_; }

  /// Dense realization: value at (col x, row y) is taps_x[x] * taps_y[y].
  Image<double> dense() const {
    Image<double> out(width(), width());
    for (int y = 0; y < width(); ++y)
      for (int x = 0; x < width(); ++x) out(x, y) = taps_x_[x] * taps_y_[y];
    return out;
  }

private:
  DerivativeOrder order_;
  double sigma_;
  int support_radius_;
  std::vector<double> taps_x_;
  std::vector<double> taps_y_;
};

inline DtgKernel dtg_kernel_2d(int m, int n, double sigma, int support_radius) {
  if (m < 0 || n < 0 || m + n > kMaxJetOrder)
    throw std::invalid_argument("dtg_kernel_2d: orders (" + std::to_string(m) + "," +
                                std::to_string(n) + ") exceed the second-order jet");
  return DtgKernel(m, n, sigma, support_radius);
}

/// The six-member DtG family in jet order.
inline std::vector<DtgKernel> dtg_family(double sigma, int support_radius) {
  std::vector<DtgKernel> family;
  family.reserve(kJetSize);
  for (auto [m, n] : kJetOrders) family.push_back(dtg_kernel_2d(m, n, sigma, support_radius));
  return family;
}

}  // namespace jetpat

#endif  // JETPAT_KERNELS_HPP
