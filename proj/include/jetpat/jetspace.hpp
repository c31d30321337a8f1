#ifndef JETPAT_JETSPACE_HPP
#define JETPAT_JETSPACE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jetpat/image.hpp"
#include "jetpat/kernels.hpp"

namespace jetpat {

/// Default constant of the Weber-law contrast normalization.
inline constexpr double kWeberConstant = 0.03;

/// The 6 jet components at one pixel, in jet order (00, 10, 01, 20, 11, 02).
using Jet6 = std::array<double, kJetSize>;

/// Per-pixel local jet vector: one image per DtG family member.
struct JetVector {
  std::array<GrayImage, kJetSize> channels;
  double sigma = 1.0;
  bool normalized = false;

  std::size_t width() const noexcept { return channels[0].width(); }
  std::size_t height() const noexcept { return channels[0].height(); }

  Jet6 at(std::size_t x, std::size_t y) const noexcept {
    Jet6 j;
    for (int l = 0; l < kJetSize; ++l) j[l] = channels[l](x, y);
    return j;
  }
};

/// Smallest image side that leaves room for the kernel support plus an encoding border.
inline std::size_t min_image_side(int support_radius) {
  return 2 * static_cast<std::size_t>(support_radius) + 3;
}

namespace detail {

// out(x, y) = sum_u taps[u + r] * in(clamp(x + u), y)
inline void correlate_rows(const GrayImage& in, std::span<const double> taps, GrayImage& out) {
  const std::size_t w = in.width();
  const std::size_t r = taps.size() / 2;
  std::vector<double> padded(w + 2 * r);
  for (std::size_t y = 0; y < in.height(); ++y) {
    auto src = in.row(y);
    std::fill_n(padded.begin(), r, src.front());
    std::copy(src.begin(), src.end(), padded.begin() + r);
    std::fill_n(padded.begin() + r + w, r, src.back());
    auto dst = out.row(y);
    for (std::size_t x = 0; x < w; ++x) {
      const double* p = padded.data() + x;
      double acc = 0.0;
      for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * p[k];
      dst[x] = acc;
    }
  }
}

// out(x, y) = scale * sum_v taps[v + r] * in(x, clamp(y + v))
inline void correlate_cols(const GrayImage& in, std::span<const double> taps, double scale,
                           GrayImage& out) {
  const std::size_t w = in.width();
  const auto h = static_cast<std::ptrdiff_t>(in.height());
  const auto r = static_cast<std::ptrdiff_t>(taps.size() / 2);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    auto dst = out.row(static_cast<std::size_t>(y));
    std::fill(dst.begin(), dst.end(), 0.0);
    for (std::ptrdiff_t v = -r; v <= r; ++v) {
      const double t = taps[static_cast<std::size_t>(v + r)];
      if (t == 0.0) continue;
      const auto src = in.row(static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(y + v, 0, h - 1)));
      for (std::size_t x = 0; x < w; ++x) dst[x] += t * src[x];
    }
    if (scale != 1.0)
      for (double& d : dst) d *= scale;
  }
}

}  // namespace detail

/// Local jet of `image`: channel (m,n) is (-1)^(m+n) <G^(m,n) | I> evaluated at every
/// pixel, i.e. the kernel is centered on the pixel and the sign makes each channel
/// the derivative estimate itself. Borders are replicate-padded. When
/// `scale_normalize` is set, channel (m,n) is multiplied by sigma^(m+n).
inline JetVector compute_jet(const GrayImage& image, double sigma, int support_radius,
                             bool scale_normalize = true) {
  const auto family = dtg_family(sigma, support_radius);
  const std::size_t min_side = min_image_side(support_radius);
  if (image.width() < min_side || image.height() < min_side)
    throw std::invalid_argument("compute_jet: image " + std::to_string(image.width()) + "x" +
                                std::to_string(image.height()) + " is smaller than " +
                                std::to_string(min_side) + "x" + std::to_string(min_side) +
                                " required by support radius " + std::to_string(support_radius));

  // Horizontal passes are shared between channels with the same x order.
  std::array<GrayImage, kMaxJetOrder + 1> rows;
  for (int m = 0; m <= kMaxJetOrder; ++m) {
    rows[m] = GrayImage(image.width(), image.height());
    detail::correlate_rows(image, dtg_taps_1d(m, sigma, support_radius), rows[m]);
  }

  JetVector jet;
  jet.sigma = sigma;
  jet.normalized = scale_normalize;
  for (int l = 0; l < kJetSize; ++l) {
    const auto& kernel = family[l];
    const int order = kernel.order().total();
    double scale = (order % 2 == 0) ? 1.0 : -1.0;
    if (scale_normalize) scale *= std::pow(sigma, order);
    jet.channels[l] = GrayImage(image.width(), image.height());
    detail::correlate_cols(rows[kernel.m()], kernel.taps_y(), scale, jet.channels[l]);
  }
  return jet;
}

inline JetVector compute_jet(const GrayImage& image, double sigma) {
  return compute_jet(image, sigma, default_support_radius(sigma));
}

/// Weber-law contrast normalization: each pixel's 6-vector is scaled by
/// log(1 + L / weber) / L with L its l2 norm. Pixels with L = 0 stay zero.
inline JetVector contrast_normalize(JetVector jet, double weber = kWeberConstant) {
  if (!(weber > 0.0)) throw std::invalid_argument("contrast_normalize: weber constant must be > 0");
  const std::size_t count = jet.channels[0].size();
  std::array<double*, kJetSize> ch;
  for (int l = 0; l < kJetSize; ++l) ch[l] = jet.channels[l].data();
  for (std::size_t i = 0; i < count; ++i) {
    double sq = 0.0;
    for (int l = 0; l < kJetSize; ++l) sq += ch[l][i] * ch[l][i];
    const double norm = std::sqrt(sq);
    const double factor = norm > 0.0 ? std::log1p(norm / weber) / norm : 0.0;
    for (int l = 0; l < kJetSize; ++l) ch[l][i] *= factor;
  }
  return jet;
}

/// Rotate a pixel jet by theta (radians) in image (x = column, y = row) coordinates:
/// gradient g -> R g, Hessian H -> R H R^T with R = [[cos, -sin], [sin, cos]].
inline Jet6 rotate_jet(const Jet6& j, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double cos2 = std::cos(2.0 * theta);
  const double sin2 = std::sin(2.0 * theta);
  const double xx = j[3], xy = j[4], yy = j[5];
  Jet6 out;
  out[0] = j[0];
  out[1] = c * j[1] - s * j[2];
  out[2] = s * j[1] + c * j[2];
  out[3] = 0.5 * ((1.0 + cos2) * xx - 2.0 * sin2 * xy + (1.0 - cos2) * yy);
  out[4] = 0.5 * (sin2 * xx + 2.0 * cos2 * xy - sin2 * yy);
  out[5] = 0.5 * ((1.0 - cos2) * xx + 2.0 * sin2 * xy + (1.0 + cos2) * yy);
  return out;
}

/// Reflection about y = x: swaps the x and y derivative orders.
inline Jet6 reflect_jet(const Jet6& j) { return {j[0], j[2], j[1], j[5], j[4], j[3]}; }

}  // namespace jetpat

#endif  // JETPAT_JETSPACE_HPP
