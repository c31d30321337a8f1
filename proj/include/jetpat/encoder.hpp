#ifndef JETPAT_ENCODER_HPP
#define JETPAT_ENCODER_HPP

// Local jet pattern (LJP) encoding: circular sign codes over each jet channel,
// uniform-pattern reduction and the concatenated normalized histogram feature.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jetpat/image.hpp"
#include "jetpat/jetspace.hpp"
#include "jetpat/kernels.hpp"

namespace jetpat {

enum class Interpolation { bilinear, nearest };
enum class CodeMapping { uniform, raw };

inline std::string_view to_string(Interpolation i) {
  return i == Interpolation::bilinear ? "bilinear" : "nearest";
}
inline std::string_view to_string(CodeMapping m) {
  return m == CodeMapping::uniform ? "uniform" : "raw";
}

struct Offset {
  double dx;
  double dy;
};

/// Circular sampling pattern: N points at radius R. Neighbor n (0-based) sits at
/// (R cos t, -R sin t) with t = 2 pi n / N, so y points down the rows.
class SamplingGeometry {
public:
  SamplingGeometry(double radius = 1.0, int neighbors = 8) : radius_(radius), neighbors_(neighbors) {
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw std::invalid_argument("SamplingGeometry: radius must be positive");
    if (neighbors < 1 || neighbors > 31)
      throw std::invalid_argument("SamplingGeometry: neighbor count must be in [1, 31], got " +
                                  std::to_string(neighbors));
    offsets_.reserve(neighbors);
    for (int n = 0; n < neighbors; ++n) {
      const double theta = 2.0 * std::numbers::pi * n / neighbors;
      offsets_.push_back({snap(radius * std::cos(theta)), snap(-radius * std::sin(theta))});
    }
  }

  double radius() const noexcept { return radius_; }
  int neighbors() const noexcept { return neighbors_; }
  std::span<const Offset> offsets() const noexcept { return offsets_; }
  std::uint32_t max_code() const noexcept { return (1u << neighbors_) - 1u; }

  /// Border excluded on every side so all neighbors land inside the image.
  std::size_t border() const noexcept { return static_cast<std::size_t>(std::ceil(radius_)); }

private:
  // Axis-aligned neighbors must hit pixel centers exactly (cos(pi/2) is not 0 in doubles).
  static double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-12 ? r : v;
  }

  double radius_;
  int neighbors_;
  std::vector<Offset> offsets_;
};

/// Channel value at (cx + dx, cy + dy) by bilinear interpolation; exact on integer offsets.
inline double sample_neighbor(const GrayImage& channel, std::size_t cx, std::size_t cy,
                              Offset offset) {
  const double x = static_cast<double>(cx) + offset.dx;
  const double y = static_cast<double>(cy) + offset.dy;
  const double max_x = static_cast<double>(channel.width()) - 1.0;
  const double max_y = static_cast<double>(channel.height()) - 1.0;
  if (!(x >= 0.0 && y >= 0.0 && x <= max_x && y <= max_y))
    throw std::out_of_range("sample_neighbor: point (" + std::to_string(x) + ", " +
                            std::to_string(y) + ") lies outside the channel");
  const double x0 = std::floor(x), y0 = std::floor(y);
  const double fx = x - x0, fy = y - y0;
  const auto ix = static_cast<std::size_t>(x0), iy = static_cast<std::size_t>(y0);
  const std::size_t ix1 = fx > 0.0 ? ix + 1 : ix;
  const std::size_t iy1 = fy > 0.0 ? iy + 1 : iy;
  // Difference form keeps constant neighborhoods exact.
  const double top = channel(ix, iy) + fx * (channel(ix1, iy) - channel(ix, iy));
  const double bottom = channel(ix, iy1) + fx * (channel(ix1, iy1) - channel(ix, iy1));
  return top + fy * (bottom - top);
}

/// Per-channel code image over the valid centers.
struct LjpCodeMap {
  Image<std::uint32_t> codes;
  int channel_index = 0;
};

namespace detail {

// Precomputed sampling stencil for one neighbor: four pixel offsets in a flat buffer
// and the bilinear fractions.
struct Stencil {
  std::ptrdiff_t p00, p01, p10, p11;
  double fx, fy;
};

inline std::vector<Stencil> make_stencils(const SamplingGeometry& geometry, std::size_t stride,
                                          Interpolation interp) {
  std::vector<Stencil> out;
  const auto s = static_cast<std::ptrdiff_t>(stride);
  for (const Offset& o : geometry.offsets()) {
    Stencil st{};
    if (interp == Interpolation::nearest) {
      const auto dx = static_cast<std::ptrdiff_t>(std::lround(o.dx));
      const auto dy = static_cast<std::ptrdiff_t>(std::lround(o.dy));
      st.p00 = st.p01 = st.p10 = st.p11 = dy * s + dx;
    } else {
      const double x0 = std::floor(o.dx), y0 = std::floor(o.dy);
      st.fx = o.dx - x0;
      st.fy = o.dy - y0;
      const auto ix = static_cast<std::ptrdiff_t>(x0), iy = static_cast<std::ptrdiff_t>(y0);
      const std::ptrdiff_t ix1 = st.fx > 0.0 ? ix + 1 : ix;
      const std::ptrdiff_t iy1 = st.fy > 0.0 ? iy + 1 : iy;
      st.p00 = iy * s + ix;
      st.p01 = iy * s + ix1;
      st.p10 = iy1 * s + ix;
      st.p11 = iy1 * s + ix1;
    }
    out.push_back(st);
  }
  return out;
}

// Relative size of the rounding noise treated as an exact tie (sign(0) = 1).
inline constexpr double kTieTolerance = 16 * std::numeric_limits<double>::epsilon();

// Interpolates neighbor-minus-center differences rather than raw values, so a constant
// added to the channel cancels before any rounding. An interpolated difference that is
// zero in exact arithmetic can come out as a few ulps of either sign; anything within
// kTieTolerance of the sampled magnitudes counts as a tie, which keeps codes invariant
// under positive scaling too.
inline std::uint32_t encode_at(const double* center, std::span<const Stencil> stencils) {
  const double c = *center;
  std::uint32_t code = 0;
  for (std::size_t n = 0; n < stencils.size(); ++n) {
    const Stencil& st = stencils[n];
    const double v00 = center[st.p00], v01 = center[st.p01];
    const double v10 = center[st.p10], v11 = center[st.p11];
    const double a = v00 - c;
    const double top = a + st.fx * ((v01 - c) - a);
    const double b = v10 - c;
    const double bottom = b + st.fx * ((v11 - c) - b);
    const double d = top + st.fy * (bottom - top);
    const double slack =
        kTieTolerance * (std::abs(c) + std::abs(v00) + std::abs(v01) + std::abs(v10) + std::abs(v11));
    code |= static_cast<std::uint32_t>(d >= -slack) << n;
  }
  return code;
}

inline void check_centers(const GrayImage& channel, const SamplingGeometry& geometry) {
  const std::size_t b = geometry.border();
  if (channel.width() <= 2 * b || channel.height() <= 2 * b)
    throw std::invalid_argument("LJP encoding: channel " + std::to_string(channel.width()) + "x" +
                                std::to_string(channel.height()) +
                                " has no valid centers for radius " +
                                std::to_string(geometry.radius()));
}

}  // namespace detail

/// Code of the pixel (cx, cy): bit n is set when neighbor n is >= the center.
inline std::uint32_t ljp_code(const GrayImage& channel, const SamplingGeometry& geometry,
                              std::size_t cx, std::size_t cy,
                              Interpolation interp = Interpolation::bilinear) {
  const std::size_t b = geometry.border();
  if (cx < b || cy < b || cx + b >= channel.width() || cy + b >= channel.height())
    throw std::out_of_range("ljp_code: (" + std::to_string(cx) + ", " + std::to_string(cy) +
                            ") is not a valid center");
  const auto stencils = detail::make_stencils(geometry, channel.width(), interp);
  return detail::encode_at(channel.data() + cy * channel.width() + cx, stencils);
}

/// Codes for every valid center of `channel`.
inline LjpCodeMap ljp_code_map(const GrayImage& channel, const SamplingGeometry& geometry,
                               Interpolation interp = Interpolation::bilinear,
                               int channel_index = 0) {
  detail::check_centers(channel, geometry);
  const std::size_t b = geometry.border();
  const std::size_t w = channel.width();
  const auto stencils = detail::make_stencils(geometry, w, interp);
  LjpCodeMap map{Image<std::uint32_t>(w - 2 * b, channel.height() - 2 * b), channel_index};
  for (std::size_t y = 0; y < map.codes.height(); ++y) {
    const double* src = channel.data() + (y + b) * w + b;
    auto dst = map.codes.row(y);
    for (std::size_t x = 0; x < dst.size(); ++x) dst[x] = detail::encode_at(src + x, stencils);
  }
  return map;
}

/// Number of circular 0/1 transitions in an N-bit code.
inline int circular_transitions(std::uint32_t code, int neighbors) {
  const std::uint32_t mask = (neighbors >= 32) ? ~0u : ((1u << neighbors) - 1u);
  const std::uint32_t rotated = ((code >> 1) | (code << (neighbors - 1))) & mask;
  return std::popcount((code ^ rotated) & mask);
}

/// Uniform (u2) pattern lookup. Codes with at most two circular transitions get
/// their own bin in ascending code order; all others share the last bin.
class UniformMap {
public:
  explicit UniformMap(int neighbors = 8) : neighbors_(neighbors) {
    if (neighbors < 1 || neighbors > 24)
      throw std::invalid_argument("UniformMap: neighbor count must be in [1, 24]");
    const std::uint32_t count = 1u << neighbors;
    table_.resize(count);
    std::uint32_t next = 0;
    for (std::uint32_t c = 0; c < count; ++c)
      table_[c] = circular_transitions(c, neighbors) <= 2 ? next++ : kMisc;
    bins_ = next + 1;
    for (auto& t : table_)
      if (t == kMisc) t = next;
  }

  int neighbors() const noexcept { return neighbors_; }
  std::size_t bins() const noexcept { return bins_; }
  std::size_t misc_bin() const noexcept { return bins_ - 1; }

  std::size_t operator()(std::uint32_t code) const {
    if (code >= table_.size())
      throw std::out_of_range("UniformMap: code " + std::to_string(code) + " exceeds " +
                              std::to_string(neighbors_) + "-bit range");
    return table_[code];
  }

private:
  static constexpr std::uint32_t kMisc = ~0u;
  int neighbors_;
  std::size_t bins_ = 0;
  std::vector<std::uint32_t> table_;
};

inline std::size_t uniform_map(std::uint32_t code, int neighbors) {
  return UniformMap(neighbors)(code);
}

/// Bin counts of a code map under the given mapping.
inline std::vector<std::uint64_t> histogram_counts(const LjpCodeMap& map, CodeMapping mapping,
                                                   int neighbors) {
  if (map.codes.empty()) throw std::invalid_argument("histogram: empty code map");
  if (mapping == CodeMapping::raw) {
    std::vector<std::uint64_t> counts(std::size_t{1} << neighbors, 0);
    for (std::uint32_t c : map.codes.pixels()) {
      if (c >= counts.size()) throw std::out_of_range("histogram: code out of range");
      ++counts[c];
    }
    return counts;
  }
  const UniformMap table(neighbors);
  std::vector<std::uint64_t> counts(table.bins(), 0);
  for (std::uint32_t c : map.codes.pixels()) ++counts[table(c)];
  return counts;
}

/// Normalized histogram (sums to one) of a code map.
inline std::vector<double> histogram(const LjpCodeMap& map, CodeMapping mapping, int neighbors) {
  const auto counts = histogram_counts(map, mapping, neighbors);
  const double total = static_cast<double>(map.codes.size());
  std::vector<double> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = static_cast<double>(counts[i]) / total;
  return out;
}

/// Parameters of the feature pipeline.
struct FeatureConfig {
  double sigma = 1.0;
  int support_radius = 0;  // 0 selects ceil(4 sigma)
  double radius = 1.0;
  int neighbors = 8;
  bool include_zeroth = false;
  CodeMapping mapping = CodeMapping::uniform;
  Interpolation interpolation = Interpolation::bilinear;
  double weber = kWeberConstant;

  int resolved_support_radius() const {
    return support_radius > 0 ? support_radius : default_support_radius(sigma);
  }
  std::size_t bins_per_channel() const {
    return mapping == CodeMapping::uniform ? UniformMap(neighbors).bins()
                                           : (std::size_t{1} << neighbors);
  }
  std::size_t channels_used() const { return include_zeroth ? kJetSize : kJetSize - 1; }
  std::size_t feature_length() const { return bins_per_channel() * channels_used(); }
};

/// Concatenated per-channel normalized histograms.
struct FeatureVector {
  std::vector<double> values;
  std::size_t bins_per_channel = 0;
  std::size_t channels_used = 0;

  std::size_t size() const noexcept { return values.size(); }
  std::span<const double> block(std::size_t c) const {
    return std::span<const double>(values).subspan(c * bins_per_channel, bins_per_channel);
  }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

namespace detail {

inline void append_channel(FeatureVector& f, const GrayImage& channel, const FeatureConfig& cfg,
                           const SamplingGeometry& geometry, int index) {
  const auto map = ljp_code_map(channel, geometry, cfg.interpolation, index);
  const auto h = histogram(map, cfg.mapping, cfg.neighbors);
  f.values.insert(f.values.end(), h.begin(), h.end());
}

}  // namespace detail

/// Full LJP pipeline: jet -> contrast normalization -> per-channel codes -> histograms.
/// Channel (0,0) is dropped unless `include_zeroth` is set.
inline FeatureVector extract_feature(const GrayImage& image, const FeatureConfig& cfg = {}) {
  const SamplingGeometry geometry(cfg.radius, cfg.neighbors);
  const auto jet = contrast_normalize(compute_jet(image, cfg.sigma, cfg.resolved_support_radius()),
                                      cfg.weber);
  FeatureVector f;
  f.bins_per_channel = cfg.bins_per_channel();
  f.channels_used = cfg.channels_used();
  f.values.reserve(cfg.feature_length());
  for (int l = cfg.include_zeroth ? 0 : 1; l < kJetSize; ++l)
    detail::append_channel(f, jet.channels[l], cfg, geometry, l);
  return f;
}

/// Plain LBP baseline: the same encoding applied to the raw image channel (one block).
inline FeatureVector extract_lbp_feature(const GrayImage& image, const FeatureConfig& cfg = {}) {
  const SamplingGeometry geometry(cfg.radius, cfg.neighbors);
  FeatureVector f;
  f.bins_per_channel = cfg.bins_per_channel();
  f.channels_used = 1;
  detail::append_channel(f, image, cfg, geometry, 0);
  return f;
}

/// 64-bit FNV-1a over the canonical little-endian bytes of every feature parameter.
inline std::uint64_t config_fingerprint(const FeatureConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  mix(std::bit_cast<std::uint64_t>(cfg.sigma));
  mix(static_cast<std::uint64_t>(cfg.resolved_support_radius()));
  mix(std::bit_cast<std::uint64_t>(cfg.radius));
  mix(static_cast<std::uint64_t>(cfg.neighbors));
  mix(static_cast<std::uint64_t>(cfg.mapping));
  mix(static_cast<std::uint64_t>(cfg.include_zeroth));
  mix(static_cast<std::uint64_t>(cfg.interpolation));
  mix(std::bit_cast<std::uint64_t>(cfg.weber));
  return h;
}

}  // namespace jetpat

#endif  // JETPAT_ENCODER_HPP
