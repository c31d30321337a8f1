#ifndef JETPAT_SERIALIZE_HPP
#define JETPAT_SERIALIZE_HPP

// On-disk formats. All integers and reals are little-endian.
//
// Feature cache:
//   "JPFC" u32 version
//   repeated: u32 path_len, path bytes, i32 label, u64 fingerprint, u32 n, n x f64
//
// NSC model:
//   "JPNS" u32 version, u32 class_count, u32 feature_dim
//   per class: i32 label, u32 n_c, feature_dim * n_c x f64 (basis, column-major)

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "jetpat/classify.hpp"

namespace jetpat {

inline constexpr std::uint32_t kFormatVersion = 1;

namespace detail {

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T)))
    throw std::runtime_error("unexpected end of file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

inline void put_magic(std::ostream& os, const char (&magic)[5]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char (&magic)[5], const char* what) {
  char got[4];
  if (!is.read(got, 4) || std::memcmp(got, magic, 4) != 0)
    throw std::runtime_error(std::string("not a ") + what + " file (bad magic)");
  const auto version = get_le<std::uint32_t>(is);
  if (version != kFormatVersion)
    throw std::runtime_error(std::string("unsupported ") + what + " version " +
                             std::to_string(version));
}

}  // namespace detail

struct CacheRecord {
  std::string path;
  ClassId label = 0;
  std::uint64_t fingerprint = 0;
  std::vector<double> values;
  friend bool operator==(const CacheRecord&, const CacheRecord&) = default;
};

inline void write_feature_cache(std::ostream& os, const std::vector<CacheRecord>& records) {
  detail::put_magic(os, "JPFC");
  detail::put_le(os, kFormatVersion);
  for (const auto& r : records) {
    detail::put_le(os, static_cast<std::uint32_t>(r.path.size()));
    os.write(r.path.data(), static_cast<std::streamsize>(r.path.size()));
    detail::put_le(os, static_cast<std::int32_t>(r.label));
    detail::put_le(os, r.fingerprint);
    detail::put_le(os, static_cast<std::uint32_t>(r.values.size()));
    for (double v : r.values) detail::put_le(os, v);
  }
  if (!os) throw std::runtime_error("write_feature_cache: stream error");
}

inline std::vector<CacheRecord> read_feature_cache(std::istream& is) {
  detail::expect_magic(is, "JPFC", "feature cache");
  std::vector<CacheRecord> out;
  while (is.peek() != std::char_traits<char>::eof()) {
    CacheRecord r;
    r.path.resize(detail::get_le<std::uint32_t>(is));
    if (!is.read(r.path.data(), static_cast<std::streamsize>(r.path.size())))
      throw std::runtime_error("feature cache: truncated path");
    r.label = detail::get_le<std::int32_t>(is);
    r.fingerprint = detail::get_le<std::uint64_t>(is);
    r.values.resize(detail::get_le<std::uint32_t>(is));
    for (double& v : r.values) v = detail::get_le<double>(is);
    out.push_back(std::move(r));
  }
  return out;
}

inline void save_feature_cache(const std::string& path, const std::vector<CacheRecord>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write feature cache " + path);
  write_feature_cache(os, records);
}

inline std::vector<CacheRecord> load_feature_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read feature cache " + path);
  return read_feature_cache(is);
}

/// CSV export: header path,label,f0..f{n-1}; values at full round-trip precision.
inline void write_feature_csv(std::ostream& os, const std::vector<CacheRecord>& records) {
  const std::size_t n = records.empty() ? 0 : records.front().values.size();
  os << "path,label";
  for (std::size_t i = 0; i < n; ++i) os << ",f" << i;
  os << '\n';
  const auto old_precision = os.precision(17);
  for (const auto& r : records) {
    os << r.path << ',' << r.label;
    for (double v : r.values) os << ',' << v;
    os << '\n';
  }
  os.precision(old_precision);
}

inline void write_models(std::ostream& os, const std::vector<ClassModel>& models) {
  const std::uint32_t dim = models.empty() ? 0 : static_cast<std::uint32_t>(models[0].feature_dim());
  detail::put_magic(os, "JPNS");
  detail::put_le(os, kFormatVersion);
  detail::put_le(os, static_cast<std::uint32_t>(models.size()));
  detail::put_le(os, dim);
  for (const auto& m : models) {
    if (m.feature_dim() != dim) throw std::invalid_argument("write_models: mixed feature dims");
    detail::put_le(os, static_cast<std::int32_t>(m.label));
    detail::put_le(os, static_cast<std::uint32_t>(m.subspace_dim()));
    for (Eigen::Index c = 0; c < m.basis.cols(); ++c)
      for (Eigen::Index r = 0; r < m.basis.rows(); ++r) detail::put_le(os, m.basis(r, c));
  }
  if (!os) throw std::runtime_error("write_models: stream error");
}

inline std::vector<ClassModel> read_models(std::istream& is) {
  detail::expect_magic(is, "JPNS", "NSC model");
  const auto count = detail::get_le<std::uint32_t>(is);
  const auto dim = detail::get_le<std::uint32_t>(is);
  std::vector<ClassModel> models(count);
  for (auto& m : models) {
    m.label = detail::get_le<std::int32_t>(is);
    const auto cols = detail::get_le<std::uint32_t>(is);
    m.basis.resize(dim, cols);
    for (Eigen::Index c = 0; c < m.basis.cols(); ++c)
      for (Eigen::Index r = 0; r < m.basis.rows(); ++r) m.basis(r, c) = detail::get_le<double>(is);
  }
  return models;
}

}  // namespace jetpat

#endif  // JETPAT_SERIALIZE_HPP
