#ifndef JETPAT_IMAGE_IO_HPP
#define JETPAT_IMAGE_IO_HPP

// Grayscale image reading (PGM/PPM/PNG) and debug writers (PGM, CSV).
// Color inputs are reduced to gray by averaging the three channels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

#include "jetpat/image.hpp"

namespace jetpat {

/// Raised for unreadable or malformed image files; the message names the path.
class ImageIoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void skip_pnm_space(std::istream& is) {
  for (;;) {
    const int c = is.peek();
    if (c == '#') {
      std::string comment;
      std::getline(is, comment);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      is.get();
    } else {
      return;
    }
  }
}

inline long read_pnm_int(std::istream& is, const std::string& path) {
  skip_pnm_space(is);
  long v = -1;
  if (!(is >> v) || v < 0) throw ImageIoError(path + ": malformed PNM header");
  return v;
}

inline GrayImage read_pnm(std::istream& is, const std::string& path) {
  char magic[2];
  is.read(magic, 2);
  const char kind = magic[1];
  const bool color = kind == '3' || kind == '6';
  const bool binary = kind == '5' || kind == '6';
  const auto w = static_cast<std::size_t>(read_pnm_int(is, path));
  const auto h = static_cast<std::size_t>(read_pnm_int(is, path));
  const long maxval = read_pnm_int(is, path);
  if (w == 0 || h == 0 || maxval <= 0 || maxval > 65535)
    throw ImageIoError(path + ": unsupported PNM dimensions or maxval");
  const std::size_t channels = color ? 3 : 1;
  std::vector<double> samples(w * h * channels);
  if (binary) {
    is.get();  // single whitespace before the raster
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(samples.size() * bytes_per);
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
      throw ImageIoError(path + ": truncated PNM raster");
    for (std::size_t i = 0; i < samples.size(); ++i)
      samples[i] = bytes_per == 2 ? (raw[2 * i] << 8) | raw[2 * i + 1] : raw[i];
  } else {
    for (double& s : samples) s = static_cast<double>(read_pnm_int(is, path));
  }
  GrayImage img(w, h);
  auto px = img.pixels();
  for (std::size_t i = 0; i < w * h; ++i)
    px[i] = color ? (samples[3 * i] + samples[3 * i + 1] + samples[3 * i + 2]) / 3.0 : samples[i];
  return img;
}

inline GrayImage read_png(const std::string& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str()))
    throw ImageIoError(path + ": " + png.message);
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw ImageIoError(path + ": " + msg);
  }
  GrayImage img(png.width, png.height);
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i)
    px[i] = color ? (buffer[3 * i] + buffer[3 * i + 1] + buffer[3 * i + 2]) / 3.0 : buffer[i];
  png_image_free(&png);
  return img;
}

}  // namespace detail

/// Reads a PGM/PPM (ASCII or binary, 8/16-bit) or PNG file, detected by content.
inline GrayImage read_image(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ImageIoError("cannot open image '" + path + "'");
  unsigned char sig[8] = {};
  is.read(reinterpret_cast<char*>(sig), 8);
  is.clear();
  is.seekg(0);
  if (png_sig_cmp(sig, 0, 8) == 0) return detail::read_png(path);
  if (sig[0] == 'P' && (sig[1] == '2' || sig[1] == '3' || sig[1] == '5' || sig[1] == '6'))
    return detail::read_pnm(is, path);
  throw ImageIoError(path + ": unsupported image format (expected PGM, PPM or PNG)");
}

/// Binary PGM; values are rounded and clamped to [0, maxval]. maxval > 255 writes 16-bit.
inline void write_pgm(const std::string& path, const GrayImage& img, unsigned maxval = 255) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ImageIoError("cannot write '" + path + "'");
  os << "P5\n" << img.width() << ' ' << img.height() << '\n' << maxval << '\n';
  for (double v : img.pixels()) {
    const auto q = static_cast<unsigned>(std::clamp(std::lround(v), 0L, static_cast<long>(maxval)));
    if (maxval > 255) os.put(static_cast<char>(q >> 8));
    os.put(static_cast<char>(q & 0xffu));
  }
  if (!os) throw ImageIoError("error writing '" + path + "'");
}

inline void write_csv(std::ostream& os, const GrayImage& img) {
  const auto old_precision = os.precision(17);
  for (std::size_t y = 0; y < img.height(); ++y) {
    const auto row = img.row(y);
    for (std::size_t x = 0; x < row.size(); ++x) os << (x ? "," : "") << row[x];
    os << '\n';
  }
  os.precision(old_precision);
}

/// Debug dump chosen by extension: ".pgm" writes 16-bit with the value range mapped
/// affinely onto [0, 65535]; anything else writes CSV.
inline void dump_channel(const std::string& path, const GrayImage& img) {
  if (std::filesystem::path(path).extension() == ".pgm") {
    const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
    const double span = *hi - *lo;
    GrayImage scaled(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i)
      scaled.pixels()[i] = span > 0.0 ? (img.pixels()[i] - *lo) / span * 65535.0 : 0.0;
    write_pgm(path, scaled, 65535);
    return;
  }
  std::ofstream os(path);
  if (!os) throw ImageIoError("cannot write '" + path + "'");
  write_csv(os, img);
}

}  // namespace jetpat

#endif  // JETPAT_IMAGE_IO_HPP
