#ifndef JETPAT_IMAGE_HPP
#define JETPAT_IMAGE_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jetpat {

/// Dense row-major 2-D image. x indexes columns, y indexes rows (downwards).
template <typename T>
class Image {
public:
  using value_type = T;

  Image() = default;
  Image(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), pixels_(width * height, fill) {}
  Image(std::size_t width, std::size_t height, std::vector<T> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (pixels_.size() != width_ * height_)
      throw std::invalid_argument("Image: pixel count " + std::to_string(pixels_.size()) +
                                  " does not match " + std::to_string(width_) + "x" +
                                  std::to_string(height_));
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  T& operator()(std::size_t x, std::size_t y) noexcept { return pixels_[y * width_ + x]; }
  const T& operator()(std::size_t x, std::size_t y) const noexcept {
    return pixels_[y * width_ + x];
  }

  std::span<T> row(std::size_t y) noexcept { return {pixels_.data() + y * width_, width_}; }
  std::span<const T> row(std::size_t y) const noexcept {
    return {pixels_.data() + y * width_, width_};
  }

  std::span<T> pixels() noexcept { return pixels_; }
  std::span<const T> pixels() const noexcept { return pixels_; }
  T* data() noexcept { return pixels_.data(); }
  const T* data() const noexcept { return pixels_.data(); }

  friend bool operator==(const Image&, const Image&) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> pixels_;
};

using GrayImage = Image<double>;

}  // namespace jetpat

#endif  // JETPAT_IMAGE_HPP
