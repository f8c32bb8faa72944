#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sat2pano/error.hpp"

namespace sat2pano {

/// Row-major interleaved raster with 1 or 3 channels and an optional
/// per-pixel validity mask (1 = valid). Color values live in [0, 1].
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, int channels, T fill = T{0})
      : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1) {
      throw Error(ErrorCode::kZeroDimension,
                  "image dimensions must be positive, got " +
                      std::to_string(width) + "x" + std::to_string(height));
    }
    if (channels != 1 && channels != 3) {
      throw Error(ErrorCode::kInvalidArgument,
                  "images have 1 or 3 channels, got " +
                      std::to_string(channels));
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }

  std::size_t index(int row, int col) const {
    return (static_cast<std::size_t>(row) * width_ + col) * channels_;
  }
  T& at(int row, int col, int ch = 0) { return data_[index(row, col) + ch]; }
  const T& at(int row, int col, int ch = 0) const {
    return data_[index(row, col) + ch];
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool has_mask() const { return !mask_.empty(); }
  /// Creates (or resets) the mask with every pixel set to `valid`.
  void reset_mask(bool valid) { mask_.assign(pixel_count(), valid ? 1 : 0); }
  void clear_mask() { mask_.clear(); }
  std::span<std::uint8_t> mask() { return mask_; }
  std::span<const std::uint8_t> mask() const { return mask_; }
  bool valid(int row, int col) const {
    return mask_.empty() ||
           mask_[static_cast<std::size_t>(row) * width_ + col] != 0;
  }

  void clamp01() {
    for (T& x : data_) x = std::clamp(x, T{0}, T{1});
  }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  template <typename U>
  Image<U> cast() const {
    Image<U> out(width_, height_, channels_);
    std::transform(data_.begin(), data_.end(), out.data().begin(),
                   [](T x) { return static_cast<U>(x); });
    if (has_mask()) {
      out.reset_mask(true);
      std::copy(mask_.begin(), mask_.end(), out.mask().begin());
    }
    return out;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
  std::vector<std::uint8_t> mask_;
};

using ImageBuffer = Image<float>;
using ImageBufferD = Image<double>;

/// Grayscale raster of heights in meters. Heights are expressed in the same
/// frame as MPI plane heights (relative to the street camera).
struct HeightMap {
  int width = 0;
  int height = 0;
  std::vector<float> meters;

  HeightMap() = default;
  HeightMap(int w, int h, float fill = 0.0f)
      : width(w), height(h),
        meters(static_cast<std::size_t>(w) * h, fill) {
    if (w < 1 || h < 1) {
      throw Error(ErrorCode::kZeroDimension, "height map must be non-empty");
    }
  }
  float& at(int row, int col) {
    return meters[static_cast<std::size_t>(row) * width + col];
  }
  float at(int row, int col) const {
    return meters[static_cast<std::size_t>(row) * width + col];
  }
};

/// Four-neighbour bilinear stencil. The raster covers [-0.5, W - 0.5] x
/// [-0.5, H - 0.5]; inside that area the position is clamped onto the grid
/// of pixel centers, outside it `inside` is false and all weights are zero.
struct BilinearTaps {
  std::array<std::size_t, 4> pixel{};  // row * width + col
  std::array<float, 4> weight{};
  bool inside = false;
};

inline BilinearTaps bilinear_taps(int width, int height, double u, double v) {
  BilinearTaps taps;
  if (!(u >= -0.5 && u <= width - 0.5 && v >= -0.5 && v <= height - 0.5)) {
    return taps;
  }
  taps.inside = true;
  const double uc = std::clamp(u, 0.0, static_cast<double>(width - 1));
  const double vc = std::clamp(v, 0.0, static_cast<double>(height - 1));
  const int x0 = static_cast<int>(uc);
  const int y0 = static_cast<int>(vc);
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const float fx = static_cast<float>(uc - x0);
  const float fy = static_cast<float>(vc - y0);
  const auto w = static_cast<std::size_t>(width);
  taps.pixel = {y0 * w + x0, y0 * w + x1, y1 * w + x0, y1 * w + x1};
  taps.weight = {(1.0f - fx) * (1.0f - fy), fx * (1.0f - fy),
                 (1.0f - fx) * fy, fx * fy};
  return taps;
}

struct Sample {
  std::array<float, 3> value{};
  bool inside = false;
};

/// Bilinear interpolation at fractional column `u` and row `v`. Integer
/// positions reproduce the pixel exactly.
template <typename T>
Sample bilinear_sample(const Image<T>& img, double u, double v) {
  Sample s;
  const BilinearTaps taps = bilinear_taps(img.width(), img.height(), u, v);
  if (!taps.inside) return s;
  s.inside = true;
  const auto data = img.data();
  const int ch = img.channels();
  for (int c = 0; c < ch; ++c) {
    float acc = 0.0f;
    for (int k = 0; k < 4; ++k) {
      acc += taps.weight[k] *
             static_cast<float>(data[taps.pixel[k] * ch + c]);
    }
    s.value[c] = acc;
  }
  return s;
}

/// Bilinear resize with pixel-center alignment. Same-size calls return an
/// exact copy. Throws kZeroDimension for empty targets.
ImageBuffer resize(const ImageBuffer& img, int new_width, int new_height);

/// Rec. 601 luma on the 0..1 scale, one channel.
ImageBufferD to_luma(const ImageBufferD& img);

}  // namespace sat2pano
