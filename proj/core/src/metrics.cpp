#include "sat2pano/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace sat2pano::metrics {
namespace {

template <typename T>
void require_same_shape(const Image<T>& a, const Image<T>& b,
                        std::span<const std::uint8_t> mask) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "images differ in shape: " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + "x" +
                    std::to_string(a.channels()) + " vs " +
                    std::to_string(b.width()) + "x" +
                    std::to_string(b.height()) + "x" +
                    std::to_string(b.channels()));
  }
  if (!mask.empty() && mask.size() != a.pixel_count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mask size does not match the images");
  }
}

bool is_valid(std::span<const std::uint8_t> mask, std::size_t px) {
  return mask.empty() || mask[px] != 0;
}

template <typename T>
ImageBufferD luma(const Image<T>& img) {
  return to_luma(img.template cast<double>());
}

using Moments = std::array<double, 6>;

// One separable pass of the Gaussian over `src` along rows or columns. Taps
// falling outside the raster are skipped.
void blur(const std::vector<Moments>& src, std::vector<Moments>& dst,
          int width, int height, const std::vector<double>& kernel,
          bool horizontal) {
  const int radius = static_cast<int>(kernel.size() / 2);
  const int extent = horizontal ? width : height;
  const std::size_t stride = horizontal ? 1 : static_cast<std::size_t>(width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int pos = horizontal ? c : r;
      const int lo = std::max(-radius, -pos);
      const int hi = std::min(radius, extent - 1 - pos);
      const std::size_t center = static_cast<std::size_t>(r) * width + c;
      Moments acc{};
      for (int k = lo; k <= hi; ++k) {
        const double w = kernel[k + radius];
        const Moments& m = src[center + k * static_cast<std::ptrdiff_t>(stride)];
        for (int f = 0; f < 6; ++f) acc[f] += w * m[f];
      }
      dst[center] = acc;
    }
  }
}

}  // namespace

template <typename T>
double rmse(const Image<T>& a, const Image<T>& b,
            std::span<const std::uint8_t> mask) {
  require_same_shape(a, b, mask);
  const auto da = a.data();
  const auto db = b.data();
  const int ch = a.channels();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t px = 0; px < a.pixel_count(); ++px) {
    if (!is_valid(mask, px)) continue;
    for (int c = 0; c < ch; ++c) {
      const double d = 255.0 * (static_cast<double>(da[px * ch + c]) -
                                static_cast<double>(db[px * ch + c]));
      sum += d * d;
    }
    count += ch;
  }
  if (count == 0) {
    throw Error(ErrorCode::kEmptyMask, "no valid pixels to compare");
  }
  return std::sqrt(sum / count);
}

double psnr_from_rmse(double rmse) {
  if (rmse == 0.0) return kInfinity;
  return 20.0 * std::log10(255.0 / rmse);
}

template <typename T>
double psnr(const Image<T>& a, const Image<T>& b,
            std::span<const std::uint8_t> mask) {
  return psnr_from_rmse(rmse(a, b, mask));
}

double ssim_luma(const ImageBufferD& a, const ImageBufferD& b,
                 std::span<const std::uint8_t> mask,
                 const SsimParams& params) {
  require_same_shape(a, b, mask);
  if (a.channels() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "ssim_luma expects luma images");
  }
  const int w = a.width();
  const int h = a.height();
  const std::size_t n = a.pixel_count();

  std::vector<double> kernel(2 * params.radius + 1);
  for (int k = -params.radius; k <= params.radius; ++k) {
    kernel[k + params.radius] =
        std::exp(-(k * k) / (2.0 * params.sigma * params.sigma));
  }

  // Masked moments: m, m x, m y, m x^2, m y^2, m x y.
  std::vector<Moments> fields(n, Moments{});
  std::size_t valid = 0;
  for (std::size_t px = 0; px < n; ++px) {
    if (!is_valid(mask, px)) continue;
    ++valid;
    const double x = 255.0 * a.data()[px];
    const double y = 255.0 * b.data()[px];
    fields[px] = {1.0, x, y, x * x, y * y, x * y};
  }
  if (valid == 0) {
    throw Error(ErrorCode::kEmptyMask, "no valid pixels for SSIM");
  }
  std::vector<Moments> tmp(n);
  blur(fields, tmp, w, h, kernel, true);
  blur(tmp, fields, w, h, kernel, false);

  const double c1 = (params.k1 * 255.0) * (params.k1 * 255.0);
  const double c2 = (params.k2 * 255.0) * (params.k2 * 255.0);
  double total = 0.0;
  for (std::size_t px = 0; px < n; ++px) {
    if (!is_valid(mask, px)) continue;
    const Moments& m = fields[px];
    const double weight = m[0];
    const double mx = m[1] / weight;
    const double my = m[2] / weight;
    const double sxx = m[3] / weight - mx * mx;
    const double syy = m[4] / weight - my * my;
    const double sxy = m[5] / weight - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) /
             ((mx * mx + my * my + c1) * (sxx + syy + c2));
  }
  return total / valid;
}

template <typename T>
double ssim(const Image<T>& a, const Image<T>& b,
            std::span<const std::uint8_t> mask, const SsimParams& params) {
  require_same_shape(a, b, mask);
  return ssim_luma(luma(a), luma(b), mask, params);
}

template <typename T>
double sharpness_difference(const Image<T>& a, const Image<T>& b,
                            std::span<const std::uint8_t> mask) {
  require_same_shape(a, b, mask);
  const int w = a.width();
  const int h = a.height();
  const int ch = a.channels();
  auto gradient = [&](const Image<T>& img, int r, int c, int k) {
    const double center = 255.0 * static_cast<double>(img.at(r, c, k));
    double g = 0.0;
    if (c + 1 < w && is_valid(mask, static_cast<std::size_t>(r) * w + c + 1)) {
      g += std::abs(255.0 * static_cast<double>(img.at(r, c + 1, k)) - center);
    }
    if (r + 1 < h && is_valid(mask, static_cast<std::size_t>(r + 1) * w + c)) {
      g += std::abs(255.0 * static_cast<double>(img.at(r + 1, c, k)) - center);
    }
    return g;
  };
  double sum = 0.0;
  std::size_t count = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!is_valid(mask, static_cast<std::size_t>(r) * w + c)) continue;
      for (int k = 0; k < ch; ++k) {
        sum += std::abs(gradient(a, r, c, k) - gradient(b, r, c, k));
      }
      count += ch;
    }
  }
  if (count == 0) {
    throw Error(ErrorCode::kEmptyMask, "no valid pixels to compare");
  }
  const double mean = sum / count;
  if (mean == 0.0) return kInfinity;
  return 10.0 * std::log10(255.0 * 255.0 / mean);
}

template <typename T>
MetricReport evaluate(const Image<T>& a, const Image<T>& b,
                      std::span<const std::uint8_t> mask) {
  MetricReport report;
  report.rmse = rmse(a, b, mask);
  report.psnr = psnr_from_rmse(report.rmse);
  report.ssim = ssim(a, b, mask);
  report.sd = sharpness_difference(a, b, mask);
  return report;
}

template <typename T>
std::vector<std::uint8_t> joint_mask(const Image<T>& a, const Image<T>& b) {
  if (!a.has_mask() && !b.has_mask()) return {};
  std::vector<std::uint8_t> mask(a.pixel_count(), 1);
  for (std::size_t px = 0; px < mask.size(); ++px) {
    const bool va = !a.has_mask() || a.mask()[px] != 0;
    const bool vb = !b.has_mask() || b.mask()[px] != 0;
    mask[px] = va && vb ? 1 : 0;
  }
  return mask;
}

#define SAT2PANO_INSTANTIATE(T)                                              \
  template double rmse(const Image<T>&, const Image<T>&,                    \
                       std::span<const std::uint8_t>);                      \
  template double psnr(const Image<T>&, const Image<T>&,                    \
                       std::span<const std::uint8_t>);                      \
  template double ssim(const Image<T>&, const Image<T>&,                    \
                       std::span<const std::uint8_t>, const SsimParams&);   \
  template double sharpness_difference(const Image<T>&, const Image<T>&,    \
                                       std::span<const std::uint8_t>);      \
  template MetricReport evaluate(const Image<T>&, const Image<T>&,          \
                                 std::span<const std::uint8_t>);            \
  template std::vector<std::uint8_t> joint_mask(const Image<T>&,            \
                                                const Image<T>&);

SAT2PANO_INSTANTIATE(float)
SAT2PANO_INSTANTIATE(double)

#undef SAT2PANO_INSTANTIATE

}  // namespace sat2pano::metrics
