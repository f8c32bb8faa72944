#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "sat2pano/raster.hpp"

namespace sat2pano::metrics {

/// Returned by psnr and sharpness_difference when the two images agree
/// exactly.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct MetricReport {
  double rmse = 0.0;  // 0..255 scale
  double ssim = 0.0;
  double psnr = 0.0;  // dB
  double sd = 0.0;    // dB
};

/// SSIM parameters: Gaussian window of `radius` (11x11 by default) with
/// standard deviation `sigma`, stabilizers (k1 L)^2 and (k2 L)^2 on L = 255.
struct SsimParams {
  int radius = 5;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

// Masks are per pixel (1 = valid); an empty span means every pixel counts.
// All functions throw kDimensionMismatch when the shapes differ.

/// Root mean square difference over valid pixels and channels, on the
/// 0..255 scale. Throws kEmptyMask when no pixel is valid.
template <typename T>
double rmse(const Image<T>& a, const Image<T>& b,
            std::span<const std::uint8_t> mask = {});

double psnr_from_rmse(double rmse);

template <typename T>
double psnr(const Image<T>& a, const Image<T>& b,
            std::span<const std::uint8_t> mask = {});

/// Mean local SSIM on luma. Window statistics are weighted by the Gaussian
/// times the mask, so invalid pixels never enter a window, and the map is
/// averaged over valid pixels.
template <typename T>
double ssim(const Image<T>& a, const Image<T>& b,
            std::span<const std::uint8_t> mask = {},
            const SsimParams& params = {});

/// SSIM on precomputed single-channel luma rasters in [0, 1].
double ssim_luma(const ImageBufferD& a, const ImageBufferD& b,
                 std::span<const std::uint8_t> mask,
                 const SsimParams& params = {});

/// 10 log10(255^2 / mean |G(a) - G(b)|) with G = |d/du| + |d/dv| from forward
/// differences on the 0..255 scale, per channel. A difference is dropped at
/// the last row/column and wherever its neighbour is masked out.
template <typename T>
double sharpness_difference(const Image<T>& a, const Image<T>& b,
                            std::span<const std::uint8_t> mask = {});

template <typename T>
MetricReport evaluate(const Image<T>& a, const Image<T>& b,
                      std::span<const std::uint8_t> mask = {});

/// Logical AND of the two images' validity masks; empty if neither has one.
template <typename T>
std::vector<std::uint8_t> joint_mask(const Image<T>& a, const Image<T>& b);

}  // namespace sat2pano::metrics
