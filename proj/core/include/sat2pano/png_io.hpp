#pragma once

#include <filesystem>

#include "sat2pano/raster.hpp"

namespace sat2pano {

/// Loads an 8- or 16-bit PNG. Gray and gray+alpha become one channel, RGB and
/// RGBA become three; alpha is dropped. Values are normalized to [0, 1].
/// Throws kIoError when the file cannot be read and kUnsupportedFormat for
/// anything libpng rejects (including truncated files).
ImageBuffer load_png(const std::filesystem::path& path);

/// Writes 8- or 16-bit PNG with pinned encoder settings, so equal images
/// produce byte-identical files.
void save_png(const std::filesystem::path& path, const ImageBuffer& img,
              int bit_depth = 8);

/// Writes the validity mask of `img` as an 8-bit 0/255 grayscale PNG. Images
/// without a mask produce an all-valid PNG.
void save_mask_png(const std::filesystem::path& path, const ImageBuffer& img);

/// 16-bit grayscale height map: meters = stored value * scale + offset.
HeightMap load_height_png(const std::filesystem::path& path, double scale,
                          double offset);
void save_height_png(const std::filesystem::path& path, const HeightMap& map,
                     double scale, double offset);

}  // namespace sat2pano
