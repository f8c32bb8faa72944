#include "sat2pano/raster.hpp"

namespace sat2pano {

ImageBuffer resize(const ImageBuffer& img, int new_width, int new_height) {
  if (new_width < 1 || new_height < 1) {
    throw Error(ErrorCode::kZeroDimension,
                "resize target must be at least 1x1");
  }
  if (img.empty()) {
    throw Error(ErrorCode::kZeroDimension, "cannot resize an empty image");
  }
  if (new_width == img.width() && new_height == img.height()) return img;

  ImageBuffer out(new_width, new_height, img.channels());
  const double sx = static_cast<double>(img.width()) / new_width;
  const double sy = static_cast<double>(img.height()) / new_height;
  for (int r = 0; r < new_height; ++r) {
    const double v = std::clamp((r + 0.5) * sy - 0.5, 0.0,
                                static_cast<double>(img.height() - 1));
    for (int c = 0; c < new_width; ++c) {
      const double u = std::clamp((c + 0.5) * sx - 0.5, 0.0,
                                  static_cast<double>(img.width() - 1));
      const Sample s = bilinear_sample(img, u, v);
      for (int ch = 0; ch < img.channels(); ++ch) out.at(r, c, ch) = s.value[ch];
    }
  }
  return out;
}

ImageBufferD to_luma(const ImageBufferD& img) {
  if (img.channels() == 1) return img;
  ImageBufferD out(img.width(), img.height(), 1);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      out.at(r, c) = 0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) +
                     0.114 * img.at(r, c, 2);
    }
  }
  if (img.has_mask()) {
    out.reset_mask(true);
    std::copy(img.mask().begin(), img.mask().end(), out.mask().begin());
  }
  return out;
}

}  // namespace sat2pano
