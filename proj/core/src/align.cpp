#include "sat2pano/align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sat2pano/error.hpp"
#include "sat2pano/metrics.hpp"

namespace sat2pano::align {
namespace {

ImageBufferD crop_rows(const ImageBufferD& img, int first_row) {
  ImageBufferD out(img.width(), img.height() - first_row, img.channels());
  const std::size_t offset = img.index(first_row, 0);
  std::copy(img.data().begin() + offset, img.data().end(), out.data().begin());
  return out;
}

}  // namespace

void ShiftGrid::validate() const {
  if (n_u < 1 || n_v < 1) {
    throw Error(ErrorCode::kInvalidArgument, "shift grid needs >= 1 point per axis");
  }
  if (!(extent > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "shift grid extent must be positive");
  }
}

AlignmentSearch::AlignmentSearch(const ImageBuffer& sat,
                                 const ImageBuffer& pano,
                                 const SatelliteCamera& cam,
                                 const PanoramaGeometry& g)
    : cam_(cam), g_(g) {
  g.validate();
  cam.validate();
  if (pano.width() != g.width || pano.height() != g.height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "panorama raster does not match its geometry");
  }
  first_row_ = g.height;
  for (int r = 0; r < g.height; ++r) {
    if (clamp_theta(pano_pixel_to_angles(r, 0, g).theta, g) > kHalfPi) {
      first_row_ = r;
      break;
    }
  }
  if (first_row_ == g.height) {
    throw Error(ErrorCode::kEmptyValidRegion,
                "the panorama field of view has no rows below the horizon");
  }
  sat_luma_ = to_luma(sat.cast<double>());
  sat_luma_.clear_mask();
  const std::size_t n = static_cast<std::size_t>(g.height - first_row_) * g.width;
  offset_u_.resize(n);
  offset_v_.resize(n);
  std::size_t px = 0;
  for (int r = first_row_; r < g.height; ++r) {
    const double theta = clamp_theta(pano_pixel_to_angles(r, 0, g).theta, g);
    const double rho = -g.camera_height * std::tan(theta);
    for (int c = 0; c < g.width; ++c, ++px) {
      const double phi = pano_pixel_to_angles(r, c, g).phi + g.heading;
      offset_u_[px] = cam.scale * rho * std::cos(phi);
      offset_v_[px] = cam.scale * rho * std::sin(phi);
    }
  }

  ImageBufferD luma = to_luma(pano.cast<double>());
  pano_luma_ = crop_rows(luma, first_row_);
  pano_luma_.clear_mask();
  if (pano.has_mask()) {
    pano_mask_.assign(pano.mask().begin() + static_cast<std::ptrdiff_t>(
                                                first_row_) * g.width,
                      pano.mask().end());
  }
}

double AlignmentSearch::score(double du, double dv) const {
  const SatelliteCamera cam = cam_.shifted(du, dv);
  ImageBufferD projected(pano_luma_.width(), pano_luma_.height(), 1);
  std::vector<std::uint8_t> mask(projected.pixel_count(), 0);
  const auto src = sat_luma_.data();
  auto dst = projected.data();
  bool any = false;
  for (std::size_t px = 0; px < mask.size(); ++px) {
    if (!pano_mask_.empty() && pano_mask_[px] == 0) continue;
    const BilinearTaps taps =
        bilinear_taps(sat_luma_.width(), sat_luma_.height(),
                      cam.center_u + offset_u_[px], cam.center_v + offset_v_[px]);
    if (!taps.inside) continue;
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) acc += taps.weight[k] * src[taps.pixel[k]];
    dst[px] = acc;
    mask[px] = 1;
    any = true;
  }
  if (!any) return -1.0;
  return metrics::ssim_luma(projected, pano_luma_, mask);
}

AlignmentResult select_best(std::vector<double> score_map,
                            const ShiftGrid& grid) {
  grid.validate();
  if (score_map.size() != static_cast<std::size_t>(grid.n_u) * grid.n_v) {
    throw Error(ErrorCode::kDimensionMismatch,
                "score map does not match the shift grid");
  }
  AlignmentResult result;
  result.grid = grid;
  const auto [lo, hi] = std::minmax_element(score_map.begin(), score_map.end());
  const double best = *hi;
  result.degenerate = *hi - *lo <= kTieTolerance;

  double best_magnitude = std::numeric_limits<double>::infinity();
  for (int iv = 0; iv < grid.n_v; ++iv) {
    for (int iu = 0; iu < grid.n_u; ++iu) {
      if (best - score_map[static_cast<std::size_t>(iv) * grid.n_u + iu] >
          kTieTolerance) {
        continue;
      }
      const double magnitude = std::hypot(grid.offset_u(iu), grid.offset_v(iv));
      if (magnitude < best_magnitude) {
        best_magnitude = magnitude;
        result.best_iu = iu;
        result.best_iv = iv;
      }
    }
  }
  result.best_score =
      score_map[static_cast<std::size_t>(result.best_iv) * grid.n_u +
                result.best_iu];
  // 0 - x rather than -x keeps a zero offset from turning into -0.
  result.best_du = 0.0 - grid.offset_u(result.best_iu);
  result.best_dv = 0.0 - grid.offset_v(result.best_iv);
  result.unalignable = result.best_score < kUnalignableSsim;
  result.score_map = std::move(score_map);
  return result;
}

AlignmentResult align_pair(const ImageBuffer& sat, const ImageBuffer& pano,
                           const SatelliteCamera& cam,
                           const PanoramaGeometry& g, const ShiftGrid& grid) {
  grid.validate();
  const AlignmentSearch search(sat, pano, cam, g);
  std::vector<double> scores(static_cast<std::size_t>(grid.n_u) * grid.n_v);
  for (int iv = 0; iv < grid.n_v; ++iv) {
    for (int iu = 0; iu < grid.n_u; ++iu) {
      scores[static_cast<std::size_t>(iv) * grid.n_u + iu] =
          search.score(grid.offset_u(iu), grid.offset_v(iv));
    }
  }
  return select_best(std::move(scores), grid);
}

}  // namespace sat2pano::align
