#pragma once

#include <vector>

#include "sat2pano/geometry.hpp"
#include "sat2pano/raster.hpp"

namespace sat2pano::align {

/// Pairs whose best SSIM falls below this are flagged as unalignable.
inline constexpr double kUnalignableSsim = 0.2;
/// Scores this close to the maximum are treated as ties.
inline constexpr double kTieTolerance = 1e-9;

/// Square grid of candidate camera positions around the satellite center.
struct ShiftGrid {
  int n_u = 40;
  int n_v = 40;
  double extent = 11.25;  // meters, edge length of the searched square

  void validate() const;
  double step_u() const { return n_u > 1 ? extent / (n_u - 1) : 0.0; }
  double step_v() const { return n_v > 1 ? extent / (n_v - 1) : 0.0; }
  /// Candidate camera offset (meters) of grid column `iu` / row `iv`.
  double offset_u(int iu) const {
    return n_u > 1 ? -extent / 2.0 + iu * step_u() : 0.0;
  }
  double offset_v(int iv) const {
    return n_v > 1 ? -extent / 2.0 + iv * step_v() : 0.0;
  }
};

struct AlignmentResult {
  /// Correction in meters to apply to the satellite image so its center
  /// lands on the street camera; the camera itself sits at -best_shift.
  double best_du = 0.0;
  double best_dv = 0.0;
  double best_score = 0.0;
  int best_iu = 0;
  int best_iv = 0;
  ShiftGrid grid;
  std::vector<double> score_map;  // n_v rows x n_u columns
  bool degenerate = false;        // every candidate scored the same
  bool unalignable = false;       // best_score < kUnalignableSsim
};

/// Scores candidate camera positions for one satellite/panorama pair by
/// ground-plane projection and SSIM over the valid below-horizon region.
class AlignmentSearch {
 public:
  /// Throws kEmptyValidRegion when the panorama has no rows below the
  /// horizon and kDimensionMismatch when `pano` does not match `g`.
  AlignmentSearch(const ImageBuffer& sat, const ImageBuffer& pano,
                  const SatelliteCamera& cam, const PanoramaGeometry& g);

  /// SSIM with the street camera placed (du, dv) meters from the satellite
  /// center. Returns -1 if the projection leaves nothing to compare.
  double score(double du, double dv) const;

 private:
  // The ground warp of a shifted camera only translates the sample
  // positions, so the per-pixel offsets from the camera are cached.
  ImageBufferD sat_luma_;
  SatelliteCamera cam_;
  PanoramaGeometry g_;
  int first_row_ = 0;
  std::vector<double> offset_u_;  // pixels, one per compared pano pixel
  std::vector<double> offset_v_;
  ImageBufferD pano_luma_;  // rows [first_row_, height)
  std::vector<std::uint8_t> pano_mask_;
};

/// Argmax over a score map with the deterministic tie-break: smallest shift
/// magnitude first, then row-major grid order.
AlignmentResult select_best(std::vector<double> score_map,
                            const ShiftGrid& grid);

AlignmentResult align_pair(const ImageBuffer& sat, const ImageBuffer& pano,
                           const SatelliteCamera& cam,
                           const PanoramaGeometry& g,
                           const ShiftGrid& grid = {});

}  // namespace sat2pano::align
