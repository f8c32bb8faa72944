#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "sat2pano/geometry.hpp"
#include "sat2pano/raster.hpp"

namespace sat2pano {

/// Minimum accumulated opacity for a composited pixel to count as valid.
inline constexpr float kCoverageThreshold = 0.5f;

/// `n_planes` heights, strictly decreasing, evenly spaced from
/// `max_height - camera_height` down to the ground plane at -camera_height.
/// A single plane is the ground plane.
std::vector<double> uniform_plane_heights(int n_planes, double camera_height,
                                          double max_height = 8.0);

/// Throws kInvalidArgument unless the heights are finite and strictly
/// decreasing.
void validate_plane_heights(std::span<const double> plane_heights);

/// Per-pixel categorical distribution over the discrete plane heights.
/// Storage order is (row, col, plane).
class HeightProbabilityVolume {
 public:
  HeightProbabilityVolume() = default;
  HeightProbabilityVolume(int width, int height,
                          std::vector<double> plane_heights);

  int width() const { return width_; }
  int height() const { return height_; }
  int n_planes() const { return static_cast<int>(plane_heights_.size()); }
  const std::vector<double>& plane_heights() const { return plane_heights_; }

  std::span<float> probabilities(int row, int col) {
    return {data_.data() + offset(row, col), plane_heights_.size()};
  }
  std::span<const float> probabilities(int row, int col) const {
    return {data_.data() + offset(row, col), plane_heights_.size()};
  }
  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  /// Checks the distribution invariants: entries in [0, 1] and every pixel
  /// summing to one within `tolerance`.
  void validate(double tolerance = 1e-5) const;

 private:
  std::size_t offset(int row, int col) const {
    return (static_cast<std::size_t>(row) * width_ + col) *
           plane_heights_.size();
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> plane_heights_;
  std::vector<float> data_;
};

/// Splits each pixel's unit mass linearly between the two planes that
/// bracket its height; heights on a plane give a one-hot vector.
/// Throws kHeightOutOfRange naming the first offending pixel.
HeightProbabilityVolume heightmap_to_distribution(
    const HeightMap& hmap, const std::vector<double>& plane_heights);

/// Probability-weighted mean height per pixel.
HeightMap expected_height(const HeightProbabilityVolume& d);

/// Overhead multiplane image. Every plane shares the satellite colors; the
/// alpha of plane i is the probability that the surface reaches at least
/// plane i, so alphas grow with the plane index and the ground plane is
/// opaque.
struct SatelliteMpi {
  ImageBuffer colors;         // 3 channels
  std::vector<float> alphas;  // n_planes x height x width
  std::vector<double> plane_heights;

  int width() const { return colors.width(); }
  int height() const { return colors.height(); }
  int n_planes() const { return static_cast<int>(plane_heights.size()); }
  std::span<const float> alpha_plane(int i) const {
    return {alphas.data() + static_cast<std::size_t>(i) * colors.pixel_count(),
            colors.pixel_count()};
  }
  std::span<float> alpha_plane(int i) {
    return {alphas.data() + static_cast<std::size_t>(i) * colors.pixel_count(),
            colors.pixel_count()};
  }
};

/// Throws kDimensionMismatch if the image and volume rasters differ.
SatelliteMpi build_satellite_mpi(const ImageBuffer& img,
                                 const HeightProbabilityVolume& d);

/// Straight (non-premultiplied) RGBA planes at panorama resolution, one per
/// cylinder radius. Plane 0 is the farthest.
struct StreetMpi {
  int width = 0;
  int height = 0;
  std::vector<double> radii;
  std::vector<float> rgba;  // m_planes x height x width x 4

  int m_planes() const { return static_cast<int>(radii.size()); }
  std::span<const float> plane(int j) const {
    const std::size_t n = static_cast<std::size_t>(width) * height * 4;
    return {rgba.data() + j * n, n};
  }
  std::span<float> plane(int j) {
    const std::size_t n = static_cast<std::size_t>(width) * height * 4;
    return {rgba.data() + j * n, n};
  }
};

/// `m_planes` radii uniform in (0, max_radius], largest first.
std::vector<double> uniform_radii(int m_planes, double max_radius);

/// Half-extent of the satellite raster in meters (the largest cylinder that
/// still lies inside the image).
double default_max_radius(int sat_width, int sat_height, double scale);

/// Resamples the overhead MPI onto concentric cylinders around the street
/// camera. Colors are resampled with alpha weighting so that transparent
/// neighbours never bleed into opaque samples. Rays below the ground plane
/// take the ground alpha; points above the top plane or outside the raster
/// are transparent.
StreetMpi project_depthwise(const SatelliteMpi& mpi, const PanoramaGeometry& g,
                            int m_planes, double max_radius,
                            const SatelliteCamera& cam);

/// Back-to-front "over" compositing. Output is RGB with a validity mask set
/// where the accumulated opacity reaches kCoverageThreshold.
/// Throws kEmptyStack for an empty stack.
ImageBuffer composite(const StreetMpi& s);

/// Contribution of each plane (far to near) to the composited color:
/// alpha_j * prod_{k > j} (1 - alpha_k).
std::vector<double> effective_weights(std::span<const float> alphas);

enum class PlaneHalf { kTop, kBottom, kEquator };

struct StackPlane {
  double z = 0.0;
  PlaneHalf half = PlaneHalf::kBottom;
  std::vector<float> rgba;  // height x width x 4
};

/// Satellite planes warped into the panorama and sorted far to near within
/// each half: decreasing z above the horizon, increasing z below it.
struct OrderedPlaneStack {
  int width = 0;
  int height = 0;
  std::vector<StackPlane> planes;

  void validate() const;
};

OrderedPlaneStack project_heightwise(const SatelliteMpi& mpi,
                                     const PanoramaGeometry& g,
                                     const SatelliteCamera& cam);

ImageBuffer composite(const OrderedPlaneStack& s);

/// Warps the satellite image to the panorama assuming a flat world at ground
/// height. Rows at or above the horizon are black and masked invalid.
ImageBuffer ground_plane_project(const ImageBuffer& img,
                                 const PanoramaGeometry& g,
                                 const SatelliteCamera& cam);

/// Radius-to-row, azimuth-to-column unrolling of the satellite image about
/// the camera center. The bottom row samples the center, the top row
/// approaches the inscribed circle.
ImageBuffer polar_transform(const ImageBuffer& img, int out_width,
                            int out_height, const SatelliteCamera& cam);

/// Flattens a panorama onto the ground plane as seen from above. `cam`
/// describes the output raster; pixels looking outside the panorama field
/// of view are black and masked invalid.
ImageBuffer street_to_satellite_ground(const ImageBuffer& pano,
                                       const PanoramaGeometry& g,
                                       const SatelliteCamera& cam,
                                       int out_size);

/// Bilinear panorama lookup that wraps across the azimuth seam and clamps
/// rows at the field-of-view edges.
Sample sample_panorama(const ImageBuffer& pano, double row, double col);

/// HPV1 volume files: "HPV1", u32 width, u32 height, u32 n_planes, n_planes
/// f32 heights, then f32 probabilities in (row, col, plane) order, all
/// little-endian.
void write_hpv(const std::filesystem::path& path,
               const HeightProbabilityVolume& d);
HeightProbabilityVolume read_hpv(const std::filesystem::path& path);

}  // namespace sat2pano
