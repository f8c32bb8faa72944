#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "sat2pano/geometry.hpp"
#include "sat2pano/raster.hpp"

// Brute-force references for testing the MPI renderers. Nothing here is used
// by the projection code itself.
namespace sat2pano::oracle {

using Rgb = std::array<float, 3>;

/// Axis-aligned opaque box standing on the ground. Footprint coordinates are
/// meters from the street camera in the satellite frame (x along +u, y along
/// +v); `height` is meters above ground.
struct Box {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  double height = 0.0;
  Rgb color{};

  bool contains(double x, double y) const {
    return x > x_min && x < x_max && y > y_min && y < y_max;
  }
};

/// Ground color varying linearly with position.
struct LinearGround {
  Rgb base{};
  Rgb slope_x{};
  Rgb slope_y{};

  Rgb operator()(double x, double y) const;
};

struct SyntheticScene {
  std::function<Rgb(double, double)> ground;
  std::vector<Box> boxes;
  int sat_size = 128;
  double scale = 4.0;  // pixels per meter
  double camera_height = 2.0;
  std::vector<double> plane_heights;  // camera-relative, decreasing

  SatelliteCamera camera() const {
    return SatelliteCamera::centered(sat_size, sat_size, scale);
  }
  double max_radius() const { return sat_size / (2.0 * scale); }

  /// Throws kInvalidArgument when a box leaves the inscribed circle, covers
  /// the camera, or has a height outside the plane range.
  void validate() const;

  /// Overhead render: box tops where a pixel center falls inside a box,
  /// ground color elsewhere.
  ImageBuffer render_satellite() const;
  /// Hard heights in the camera-relative plane frame.
  HeightMap render_heights() const;
};

struct SceneParams {
  int sat_size = 128;
  double scale = 4.0;
  double camera_height = 2.0;
  int n_planes = 32;
  double max_height = 8.0;
  int min_boxes = 1;
  int max_boxes = 4;
  double min_box_size = 2.0;   // meters
  double max_box_size = 6.0;   // meters
  double min_box_height = 1.0;
  double max_box_height = 7.0;
  double min_distance = 5.0;   // camera to nearest footprint point, meters
  double max_ground_slope = 0.01;  // color units per meter
};

/// Seeded random scene: smooth linear ground, non-overlapping boxes with
/// pixel-aligned footprints and heights snapped onto the plane grid.
SyntheticScene random_scene(std::uint64_t seed, const SceneParams& params = {});

enum class WallShading {
  kExtrudedTop,  // walls take the box top color, as an opaque column would
  kSentinel,     // walls take `sentinel_color`
};

struct RaycastOptions {
  WallShading walls = WallShading::kExtrudedTop;
  Rgb sentinel_color{1.0f, 0.0f, 1.0f};
  /// Ground hits farther than this horizontal distance are left empty;
  /// non-positive means the scene's inscribed circle.
  double max_radius = 0.0;
};

inline constexpr int kSurfaceEmpty = -1;
inline constexpr int kSurfaceGround = 0;
// Box k hits are reported as surface k + 1.

struct RaycastResult {
  ImageBuffer color;          // mask marks pixels that hit a surface
  std::vector<int> surface;   // per pixel
  std::vector<float> depth;   // ray length in meters, 0 when empty
};

/// Analytic ray casting of the scene from the street camera.
RaycastResult raycast_reference(const SyntheticScene& scene,
                                const PanoramaGeometry& g,
                                const RaycastOptions& options = {});

struct ForwardProjection {
  ImageBuffer color;         // mask marks filled pixels
  std::vector<float> depth;  // meters, +inf when unfilled
};

/// Forward z-buffer splatting: every supersampled satellite sample is lifted
/// to its height, extended into an opaque column down to ground, projected
/// into the panorama and kept if it is the nearest so far. Column samples
/// below the lowest 4-neighbour top are enclosed by the neighbours and are
/// skipped. Throws kInvalidArgument when supersample < 4 or the inputs
/// disagree in size.
ForwardProjection zbuffer_forward_project(const ImageBuffer& sat,
                                          const HeightMap& hard_heights,
                                          const PanoramaGeometry& g,
                                          const SatelliteCamera& cam,
                                          int supersample);

/// Marks every pixel within `radius` (8-connected, wrapping across the
/// azimuth seam) of a pixel with a different surface id.
std::vector<std::uint8_t> silhouette_band(const std::vector<int>& surface,
                                          int width, int height,
                                          int radius = 1);

}  // namespace sat2pano::oracle
