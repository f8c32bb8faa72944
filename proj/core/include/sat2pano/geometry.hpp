#pragma once

#include <cmath>
#include <numbers>

namespace sat2pano {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// Overhead camera with a parallel (orthographic) projection.
/// `scale` is pixels per meter; the center is the pixel under the street
/// camera. Pixel centers sit on integer coordinates, so for a W x H raster
/// the geometric center is ((W - 1) / 2, (H - 1) / 2).
struct SatelliteCamera {
  double center_u = 0.0;
  double center_v = 0.0;
  double scale = 1.0;

  void validate() const;

  static SatelliteCamera centered(int width, int height, double scale);

  /// Same camera with the center moved by (du, dv) meters along u and v.
  SatelliteCamera shifted(double du_m, double dv_m) const {
    return {center_u + scale * du_m, center_v + scale * dv_m, scale};
  }
};

/// Equirectangular panorama raster. Rows span [theta_min, theta_max]
/// (theta = 0 looks straight up), columns always span the full circle.
/// `heading` is added to every column azimuth before it is related to the
/// satellite raster; it is zero when column phi = 0 faces the +u axis.
struct PanoramaGeometry {
  int width = 512;
  int height = 128;
  double theta_min = 0.0;
  double theta_max = kPi;
  double camera_height = 2.0;
  double heading = 0.0;

  void validate() const;

  double row_step() const { return (theta_max - theta_min) / height; }
  double col_step() const { return 2.0 * kPi / width; }

  /// 180 degree vertical field of view.
  static PanoramaGeometry full_sphere(int width, int height,
                                      double camera_height = 2.0);
  /// 90 degree vertical field of view centered on the horizon.
  static PanoramaGeometry horizon_band(int width, int height,
                                       double camera_height = 2.0);
};

/// Street-camera frame: origin at the street camera, z up, x parallel to
/// the satellite v axis and y parallel to the u axis.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Satellite-camera frame used by the parallel projection: x runs along u,
/// y along v, z up.
struct SatelliteFramePoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct SphericalCoord {
  double theta = 0.0;
  double phi = 0.0;
};

struct SatellitePixel {
  double u = 0.0;
  double v = 0.0;
};

/// A point of the overhead multiplane volume: raster position plus height
/// (meters, relative to the street camera).
struct MpiPoint {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
};

struct PanoPixel {
  double row = 0.0;
  double col = 0.0;
  bool out_of_fov = false;
};

inline SatelliteFramePoint to_satellite_frame(const WorldPoint& p) {
  return {p.y, p.x, p.z};
}

/// Wraps an angle into [-pi, pi).
double wrap_phi(double phi);

SatellitePixel world_to_satellite(const SatelliteFramePoint& p,
                                  const SatelliteCamera& cam);

/// Throws kOriginPoint for the origin.
SphericalCoord world_to_panorama(const WorldPoint& p);

/// Direction from the street camera to the point at raster position (u, v)
/// and height z. Throws kDegeneratePoint when the point coincides with the
/// camera.
SphericalCoord satellite_to_panorama(double u, double v, double z,
                                     const SatelliteCamera& cam);

/// Intersection of the viewing ray `c` with the vertical cylinder of radius
/// `r` meters. Rays along the vertical axis only meet the degenerate r = 0
/// cylinder; they return z = +/-infinity there and throw kPoleRay otherwise.
MpiPoint panorama_ray_to_satellite(const SphericalCoord& c, double r,
                                   const SatelliteCamera& cam);

SphericalCoord pano_pixel_to_angles(int row, int col,
                                    const PanoramaGeometry& g);

/// Fractional raster position of a direction; pixel centers land on
/// integers. Phi wraps, theta is clamped into the field of view and the
/// clamp is reported through `out_of_fov`.
PanoPixel angles_to_pano_pixel(const SphericalCoord& c,
                               const PanoramaGeometry& g);

/// Keeps theta half a row away from the field-of-view bounds so cylinder
/// intersections never hit a pole.
double clamp_theta(double theta, const PanoramaGeometry& g);

}  // namespace sat2pano
