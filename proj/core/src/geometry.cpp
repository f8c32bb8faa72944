#include "sat2pano/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "sat2pano/error.hpp"

namespace sat2pano {
namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

void SatelliteCamera::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidArgument,
                "satellite scale must be positive, got " +
                    std::to_string(scale));
  }
  if (!std::isfinite(center_u) || !std::isfinite(center_v)) {
    throw Error(ErrorCode::kInvalidArgument,
                "satellite center must be finite");
  }
}

SatelliteCamera SatelliteCamera::centered(int width, int height,
                                          double scale) {
  SatelliteCamera cam{(width - 1) / 2.0, (height - 1) / 2.0, scale};
  cam.validate();
  return cam;
}

void PanoramaGeometry::validate() const {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kZeroDimension, "panorama must be at least 1x1");
  }
  if (!(theta_min >= 0.0 && theta_min < theta_max && theta_max <= kPi)) {
    throw Error(ErrorCode::kInvalidArgument,
                "panorama theta bounds must satisfy 0 <= min < max <= pi");
  }
  if (!(camera_height > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "camera height must be positive");
  }
  if (!std::isfinite(heading)) {
    throw Error(ErrorCode::kInvalidArgument, "heading must be finite");
  }
}

PanoramaGeometry PanoramaGeometry::full_sphere(int width, int height,
                                               double camera_height) {
  PanoramaGeometry g{width, height, 0.0, kPi, camera_height, 0.0};
  g.validate();
  return g;
}

PanoramaGeometry PanoramaGeometry::horizon_band(int width, int height,
                                                double camera_height) {
  PanoramaGeometry g{width, height, kPi / 4.0, 3.0 * kPi / 4.0,
                     camera_height, 0.0};
  g.validate();
  return g;
}

double wrap_phi(double phi) {
  if (phi >= -kPi && phi < kPi) return phi;
  double wrapped = std::fmod(phi + kPi, 2.0 * kPi);
  if (wrapped < 0.0) wrapped += 2.0 * kPi;
  return wrapped - kPi;
}

SatellitePixel world_to_satellite(const SatelliteFramePoint& p,
                                  const SatelliteCamera& cam) {
  return {cam.center_u + cam.scale * p.x, cam.center_v + cam.scale * p.y};
}

SphericalCoord world_to_panorama(const WorldPoint& p) {
  if (p.x == 0.0 && p.y == 0.0 && p.z == 0.0) {
    throw Error(ErrorCode::kOriginPoint,
                "direction of the camera origin is undefined");
  }
  SphericalCoord c;
  c.theta = p.z != 0.0 ? std::atan2(std::hypot(p.x, p.y), p.z) : kHalfPi;
  c.phi = p.y != 0.0 ? std::atan2(p.x, p.y) : kHalfPi * sign(p.x);
  return c;
}

SphericalCoord satellite_to_panorama(double u, double v, double z,
                                     const SatelliteCamera& cam) {
  const double du = u - cam.center_u;
  const double dv = v - cam.center_v;
  if (du == 0.0 && dv == 0.0 && z == 0.0) {
    throw Error(ErrorCode::kDegeneratePoint,
                "point coincides with the street camera");
  }
  SphericalCoord c;
  c.theta = z != 0.0 ? std::atan2(std::hypot(dv, du), cam.scale * z) : kHalfPi;
  c.phi = du != 0.0 ? std::atan2(dv, du) : kHalfPi * sign(dv);
  return c;
}

MpiPoint panorama_ray_to_satellite(const SphericalCoord& c, double r,
                                   const SatelliteCamera& cam) {
  if (!(r >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cylinder radius must be >= 0");
  }
  if (c.theta == 0.0 || c.theta == kPi) {
    if (r > 0.0) {
      throw Error(ErrorCode::kPoleRay,
                  "a vertical ray never meets a cylinder of positive radius");
    }
    const double inf = std::numeric_limits<double>::infinity();
    return {cam.center_u, cam.center_v, c.theta == 0.0 ? inf : -inf};
  }
  MpiPoint p;
  p.u = cam.center_u + cam.scale * r * std::cos(c.phi);
  p.v = cam.center_v + cam.scale * r * std::sin(c.phi);
  p.z = c.theta == kHalfPi ? 0.0 : r / std::tan(c.theta);
  return p;
}

SphericalCoord pano_pixel_to_angles(int row, int col,
                                    const PanoramaGeometry& g) {
  return {g.theta_min + (row + 0.5) * g.row_step(),
          -kPi + (col + 0.5) * g.col_step()};
}

PanoPixel angles_to_pano_pixel(const SphericalCoord& c,
                               const PanoramaGeometry& g) {
  PanoPixel px;
  double theta = c.theta;
  if (theta < g.theta_min || theta > g.theta_max) {
    px.out_of_fov = true;
    theta = std::clamp(theta, g.theta_min, g.theta_max);
  }
  px.row = (theta - g.theta_min) / g.row_step() - 0.5;
  px.col = (wrap_phi(c.phi) + kPi) / g.col_step() - 0.5;
  return px;
}

double clamp_theta(double theta, const PanoramaGeometry& g) {
  const double eps = 0.5 * g.row_step();
  return std::clamp(theta, g.theta_min + eps, g.theta_max - eps);
}

}  // namespace sat2pano
