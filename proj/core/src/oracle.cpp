#include "sat2pano/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "sat2pano/error.hpp"

namespace sat2pano::oracle {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BoxHit {
  double t = kInf;
  bool top = false;
};

// Slab intersection of the ray t * dir (t > 0) with a box spanning
// [-camera_height, height - camera_height] vertically.
BoxHit intersect(const Box& box, double camera_height, const double dir[3]) {
  const double lo[3] = {box.x_min, box.y_min, -camera_height};
  const double hi[3] = {box.x_max, box.y_max, box.height - camera_height};
  double t_enter = -kInf;
  double t_exit = kInf;
  int enter_axis = -1;
  for (int axis = 0; axis < 3; ++axis) {
    if (dir[axis] == 0.0) {
      if (0.0 < lo[axis] || 0.0 > hi[axis]) return {};
      continue;
    }
    double t0 = lo[axis] / dir[axis];
    double t1 = hi[axis] / dir[axis];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_enter) {
      t_enter = t0;
      enter_axis = axis;
    }
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit || t_enter <= 0.0) return {};
  return {t_enter, enter_axis == 2};
}

}  // namespace

Rgb LinearGround::operator()(double x, double y) const {
  Rgb c;
  for (int k = 0; k < 3; ++k) {
    c[k] = static_cast<float>(std::clamp(
        base[k] + slope_x[k] * x + slope_y[k] * y, 0.0, 1.0));
  }
  return c;
}

void SyntheticScene::validate() const {
  if (sat_size < 1 || !(scale > 0.0) || !(camera_height > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid scene raster or camera");
  }
  if (!ground) {
    throw Error(ErrorCode::kInvalidArgument, "scene has no ground function");
  }
  const double top = plane_heights.empty() ? kInf
                                           : plane_heights.front() + camera_height;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Box& b = boxes[i];
    const std::string name = "box " + std::to_string(i);
    if (!(b.x_min < b.x_max && b.y_min < b.y_max)) {
      throw Error(ErrorCode::kInvalidArgument, name + " has an empty footprint");
    }
    const double far_x = std::max(std::abs(b.x_min), std::abs(b.x_max));
    const double far_y = std::max(std::abs(b.y_min), std::abs(b.y_max));
    if (std::hypot(far_x, far_y) > max_radius()) {
      throw Error(ErrorCode::kInvalidArgument,
                  name + " leaves the satellite coverage");
    }
    if (b.x_min <= 0.0 && b.x_max >= 0.0 && b.y_min <= 0.0 && b.y_max >= 0.0) {
      throw Error(ErrorCode::kInvalidArgument, name + " covers the camera");
    }
    if (!(b.height > 0.0) || b.height > top + 1e-9) {
      throw Error(ErrorCode::kInvalidArgument,
                  name + " height is outside the plane range");
    }
  }
}

ImageBuffer SyntheticScene::render_satellite() const {
  const SatelliteCamera cam = camera();
  ImageBuffer img(sat_size, sat_size, 3);
  for (int v = 0; v < sat_size; ++v) {
    for (int u = 0; u < sat_size; ++u) {
      const double x = (u - cam.center_u) / scale;
      const double y = (v - cam.center_v) / scale;
      Rgb c = ground(x, y);
      double best = 0.0;
      for (const Box& b : boxes) {
        if (b.contains(x, y) && b.height > best) {
          best = b.height;
          c = b.color;
        }
      }
      for (int k = 0; k < 3; ++k) img.at(v, u, k) = c[k];
    }
  }
  return img;
}

HeightMap SyntheticScene::render_heights() const {
  const SatelliteCamera cam = camera();
  HeightMap map(sat_size, sat_size, static_cast<float>(-camera_height));
  for (int v = 0; v < sat_size; ++v) {
    for (int u = 0; u < sat_size; ++u) {
      const double x = (u - cam.center_u) / scale;
      const double y = (v - cam.center_v) / scale;
      double best = 0.0;
      for (const Box& b : boxes) {
        if (b.contains(x, y)) best = std::max(best, b.height);
      }
      map.at(v, u) = static_cast<float>(best - camera_height);
    }
  }
  return map;
}

SyntheticScene random_scene(std::uint64_t seed, const SceneParams& params) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  SyntheticScene scene;
  scene.sat_size = params.sat_size;
  scene.scale = params.scale;
  scene.camera_height = params.camera_height;
  if (params.n_planes > 1) {
    const double step = params.max_height / (params.n_planes - 1);
    for (int i = 0; i < params.n_planes; ++i) {
      scene.plane_heights.push_back(params.max_height - params.camera_height -
                                    i * step);
    }
    scene.plane_heights.back() = -params.camera_height;
  } else {
    scene.plane_heights = {-params.camera_height};
  }

  LinearGround ground;
  for (int k = 0; k < 3; ++k) {
    ground.base[k] = static_cast<float>(uniform(0.3, 0.7));
    ground.slope_x[k] =
        static_cast<float>(uniform(-params.max_ground_slope, params.max_ground_slope));
    ground.slope_y[k] =
        static_cast<float>(uniform(-params.max_ground_slope, params.max_ground_slope));
  }
  scene.ground = ground;

  // Footprint edges fall on pixel boundaries: multiples of 1/scale meters
  // when the raster has an even size.
  const double pixel = 1.0 / params.scale;
  auto snap = [pixel](double x) { return std::round(x / pixel) * pixel; };
  const double radius = scene.max_radius();
  const int n_boxes = std::uniform_int_distribution<int>(
      params.min_boxes, params.max_boxes)(rng);

  std::vector<double> heights;  // admissible box heights above ground
  for (double h : scene.plane_heights) {
    const double above = h + params.camera_height;
    if (above >= params.min_box_height - 1e-9 &&
        above <= params.max_box_height + 1e-9) {
      heights.push_back(above);
    }
  }

  for (int attempt = 0; attempt < 1000 &&
                        static_cast<int>(scene.boxes.size()) < n_boxes;
       ++attempt) {
    Box b;
    const double w = snap(uniform(params.min_box_size, params.max_box_size));
    const double d = snap(uniform(params.min_box_size, params.max_box_size));
    b.x_min = snap(uniform(-radius, radius - w));
    b.y_min = snap(uniform(-radius, radius - d));
    b.x_max = b.x_min + w;
    b.y_max = b.y_min + d;
    const double near_x = std::clamp(0.0, b.x_min, b.x_max);
    const double near_y = std::clamp(0.0, b.y_min, b.y_max);
    if (std::hypot(near_x, near_y) < params.min_distance) continue;
    const double far_x = std::max(std::abs(b.x_min), std::abs(b.x_max));
    const double far_y = std::max(std::abs(b.y_min), std::abs(b.y_max));
    if (std::hypot(far_x, far_y) > radius - pixel) continue;
    bool overlaps = false;
    for (const Box& o : scene.boxes) {
      if (b.x_min < o.x_max + 1.0 && o.x_min < b.x_max + 1.0 &&
          b.y_min < o.y_max + 1.0 && o.y_min < b.y_max + 1.0) {
        overlaps = true;
        break;
      }
    }
    if (overlaps) continue;
    b.height = heights[std::uniform_int_distribution<std::size_t>(
        0, heights.size() - 1)(rng)];
    for (int k = 0; k < 3; ++k) b.color[k] = static_cast<float>(uniform(0.05, 0.95));
    scene.boxes.push_back(b);
  }
  scene.validate();
  return scene;
}

RaycastResult raycast_reference(const SyntheticScene& scene,
                                const PanoramaGeometry& g,
                                const RaycastOptions& options) {
  scene.validate();
  g.validate();
  const double max_radius =
      options.max_radius > 0.0 ? options.max_radius : scene.max_radius();
  const double cam_h = g.camera_height;

  RaycastResult out;
  out.color = ImageBuffer(g.width, g.height, 3);
  out.color.reset_mask(false);
  out.surface.assign(out.color.pixel_count(), kSurfaceEmpty);
  out.depth.assign(out.color.pixel_count(), 0.0f);

  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) {
      const SphericalCoord c = pano_pixel_to_angles(row, col, g);
      const double phi = c.phi + g.heading;
      const double dir[3] = {std::sin(c.theta) * std::cos(phi),
                             std::sin(c.theta) * std::sin(phi),
                             std::cos(c.theta)};
      double best_t = kInf;
      int surface = kSurfaceEmpty;
      Rgb color{};
      if (dir[2] < 0.0) {
        const double t = -cam_h / dir[2];
        if (t * std::sin(c.theta) <= max_radius) {
          best_t = t;
          surface = kSurfaceGround;
          color = scene.ground(t * dir[0], t * dir[1]);
        }
      }
      for (std::size_t k = 0; k < scene.boxes.size(); ++k) {
        const Box& box = scene.boxes[k];
        const BoxHit hit = intersect(box, cam_h, dir);
        if (hit.t < best_t) {
          best_t = hit.t;
          surface = static_cast<int>(k) + 1;
          color = hit.top || options.walls == WallShading::kExtrudedTop
                      ? box.color
                      : options.sentinel_color;
        }
      }
      if (surface == kSurfaceEmpty) continue;
      const std::size_t px = static_cast<std::size_t>(row) * g.width + col;
      for (int k = 0; k < 3; ++k) out.color.at(row, col, k) = color[k];
      out.color.mask()[px] = 1;
      out.surface[px] = surface;
      out.depth[px] = static_cast<float>(best_t);
    }
  }
  return out;
}

ForwardProjection zbuffer_forward_project(const ImageBuffer& sat,
                                          const HeightMap& hard_heights,
                                          const PanoramaGeometry& g,
                                          const SatelliteCamera& cam,
                                          int supersample) {
  if (sat.empty() || hard_heights.meters.empty()) {
    throw Error(ErrorCode::kZeroDimension, "forward projection needs a raster");
  }
  if (sat.width() != hard_heights.width || sat.height() != hard_heights.height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "satellite image and height map differ in size");
  }
  if (supersample < 4) {
    throw Error(ErrorCode::kInvalidArgument,
                "forward projection needs supersample >= 4");
  }
  g.validate();
  cam.validate();

  ForwardProjection out;
  out.color = ImageBuffer(g.width, g.height, 3);
  out.color.reset_mask(false);
  out.depth.assign(out.color.pixel_count(),
                   std::numeric_limits<float>::infinity());

  const double ground = -g.camera_height;
  const double dz = 1.0 / (supersample * cam.scale);
  const int w = sat.width();
  const int h = sat.height();

  auto splat = [&](double u, double v, double z, const float* rgb) {
    const double du = u - cam.center_u;
    const double dv = v - cam.center_v;
    if (du == 0.0 && dv == 0.0 && z == 0.0) return;
    SphericalCoord dir = satellite_to_panorama(u, v, z, cam);
    dir.phi -= g.heading;
    const PanoPixel px = angles_to_pano_pixel(dir, g);
    if (px.out_of_fov) return;
    const int row = std::clamp(static_cast<int>(std::lround(px.row)), 0,
                               g.height - 1);
    int col = static_cast<int>(std::lround(px.col)) % g.width;
    if (col < 0) col += g.width;
    const double depth = std::hypot(std::hypot(du, dv) / cam.scale, z);
    const std::size_t i = static_cast<std::size_t>(row) * g.width + col;
    if (depth < out.depth[i]) {
      out.depth[i] = static_cast<float>(depth);
      for (int k = 0; k < 3; ++k) out.color.at(row, col, k) = rgb[k];
      out.color.mask()[i] = 1;
    }
  };

  for (int pv = 0; pv < h; ++pv) {
    for (int pu = 0; pu < w; ++pu) {
      const double top = hard_heights.at(pv, pu);
      double floor = top;
      const int nu[4] = {pu - 1, pu + 1, pu, pu};
      const int nv[4] = {pv, pv, pv - 1, pv + 1};
      for (int k = 0; k < 4; ++k) {
        const double neighbour = nu[k] < 0 || nu[k] >= w || nv[k] < 0 || nv[k] >= h
                                     ? ground
                                     : hard_heights.at(nv[k], nu[k]);
        floor = std::min(floor, neighbour);
      }
      floor = std::max(floor, ground);
      const float* rgb = &sat.at(pv, pu, 0);
      float color[3] = {rgb[0], rgb[1], rgb[2]};
      if (sat.channels() == 1) color[1] = color[2] = rgb[0];
      for (int a = 0; a < supersample; ++a) {
        for (int b = 0; b < supersample; ++b) {
          const double u = pu - 0.5 + (b + 0.5) / supersample;
          const double v = pv - 0.5 + (a + 0.5) / supersample;
          splat(u, v, top, color);
          for (double z = top - dz; z > floor - 0.5 * dz; z -= dz) {
            splat(u, v, std::max(z, floor), color);
          }
        }
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> silhouette_band(const std::vector<int>& surface,
                                          int width, int height, int radius) {
  std::vector<std::uint8_t> band(surface.size(), 0);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int id = surface[static_cast<std::size_t>(r) * width + c];
      bool edge = false;
      for (int dr = -radius; dr <= radius && !edge; ++dr) {
        const int rr = r + dr;
        if (rr < 0 || rr >= height) continue;
        for (int dc = -radius; dc <= radius; ++dc) {
          const int cc = ((c + dc) % width + width) % width;
          if (surface[static_cast<std::size_t>(rr) * width + cc] != id) {
            edge = true;
            break;
          }
        }
      }
      band[static_cast<std::size_t>(r) * width + c] = edge ? 1 : 0;
    }
  }
  return band;
}

}  // namespace sat2pano::oracle
