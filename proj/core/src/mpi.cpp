#include "sat2pano/mpi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "sat2pano/error.hpp"
#include "sat2pano/parallel.hpp"

namespace sat2pano {
namespace {

void require_ground_plane(const SatelliteMpi& mpi, const PanoramaGeometry& g) {
  if (mpi.n_planes() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "MPI has no planes");
  }
  if (std::abs(mpi.plane_heights.back() + g.camera_height) > 1e-6) {
    throw Error(ErrorCode::kInvalidArgument,
                "last MPI plane must be the ground plane at -camera_height");
  }
}

// Resamples the MPI volume at one raster position, blending alpha planes
// `lo` and `hi` with weight `t` on `hi`. Colors are averaged with the alpha
// of each tap as weight.
class VolumeSampler {
 public:
  explicit VolumeSampler(const SatelliteMpi& mpi)
      : mpi_(mpi), colors_(mpi.colors.data().data()) {}

  void sample(double u, double v, int lo, int hi, float t, float* rgba) const {
    const BilinearTaps taps =
        bilinear_taps(mpi_.width(), mpi_.height(), u, v);
    if (!taps.inside) {
      rgba[0] = rgba[1] = rgba[2] = rgba[3] = 0.0f;
      return;
    }
    const float* alpha_lo = mpi_.alpha_plane(lo).data();
    const float* alpha_hi = mpi_.alpha_plane(hi).data();
    float alpha = 0.0f;
    float r = 0.0f, g = 0.0f, b = 0.0f;
    // Float bilinear weights need not sum to exactly one; an opaque
    // neighbourhood must still give an opaque sample.
    bool opaque = true;
    for (int k = 0; k < 4; ++k) {
      const std::size_t p = taps.pixel[k];
      const float a = (1.0f - t) * alpha_lo[p] + t * alpha_hi[p];
      opaque = opaque && a >= 1.0f;
      const float wa = taps.weight[k] * a;
      alpha += wa;
      r += wa * colors_[3 * p];
      g += wa * colors_[3 * p + 1];
      b += wa * colors_[3 * p + 2];
    }
    if (alpha > 0.0f) {
      rgba[0] = r / alpha;
      rgba[1] = g / alpha;
      rgba[2] = b / alpha;
      rgba[3] = opaque ? 1.0f : std::min(alpha, 1.0f);
    } else {
      rgba[0] = rgba[1] = rgba[2] = rgba[3] = 0.0f;
    }
  }

 private:
  const SatelliteMpi& mpi_;
  const float* colors_;
};

struct RayTables {
  std::vector<double> theta;
  std::vector<double> cos_phi;
  std::vector<double> sin_phi;
};

RayTables ray_tables(const PanoramaGeometry& g) {
  RayTables t;
  t.theta.resize(g.height);
  t.cos_phi.resize(g.width);
  t.sin_phi.resize(g.width);
  for (int r = 0; r < g.height; ++r) {
    t.theta[r] = clamp_theta(pano_pixel_to_angles(r, 0, g).theta, g);
  }
  for (int c = 0; c < g.width; ++c) {
    const double phi = pano_pixel_to_angles(0, c, g).phi + g.heading;
    t.cos_phi[c] = std::cos(phi);
    t.sin_phi[c] = std::sin(phi);
  }
  return t;
}

ImageBuffer composite_planes(int width, int height,
                             const std::vector<const float*>& planes) {
  if (planes.empty()) {
    throw Error(ErrorCode::kEmptyStack, "nothing to composite");
  }
  ImageBuffer out(width, height, 3);
  out.reset_mask(false);
  auto data = out.data();
  auto mask = out.mask();
  const std::size_t n = static_cast<std::size_t>(width) * height;
  for (std::size_t px = 0; px < n; ++px) {
    float r = 0.0f, g = 0.0f, b = 0.0f;
    float transmittance = 1.0f;
    for (const float* plane : planes) {
      const float* rgba = plane + 4 * px;
      const float a = rgba[3];
      r = a * rgba[0] + (1.0f - a) * r;
      g = a * rgba[1] + (1.0f - a) * g;
      b = a * rgba[2] + (1.0f - a) * b;
      transmittance *= 1.0f - a;
    }
    data[3 * px] = r;
    data[3 * px + 1] = g;
    data[3 * px + 2] = b;
    mask[px] = (1.0f - transmittance) >= kCoverageThreshold ? 1 : 0;
  }
  return out;
}

// Warps one satellite plane at height z into the panorama rows of `half`.
void warp_plane(const SatelliteMpi& mpi, int plane, double z, PlaneHalf half,
                const PanoramaGeometry& g, const SatelliteCamera& cam,
                const RayTables& rays, std::vector<float>& rgba) {
  const VolumeSampler sampler(mpi);
  rgba.assign(static_cast<std::size_t>(g.width) * g.height * 4, 0.0f);
  parallel_for_rows(g.height, [&](int row) {
    const double theta = rays.theta[row];
    const bool in_half =
        (half == PlaneHalf::kTop && theta < kHalfPi) ||
        (half == PlaneHalf::kBottom && theta > kHalfPi) ||
        (half == PlaneHalf::kEquator && theta == kHalfPi);
    if (!in_half) return;
    // Horizontal distance (meters) at which the ray crosses height z.
    const double rho = half == PlaneHalf::kEquator ? 0.0 : z * std::tan(theta);
    float* out = rgba.data() + static_cast<std::size_t>(row) * g.width * 4;
    for (int col = 0; col < g.width; ++col) {
      const double u = cam.center_u + cam.scale * rho * rays.cos_phi[col];
      const double v = cam.center_v + cam.scale * rho * rays.sin_phi[col];
      sampler.sample(u, v, plane, plane, 0.0f, out + 4 * col);
    }
  });
}

}  // namespace

std::vector<double> uniform_plane_heights(int n_planes, double camera_height,
                                          double max_height) {
  if (n_planes < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one plane");
  }
  if (!(camera_height > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "camera height must be positive");
  }
  if (n_planes == 1) return {-camera_height};
  if (!(max_height > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "max height must be positive");
  }
  std::vector<double> heights(n_planes);
  const double step = max_height / (n_planes - 1);
  for (int i = 0; i < n_planes; ++i) {
    heights[i] = (max_height - camera_height) - i * step;
  }
  heights.back() = -camera_height;
  return heights;
}

void validate_plane_heights(std::span<const double> plane_heights) {
  if (plane_heights.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one plane height");
  }
  for (std::size_t i = 0; i < plane_heights.size(); ++i) {
    if (!std::isfinite(plane_heights[i])) {
      throw Error(ErrorCode::kInvalidArgument, "plane heights must be finite");
    }
    if (i > 0 && !(plane_heights[i] < plane_heights[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "plane heights must be strictly decreasing");
    }
  }
}

HeightProbabilityVolume::HeightProbabilityVolume(
    int width, int height, std::vector<double> plane_heights)
    : width_(width), height_(height),
      plane_heights_(std::move(plane_heights)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kZeroDimension, "volume raster must be non-empty");
  }
  validate_plane_heights(plane_heights_);
  data_.assign(static_cast<std::size_t>(width) * height *
                   plane_heights_.size(),
               0.0f);
}

void HeightProbabilityVolume::validate(double tolerance) const {
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      double sum = 0.0;
      for (float p : probabilities(r, c)) {
        if (!(p >= 0.0f && p <= 1.0f)) {
          throw Error(ErrorCode::kInvalidArgument,
                      "probability outside [0,1] at (" + std::to_string(r) +
                          ", " + std::to_string(c) + ")");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > tolerance) {
        throw Error(ErrorCode::kInvalidArgument,
                    "distribution does not sum to 1 at (" +
                        std::to_string(r) + ", " + std::to_string(c) + ")");
      }
    }
  }
}

HeightProbabilityVolume heightmap_to_distribution(
    const HeightMap& hmap, const std::vector<double>& plane_heights) {
  HeightProbabilityVolume d(hmap.width, hmap.height, plane_heights);
  const auto& h = d.plane_heights();
  const int n = d.n_planes();
  // Heights are stored in single precision; allow for that rounding.
  const double slack = 1e-5;
  for (int r = 0; r < hmap.height; ++r) {
    for (int c = 0; c < hmap.width; ++c) {
      const double z = hmap.at(r, c);
      if (!(z <= h.front() + slack && z >= h.back() - slack)) {
        throw Error(ErrorCode::kHeightOutOfRange,
                    "height " + std::to_string(z) + " at pixel (" +
                        std::to_string(r) + ", " + std::to_string(c) +
                        ") is outside the plane range");
      }
      auto probs = d.probabilities(r, c);
      if (z >= h.front()) {
        probs[0] = 1.0f;
        continue;
      }
      if (z <= h.back()) {
        probs[n - 1] = 1.0f;
        continue;
      }
      // First plane strictly below z; the bracket is [k, k + 1].
      const auto below = std::upper_bound(h.begin(), h.end(), z,
                                          std::greater<double>());
      const int k = static_cast<int>(below - h.begin()) - 1;
      const double t = (h[k] - z) / (h[k] - h[k + 1]);
      probs[k] = static_cast<float>(1.0 - t);
      probs[k + 1] = static_cast<float>(t);
    }
  }
  return d;
}

HeightMap expected_height(const HeightProbabilityVolume& d) {
  HeightMap out(d.width(), d.height());
  const auto& h = d.plane_heights();
  for (int r = 0; r < d.height(); ++r) {
    for (int c = 0; c < d.width(); ++c) {
      const auto probs = d.probabilities(r, c);
      double acc = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) acc += probs[i] * h[i];
      out.at(r, c) = static_cast<float>(acc);
    }
  }
  return out;
}

SatelliteMpi build_satellite_mpi(const ImageBuffer& img,
                                 const HeightProbabilityVolume& d) {
  if (img.width() != d.width() || img.height() != d.height()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "satellite image is " + std::to_string(img.width()) + "x" +
                    std::to_string(img.height()) + " but the volume is " +
                    std::to_string(d.width()) + "x" +
                    std::to_string(d.height()));
  }
  SatelliteMpi mpi;
  if (img.channels() == 3) {
    mpi.colors = img;
    mpi.colors.clear_mask();
  } else {
    mpi.colors = ImageBuffer(img.width(), img.height(), 3);
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) {
        for (int ch = 0; ch < 3; ++ch) mpi.colors.at(r, c, ch) = img.at(r, c);
      }
    }
  }
  mpi.plane_heights = d.plane_heights();
  const int n = d.n_planes();
  const std::size_t pixels = img.pixel_count();
  mpi.alphas.assign(pixels * n, 0.0f);
  for (int r = 0; r < d.height(); ++r) {
    for (int c = 0; c < d.width(); ++c) {
      const auto probs = d.probabilities(r, c);
      const std::size_t px = static_cast<std::size_t>(r) * d.width() + c;
      double cumulative = 0.0;
      for (int i = 0; i < n; ++i) {
        cumulative += probs[i];
        mpi.alphas[i * pixels + px] =
            static_cast<float>(std::clamp(cumulative, 0.0, 1.0));
      }
      // The ground plane terminates every column.
      mpi.alphas[(n - 1) * pixels + px] = 1.0f;
    }
  }
  return mpi;
}

std::vector<double> uniform_radii(int m_planes, double max_radius) {
  if (m_planes < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one street plane");
  }
  if (!(max_radius > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "max radius must be positive");
  }
  std::vector<double> radii(m_planes);
  for (int j = 0; j < m_planes; ++j) {
    radii[j] = max_radius * (m_planes - j) / m_planes;
  }
  return radii;
}

double default_max_radius(int sat_width, int sat_height, double scale) {
  return std::min(sat_width, sat_height) / (2.0 * scale);
}

StreetMpi project_depthwise(const SatelliteMpi& mpi, const PanoramaGeometry& g,
                            int m_planes, double max_radius,
                            const SatelliteCamera& cam) {
  g.validate();
  cam.validate();
  require_ground_plane(mpi, g);

  StreetMpi out;
  out.width = g.width;
  out.height = g.height;
  out.radii = uniform_radii(m_planes, max_radius);
  out.rgba.assign(static_cast<std::size_t>(m_planes) * g.width * g.height * 4,
                  0.0f);

  const RayTables rays = ray_tables(g);
  const VolumeSampler sampler(mpi);
  const std::vector<double>& h = mpi.plane_heights;
  const int n = mpi.n_planes();
  const std::size_t plane_stride = static_cast<std::size_t>(g.width) * g.height * 4;

  parallel_for_rows(g.height, [&](int row) {
    const double theta = rays.theta[row];
    const double cot = theta == kHalfPi ? 0.0 : 1.0 / std::tan(theta);
    for (int j = 0; j < m_planes; ++j) {
      const double r = out.radii[j];
      const double z = r * cot;
      float* dst = out.rgba.data() + j * plane_stride +
                   static_cast<std::size_t>(row) * g.width * 4;
      if (z > h.front()) continue;  // above the volume, transparent
      int lo = n - 1, hi = n - 1;
      float t = 0.0f;
      if (z > h.back()) {
        const auto below = std::upper_bound(h.begin(), h.end(), z,
                                            std::greater<double>());
        lo = static_cast<int>(below - h.begin()) - 1;
        hi = lo + 1;
        t = static_cast<float>((h[lo] - z) / (h[lo] - h[hi]));
      }
      const double reach = cam.scale * r;
      for (int col = 0; col < g.width; ++col) {
        sampler.sample(cam.center_u + reach * rays.cos_phi[col],
                       cam.center_v + reach * rays.sin_phi[col], lo, hi, t,
                       dst + 4 * col);
      }
    }
  });
  return out;
}

ImageBuffer composite(const StreetMpi& s) {
  std::vector<const float*> planes;
  planes.reserve(s.radii.size());
  for (int j = 0; j < s.m_planes(); ++j) planes.push_back(s.plane(j).data());
  if (planes.empty()) {
    throw Error(ErrorCode::kEmptyStack, "street MPI has no planes");
  }
  return composite_planes(s.width, s.height, planes);
}

std::vector<double> effective_weights(std::span<const float> alphas) {
  std::vector<double> weights(alphas.size());
  double transmittance = 1.0;
  for (std::size_t j = alphas.size(); j-- > 0;) {
    weights[j] = alphas[j] * transmittance;
    transmittance *= 1.0 - alphas[j];
  }
  return weights;
}

void OrderedPlaneStack::validate() const {
  const StackPlane* prev_top = nullptr;
  const StackPlane* prev_bottom = nullptr;
  for (const StackPlane& p : planes) {
    if (p.half == PlaneHalf::kTop) {
      if (prev_top != nullptr && !(p.z < prev_top->z)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "top-half planes must have decreasing z");
      }
      prev_top = &p;
    } else if (p.half == PlaneHalf::kBottom) {
      if (prev_bottom != nullptr && !(p.z > prev_bottom->z)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "bottom-half planes must have increasing z");
      }
      prev_bottom = &p;
    }
  }
}

OrderedPlaneStack project_heightwise(const SatelliteMpi& mpi,
                                     const PanoramaGeometry& g,
                                     const SatelliteCamera& cam) {
  g.validate();
  cam.validate();
  require_ground_plane(mpi, g);

  OrderedPlaneStack stack;
  stack.width = g.width;
  stack.height = g.height;
  const RayTables rays = ray_tables(g);
  const int n = mpi.n_planes();

  // Plane heights decrease with the index: the top half is already far to
  // near, the bottom half is walked from the ground upwards.
  std::vector<int> order;
  for (int i = 0; i < n; ++i) {
    if (mpi.plane_heights[i] > 0.0) order.push_back(i);
  }
  for (int i = n - 1; i >= 0; --i) {
    if (mpi.plane_heights[i] < 0.0) order.push_back(i);
  }
  for (int i = 0; i < n; ++i) {
    if (mpi.plane_heights[i] == 0.0) order.push_back(i);
  }

  for (int i : order) {
    const double z = mpi.plane_heights[i];
    StackPlane plane;
    plane.z = z;
    plane.half = z > 0.0   ? PlaneHalf::kTop
                 : z < 0.0 ? PlaneHalf::kBottom
                           : PlaneHalf::kEquator;
    warp_plane(mpi, i, z, plane.half, g, cam, rays, plane.rgba);
    stack.planes.push_back(std::move(plane));
  }
  return stack;
}

ImageBuffer composite(const OrderedPlaneStack& s) {
  std::vector<const float*> planes;
  planes.reserve(s.planes.size());
  for (const StackPlane& p : s.planes) planes.push_back(p.rgba.data());
  if (planes.empty()) {
    throw Error(ErrorCode::kEmptyStack, "plane stack is empty");
  }
  return composite_planes(s.width, s.height, planes);
}

ImageBuffer ground_plane_project(const ImageBuffer& img,
                                 const PanoramaGeometry& g,
                                 const SatelliteCamera& cam) {
  HeightProbabilityVolume ground(img.width(), img.height(),
                                 {-g.camera_height});
  std::fill(ground.data().begin(), ground.data().end(), 1.0f);
  return composite(project_heightwise(build_satellite_mpi(img, ground), g, cam));
}

ImageBuffer polar_transform(const ImageBuffer& img, int out_width,
                            int out_height, const SatelliteCamera& cam) {
  cam.validate();
  ImageBuffer out(out_width, out_height, img.channels());
  out.reset_mask(false);
  const double radius = std::min(img.width(), img.height()) / 2.0;
  for (int row = 0; row < out_height; ++row) {
    const double rho =
        static_cast<double>(out_height - 1 - row) / out_height * radius;
    for (int col = 0; col < out_width; ++col) {
      const double phi = -kPi + (col + 0.5) * 2.0 * kPi / out_width;
      const Sample s = bilinear_sample(img, cam.center_u + rho * std::cos(phi),
                                       cam.center_v + rho * std::sin(phi));
      if (!s.inside) continue;
      for (int ch = 0; ch < img.channels(); ++ch) out.at(row, col, ch) = s.value[ch];
      out.mask()[static_cast<std::size_t>(row) * out_width + col] = 1;
    }
  }
  return out;
}

Sample sample_panorama(const ImageBuffer& pano, double row, double col) {
  Sample s;
  const int w = pano.width();
  const int h = pano.height();
  const double rc = std::clamp(row, 0.0, static_cast<double>(h - 1));
  const int r0 = static_cast<int>(rc);
  const int r1 = std::min(r0 + 1, h - 1);
  const double fr = rc - r0;
  const double cf = std::floor(col);
  const double fc = col - cf;
  int c0 = static_cast<int>(std::fmod(cf, static_cast<double>(w)));
  if (c0 < 0) c0 += w;
  const int c1 = (c0 + 1) % w;
  const float w00 = static_cast<float>((1.0 - fc) * (1.0 - fr));
  const float w01 = static_cast<float>(fc * (1.0 - fr));
  const float w10 = static_cast<float>((1.0 - fc) * fr);
  const float w11 = static_cast<float>(fc * fr);
  for (int ch = 0; ch < pano.channels(); ++ch) {
    s.value[ch] = w00 * pano.at(r0, c0, ch) + w01 * pano.at(r0, c1, ch) +
                  w10 * pano.at(r1, c0, ch) + w11 * pano.at(r1, c1, ch);
  }
  s.inside = true;
  return s;
}

ImageBuffer street_to_satellite_ground(const ImageBuffer& pano,
                                       const PanoramaGeometry& g,
                                       const SatelliteCamera& cam,
                                       int out_size) {
  g.validate();
  cam.validate();
  if (pano.width() != g.width || pano.height() != g.height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "panorama raster does not match its geometry");
  }
  ImageBuffer out(out_size, out_size, pano.channels());
  out.reset_mask(false);
  for (int v = 0; v < out_size; ++v) {
    for (int u = 0; u < out_size; ++u) {
      SphericalCoord dir = satellite_to_panorama(u, v, -g.camera_height, cam);
      dir.phi -= g.heading;
      const PanoPixel px = angles_to_pano_pixel(dir, g);
      if (px.out_of_fov) continue;
      const Sample s = sample_panorama(pano, px.row, px.col);
      for (int ch = 0; ch < pano.channels(); ++ch) out.at(v, u, ch) = s.value[ch];
      out.mask()[static_cast<std::size_t>(v) * out_size + u] = 1;
    }
  }
  return out;
}

}  // namespace sat2pano
