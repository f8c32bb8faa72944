#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "sat2pano/geometry.hpp"

namespace sat2pano::cli {

enum class ProjectionMode { kDepthwise, kHeightwise, kGround, kPolar };

ProjectionMode parse_mode(const std::string& name);
std::string to_string(ProjectionMode mode);

/// Run configuration shared by all subcommands. Defaults: 256x256 satellite
/// input, 128x512 panorama with a 180 degree field of view, N = M = 64,
/// street camera 2 m above ground.
struct RunConfig {
  // Satellite camera. Center defaults to the raster center.
  double scale = 256.0 / 72.0;
  std::optional<double> center_u;
  std::optional<double> center_v;
  int satellite_size = 256;

  // Panorama. `fov` is "cvact-180", "cvusa-90" or "custom"; only custom
  // reads theta_min / theta_max.
  int pano_width = 512;
  int pano_height = 128;
  std::string fov = "cvact-180";
  double theta_min = 0.0;
  double theta_max = kPi;
  double camera_height = 2.0;
  double heading = 0.0;

  // Multiplane images.
  int n_planes = 64;
  double max_height = 8.0;
  int m_planes = 64;
  std::optional<double> max_radius;

  ProjectionMode mode = ProjectionMode::kDepthwise;

  // 16-bit height PNGs: meters above ground = value * scale + offset.
  double height_scale = 0.001;
  double height_offset = 0.0;

  PanoramaGeometry panorama() const;
  SatelliteCamera camera(int sat_width, int sat_height) const;
};

/// Reads a JSON config; missing keys keep their defaults. Unknown FoV
/// presets and malformed JSON throw sat2pano::Error(kInvalidArgument).
RunConfig load_config(const std::filesystem::path& path);
void apply_json(RunConfig& config, const std::string& json_text);

/// Inverse of apply_json: every field, with optional ones written as null.
std::string to_json(const RunConfig& config);

}  // namespace sat2pano::cli
