#include "config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sat2pano/error.hpp"

namespace sat2pano::cli {

ProjectionMode parse_mode(const std::string& name) {
  if (name == "depthwise") return ProjectionMode::kDepthwise;
  if (name == "heightwise") return ProjectionMode::kHeightwise;
  if (name == "ground") return ProjectionMode::kGround;
  if (name == "polar") return ProjectionMode::kPolar;
  throw Error(ErrorCode::kInvalidArgument, "unknown projection mode '" + name + "'");
}

std::string to_string(ProjectionMode mode) {
  switch (mode) {
    case ProjectionMode::kDepthwise: return "depthwise";
    case ProjectionMode::kHeightwise: return "heightwise";
    case ProjectionMode::kGround: return "ground";
    case ProjectionMode::kPolar: return "polar";
  }
  return "depthwise";
}

PanoramaGeometry RunConfig::panorama() const {
  PanoramaGeometry g;
  g.width = pano_width;
  g.height = pano_height;
  g.camera_height = camera_height;
  g.heading = heading;
  if (fov == "cvact-180") {
    g.theta_min = 0.0;
    g.theta_max = kPi;
  } else if (fov == "cvusa-90") {
    g.theta_min = kPi / 4.0;
    g.theta_max = 3.0 * kPi / 4.0;
  } else if (fov == "custom") {
    g.theta_min = theta_min;
    g.theta_max = theta_max;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown FoV preset '" + fov + "'");
  }
  g.validate();
  return g;
}

SatelliteCamera RunConfig::camera(int sat_width, int sat_height) const {
  SatelliteCamera cam = SatelliteCamera::centered(sat_width, sat_height, scale);
  if (center_u) cam.center_u = *center_u;
  if (center_v) cam.center_v = *center_v;
  cam.validate();
  return cam;
}

void apply_json(RunConfig& config, const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad config JSON: ") + e.what());
  }
  auto read = [](const nlohmann::json& obj, const char* key, auto& field) {
    if (obj.contains(key) && !obj[key].is_null()) {
      field = obj[key].get<std::remove_reference_t<decltype(field)>>();
    }
  };
  auto read_optional = [](const nlohmann::json& obj, const char* key,
                          std::optional<double>& field) {
    if (obj.contains(key) && !obj[key].is_null()) field = obj[key].get<double>();
  };
  try {
    if (j.contains("camera")) {
      const auto& c = j["camera"];
      read(c, "scale", config.scale);
      read_optional(c, "center_u", config.center_u);
      read_optional(c, "center_v", config.center_v);
    }
    read(j, "satellite_size", config.satellite_size);
    if (j.contains("panorama")) {
      const auto& p = j["panorama"];
      read(p, "width", config.pano_width);
      read(p, "height", config.pano_height);
      read(p, "fov", config.fov);
      read(p, "theta_min", config.theta_min);
      read(p, "theta_max", config.theta_max);
      read(p, "camera_height", config.camera_height);
      read(p, "heading", config.heading);
    }
    if (j.contains("mpi")) {
      const auto& m = j["mpi"];
      read(m, "n_planes", config.n_planes);
      read(m, "max_height", config.max_height);
      read(m, "m_planes", config.m_planes);
      read_optional(m, "max_radius", config.max_radius);
    }
    if (j.contains("mode")) config.mode = parse_mode(j["mode"].get<std::string>());
    if (j.contains("heights")) {
      read(j["heights"], "scale", config.height_scale);
      read(j["heights"], "offset", config.height_offset);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad config value: ") + e.what());
  }
}

std::string to_json(const RunConfig& config) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["camera"] = {{"scale", config.scale},
                 {"center_u", opt(config.center_u)},
                 {"center_v", opt(config.center_v)}};
  j["satellite_size"] = config.satellite_size;
  j["panorama"] = {{"width", config.pano_width},
                   {"height", config.pano_height},
                   {"fov", config.fov},
                   {"theta_min", config.theta_min},
                   {"theta_max", config.theta_max},
                   {"camera_height", config.camera_height},
                   {"heading", config.heading}};
  j["mpi"] = {{"n_planes", config.n_planes},
              {"max_height", config.max_height},
              {"m_planes", config.m_planes},
              {"max_radius", opt(config.max_radius)}};
  j["mode"] = to_string(config.mode);
  j["heights"] = {{"scale", config.height_scale}, {"offset", config.height_offset}};
  return j.dump(2);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  RunConfig config;
  apply_json(config, text.str());
  return config;
}

}  // namespace sat2pano::cli
