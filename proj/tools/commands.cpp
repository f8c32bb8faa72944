#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "sat2pano/align.hpp"
#include "sat2pano/error.hpp"
#include "sat2pano/metrics.hpp"
#include "sat2pano/mpi.hpp"
#include "sat2pano/oracle.hpp"
#include "sat2pano/png_io.hpp"

namespace sat2pano::cli {
namespace fs = std::filesystem;

namespace {

// Thrown for inputs that do not exist; mapped to kExitMissingInput.
struct MissingInput {
  fs::path path;
};

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw MissingInput{path};
}

struct ManifestRow {
  fs::path first;
  fs::path second;
  std::string id;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    fields.push_back(field);
  }
  return fields;
}

// Three columns per row; blank lines, '#' comments and a header whose id
// column reads "id" are skipped. A missing id defaults to the row number.
std::vector<ManifestRow> read_manifest(const fs::path& path) {
  require_file(path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open manifest " + path.string());
  const fs::path base = path.parent_path();
  std::vector<ManifestRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_csv(line);
    if (fields.empty() || fields[0].empty() || fields[0][0] == '#') continue;
    if (fields.size() >= 3 && fields[2] == "id") continue;
    if (fields.size() < 2) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("{}:{}: expected at least two columns", path.string(), line_no));
    }
    ManifestRow row;
    row.first = fs::path(fields[0]).is_absolute() ? fs::path(fields[0]) : base / fields[0];
    row.second = fs::path(fields[1]).is_absolute() ? fs::path(fields[1]) : base / fields[1];
    row.id = fields.size() >= 3 ? fields[2] : std::to_string(rows.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const MissingInput& e) {
    err << "error: input file not found: " << e.path.string() << "\n";
    return kExitMissingInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitModuleError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitModuleError;
  }
}

SatelliteMpi load_mpi(const ProjectArgs& args, const ImageBuffer& sat) {
  HeightProbabilityVolume volume;
  if (args.volume) {
    volume = read_hpv(*args.volume);
  } else {
    const RunConfig& c = args.config;
    HeightMap hmap = load_height_png(*args.heights, c.height_scale, c.height_offset);
    for (float& m : hmap.meters) m = static_cast<float>(m - c.camera_height);
    volume = heightmap_to_distribution(
        hmap, uniform_plane_heights(c.n_planes, c.camera_height, c.max_height));
  }
  return build_satellite_mpi(sat, volume);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

nlohmann::json metric_json(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

int cmd_project(const ProjectArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig& c = args.config;
    require_file(args.satellite);
    if (args.volume) require_file(*args.volume);
    if (args.heights) require_file(*args.heights);
    if (args.volume && args.heights) {
      throw Error(ErrorCode::kInvalidArgument, "give either --volume or --heights, not both");
    }
    const bool needs_heights =
        c.mode == ProjectionMode::kDepthwise || c.mode == ProjectionMode::kHeightwise;
    if (needs_heights && !args.volume && !args.heights) {
      throw Error(ErrorCode::kInvalidArgument,
                  to_string(c.mode) + " mode needs --volume or --heights");
    }
    if (!needs_heights && (args.volume || args.heights)) {
      spdlog::warn("{} mode ignores the height source", to_string(c.mode));
    }

    ImageBuffer sat = load_png(args.satellite);
    const PanoramaGeometry g = c.panorama();
    const SatelliteCamera cam = c.camera(sat.width(), sat.height());

    const auto start = std::chrono::steady_clock::now();
    ImageBuffer pano;
    int n_planes = 1;
    int m_planes = 0;
    switch (c.mode) {
      case ProjectionMode::kDepthwise: {
        const SatelliteMpi mpi = load_mpi(args, sat);
        n_planes = mpi.n_planes();
        m_planes = c.m_planes;
        const double radius = c.max_radius.value_or(
            default_max_radius(sat.width(), sat.height(), cam.scale));
        pano = composite(project_depthwise(mpi, g, c.m_planes, radius, cam));
        break;
      }
      case ProjectionMode::kHeightwise: {
        const SatelliteMpi mpi = load_mpi(args, sat);
        n_planes = mpi.n_planes();
        pano = composite(project_heightwise(mpi, g, cam));
        break;
      }
      case ProjectionMode::kGround:
        pano = ground_plane_project(sat, g, cam);
        break;
      case ProjectionMode::kPolar:
        n_planes = 0;
        pano = polar_transform(sat, g.width, g.height, cam);
        break;
    }
    spdlog::info("{} projection {}x{} rendered in {:.3f} s (M={}, N={})", to_string(c.mode),
                 g.width, g.height, seconds_since(start), m_planes, n_planes);

    save_png(args.output, pano);
    if (args.mask_output) save_mask_png(*args.mask_output, pano);
    spdlog::info("wrote {}", args.output.string());
    return kExitOk;
  });
}

int cmd_align(const AlignArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    const auto rows = read_manifest(args.manifest);
    for (const auto& row : rows) {
      require_file(row.first);
      require_file(row.second);
    }
    align::ShiftGrid grid;
    grid.n_u = grid.n_v = args.grid_size;
    grid.extent = args.grid_extent;
    grid.validate();

    std::ostringstream csv;
    csv << "id,du_m,dv_m,ssim,flag\n";
    for (const auto& row : rows) {
      const ImageBuffer sat = load_png(row.first);
      const ImageBuffer pano = load_png(row.second);
      RunConfig c = args.config;
      c.pano_width = pano.width();
      c.pano_height = pano.height();
      const auto start = std::chrono::steady_clock::now();
      const align::AlignmentResult r =
          align::align_pair(sat, pano, c.camera(sat.width(), sat.height()), c.panorama(), grid);
      const char* flag = r.degenerate ? "degenerate" : r.unalignable ? "unalignable" : "ok";
      spdlog::info("{}: shift ({:.4f}, {:.4f}) m, ssim {:.4f}, {} in {:.2f} s", row.id,
                   r.best_du, r.best_dv, r.best_score, flag, seconds_since(start));
      csv << fmt::format("{},{:.6f},{:.6f},{:.6f},{}\n", row.id, r.best_du, r.best_dv,
                         r.best_score, flag);
    }
    std::ofstream out(args.output, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + args.output.string());
    out << csv.str();
    return kExitOk;
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto rows = read_manifest(args.manifest);
    for (const auto& row : rows) {
      require_file(row.first);
      require_file(row.second);
    }
    nlohmann::json pairs = nlohmann::json::array();
    metrics::MetricReport sum;
    for (const auto& row : rows) {
      const ImageBuffer a = load_png(row.first);
      const ImageBuffer b = load_png(row.second);
      const metrics::MetricReport r = metrics::evaluate(a, b);
      pairs.push_back({{"id", row.id},
                       {"rmse", metric_json(r.rmse)},
                       {"ssim", metric_json(r.ssim)},
                       {"psnr", metric_json(r.psnr)},
                       {"sd", metric_json(r.sd)}});
      sum.rmse += r.rmse;
      sum.ssim += r.ssim;
      sum.psnr += r.psnr;
      sum.sd += r.sd;
    }
    nlohmann::json report;
    report["pairs"] = pairs;
    report["count"] = rows.size();
    if (rows.empty()) {
      report["mean"] = nullptr;
    } else {
      const double n = static_cast<double>(rows.size());
      report["mean"] = {{"rmse", metric_json(sum.rmse / n)},
                        {"ssim", metric_json(sum.ssim / n)},
                        {"psnr", metric_json(sum.psnr / n)},
                        {"sd", metric_json(sum.sd / n)}};
    }
    const std::string text = report.dump(2) + "\n";
    if (args.output) {
      std::ofstream file(*args.output, std::ios::binary);
      if (!file) throw Error(ErrorCode::kIoError, "cannot write " + args.output->string());
      file << text;
    } else {
      out << text;
    }
    return kExitOk;
  });
}

int cmd_synth_scene(const SynthArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig& c = args.config;
    oracle::SceneParams params;
    params.sat_size = c.satellite_size;
    params.scale = c.scale;
    params.camera_height = c.camera_height;
    params.n_planes = c.n_planes;
    params.max_height = c.max_height;
    const oracle::SyntheticScene scene = oracle::random_scene(args.seed, params);
    const PanoramaGeometry g = c.panorama();

    fs::create_directories(args.output_dir);
    const ImageBuffer sat = scene.render_satellite();
    HeightMap rel = scene.render_heights();
    HeightMap above = rel;
    for (float& m : above.meters) m = static_cast<float>(m + c.camera_height);

    save_png(args.output_dir / "satellite.png", sat);
    save_height_png(args.output_dir / "heights.png", above, c.height_scale, c.height_offset);
    write_hpv(args.output_dir / "volume.hpv", heightmap_to_distribution(rel, scene.plane_heights));
    const oracle::RaycastResult ref = oracle::raycast_reference(scene, g);
    save_png(args.output_dir / "reference.png", ref.color);

    nlohmann::json j = nlohmann::json::parse(to_json(c));
    j["camera"]["center_u"] = nullptr;
    j["camera"]["center_v"] = nullptr;
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : scene.boxes) {
      boxes.push_back({{"x_min", b.x_min}, {"x_max", b.x_max}, {"y_min", b.y_min},
                       {"y_max", b.y_max}, {"height", b.height},
                       {"color", {b.color[0], b.color[1], b.color[2]}}});
    }
    j["scene"] = {{"seed", args.seed}, {"boxes", boxes}};
    std::ofstream out(args.output_dir / "scene.json", std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write scene.json");
    out << j.dump(2) << "\n";
    spdlog::info("seed {}: {} boxes written to {}", args.seed, scene.boxes.size(),
                 args.output_dir.string());
    return kExitOk;
  });
}

}  // namespace sat2pano::cli
