#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "sat2pano/error.hpp"

namespace {

using sat2pano::cli::RunConfig;

// Flags shared by every subcommand that reads a RunConfig. Values given on
// the command line override the JSON config file.
struct ConfigFlags {
  std::string config_path;
  std::optional<double> scale, center_u, center_v, theta_min, theta_max;
  std::optional<double> camera_height, heading, max_height, max_radius;
  std::optional<double> height_scale, height_offset;
  std::optional<int> pano_width, pano_height, n_planes, m_planes, satellite_size;
  std::optional<std::string> fov, mode;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON run config");
    app->add_option("--scale", scale, "satellite pixels per meter");
    app->add_option("--center-u", center_u, "street camera column in the satellite image");
    app->add_option("--center-v", center_v, "street camera row in the satellite image");
    app->add_option("--pano-width", pano_width, "panorama width in pixels");
    app->add_option("--pano-height", pano_height, "panorama height in pixels");
    app->add_option("--fov", fov, "cvact-180, cvusa-90 or custom")
        ->check(CLI::IsMember({"cvact-180", "cvusa-90", "custom"}));
    app->add_option("--theta-min", theta_min, "custom FoV lower polar bound (rad)");
    app->add_option("--theta-max", theta_max, "custom FoV upper polar bound (rad)");
    app->add_option("--camera-height", camera_height, "street camera height above ground (m)");
    app->add_option("--heading", heading, "radians added to column azimuths; 0 faces +u at the center column");
    app->add_option("--n-planes", n_planes, "satellite MPI planes (height PNG input)");
    app->add_option("--max-height", max_height, "top satellite plane above ground (m)");
    app->add_option("--m-planes", m_planes, "street MPI cylinders");
    app->add_option("--max-radius", max_radius, "largest cylinder radius (m)");
    app->add_option("--height-scale", height_scale, "height PNG meters per unit");
    app->add_option("--height-offset", height_offset, "height PNG offset (m)");
    app->add_option("--satellite-size", satellite_size, "synthetic satellite raster size");
    app->add_option("--mode", mode, "depthwise, heightwise, ground or polar")
        ->check(CLI::IsMember({"depthwise", "heightwise", "ground", "polar"}));
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : sat2pano::cli::load_config(config_path);
    auto set = [](auto& field, const auto& value) {
      if (value) field = *value;
    };
    set(c.scale, scale);
    if (center_u) c.center_u = center_u;
    if (center_v) c.center_v = center_v;
    set(c.pano_width, pano_width);
    set(c.pano_height, pano_height);
    set(c.fov, fov);
    set(c.theta_min, theta_min);
    set(c.theta_max, theta_max);
    set(c.camera_height, camera_height);
    set(c.heading, heading);
    set(c.n_planes, n_planes);
    set(c.max_height, max_height);
    set(c.m_planes, m_planes);
    if (max_radius) c.max_radius = max_radius;
    set(c.height_scale, height_scale);
    set(c.height_offset, height_offset);
    set(c.satellite_size, satellite_size);
    if (mode) c.mode = sat2pano::cli::parse_mode(*mode);
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("sat2pano");
  spdlog::set_default_logger(logger);
  spdlog::cfg::load_env_levels();

  CLI::App app{"Satellite to street-view panorama projection"};
  app.require_subcommand(1);

  ConfigFlags project_flags, align_flags, synth_flags;
  sat2pano::cli::ProjectArgs project;
  sat2pano::cli::AlignArgs align;
  sat2pano::cli::EvalArgs eval;
  sat2pano::cli::SynthArgs synth;
  std::string volume, heights, mask_out, eval_out;

  auto* p = app.add_subcommand("project", "render a panorama from a satellite image");
  project_flags.attach(p);
  p->add_option("--satellite", project.satellite, "satellite PNG")->required();
  p->add_option("--volume", volume, "HPV1 height probability volume");
  p->add_option("--heights", heights, "16-bit height PNG (meters above ground)");
  p->add_option("--out", project.output, "output panorama PNG")->required();
  p->add_option("--mask-out", mask_out, "output validity mask PNG");

  auto* a = app.add_subcommand("align", "estimate satellite offsets for image pairs");
  align_flags.attach(a);
  a->add_option("--manifest", align.manifest, "CSV: sat_path,pano_path,id")->required();
  a->add_option("--out", align.output, "CSV: id,du_m,dv_m,ssim,flag")->required();
  a->add_option("--grid", align.grid_size, "candidates per axis")->capture_default_str();
  a->add_option("--extent", align.grid_extent, "searched square edge (m)")
      ->capture_default_str();

  auto* e = app.add_subcommand("eval", "RMSE, SSIM, PSNR and SD for image pairs");
  e->add_option("--manifest", eval.manifest, "CSV: a_path,b_path,id")->required();
  e->add_option("--out", eval_out, "JSON report (stdout when omitted)");

  auto* s = app.add_subcommand("synth-scene", "write a seeded synthetic fixture bundle");
  synth_flags.attach(s);
  s->add_option("--seed", synth.seed, "scene seed")->required();
  s->add_option("--out", synth.output_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (p->parsed()) {
      project.config = project_flags.resolve();
      if (!volume.empty()) project.volume = volume;
      if (!heights.empty()) project.heights = heights;
      if (!mask_out.empty()) project.mask_output = mask_out;
      return sat2pano::cli::cmd_project(project, std::cerr);
    }
    if (a->parsed()) {
      align.config = align_flags.resolve();
      return sat2pano::cli::cmd_align(align, std::cerr);
    }
    if (e->parsed()) {
      if (!eval_out.empty()) eval.output = eval_out;
      return sat2pano::cli::cmd_eval(eval, std::cout, std::cerr);
    }
    if (s->parsed()) {
      synth.config = synth_flags.resolve();
      return sat2pano::cli::cmd_synth_scene(synth, std::cerr);
    }
  } catch (const sat2pano::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return err.code() == sat2pano::ErrorCode::kIoError ? 2 : 1;
  }
  return 1;
}
