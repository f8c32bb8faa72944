#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "config.hpp"

namespace sat2pano::cli {

// Exit statuses shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitModuleError = 1;
inline constexpr int kExitMissingInput = 2;

struct ProjectArgs {
  RunConfig config;
  std::filesystem::path satellite;
  std::optional<std::filesystem::path> volume;   // HPV1
  std::optional<std::filesystem::path> heights;  // 16-bit PNG
  std::filesystem::path output;
  std::optional<std::filesystem::path> mask_output;
};

struct AlignArgs {
  RunConfig config;
  std::filesystem::path manifest;  // CSV rows: sat_path,pano_path,id
  std::filesystem::path output;    // CSV rows: id,du_m,dv_m,ssim,flag
  int grid_size = 40;
  double grid_extent = 11.25;
};

struct EvalArgs {
  std::filesystem::path manifest;  // CSV rows: a_path,b_path,id
  std::optional<std::filesystem::path> output;  // stdout when unset
};

struct SynthArgs {
  RunConfig config;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
};

// Each command logs through spdlog, reports failures on `err` and returns an
// exit status. Relative paths in manifests resolve against the manifest's
// directory.
int cmd_project(const ProjectArgs& args, std::ostream& err);
int cmd_align(const AlignArgs& args, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_synth_scene(const SynthArgs& args, std::ostream& err);

}  // namespace sat2pano::cli
