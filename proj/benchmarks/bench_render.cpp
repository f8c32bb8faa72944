#include <benchmark/benchmark.h>

#include "sat2pano/align.hpp"
#include "sat2pano/metrics.hpp"
#include "sat2pano/mpi.hpp"
#include "sat2pano/oracle.hpp"

using namespace sat2pano;

namespace {

struct Fixture {
  oracle::SyntheticScene scene;
  SatelliteMpi mpi;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    oracle::SceneParams params;
    params.sat_size = 256;
    params.scale = 8.0;
    params.n_planes = 64;
    Fixture out;
    out.scene = oracle::random_scene(9, params);
    out.mpi = build_satellite_mpi(out.scene.render_satellite(),
                                  heightmap_to_distribution(out.scene.render_heights(), out.scene.plane_heights));
    return out;
  }();
  return f;
}

void BM_Depthwise(benchmark::State& state) {
  const auto& f = fixture();
  const auto g = PanoramaGeometry::full_sphere(512, 128);
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(composite(project_depthwise(f.mpi, g, m, f.scene.max_radius(), f.scene.camera())));
  }
  state.SetComplexityN(m);
}
BENCHMARK(BM_Depthwise)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMillisecond)->Complexity();

void BM_Heightwise(benchmark::State& state) {
  const auto& f = fixture();
  const auto g = PanoramaGeometry::full_sphere(512, 128);
  for (auto _ : state) {
    benchmark::DoNotOptimize(composite(project_heightwise(f.mpi, g, f.scene.camera())));
  }
}
BENCHMARK(BM_Heightwise)->Unit(benchmark::kMillisecond);

void BM_GroundPlane(benchmark::State& state) {
  const auto& f = fixture();
  const auto g = PanoramaGeometry::full_sphere(512, 128);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ground_plane_project(f.mpi.colors, g, f.scene.camera()));
  }
}
BENCHMARK(BM_GroundPlane)->Unit(benchmark::kMillisecond);

void BM_Composite(benchmark::State& state) {
  const auto& f = fixture();
  const auto g = PanoramaGeometry::full_sphere(512, 128);
  const auto stack = project_depthwise(f.mpi, g, 64, f.scene.max_radius(), f.scene.camera());
  for (auto _ : state) benchmark::DoNotOptimize(composite(stack));
}
BENCHMARK(BM_Composite)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State& state) {
  const auto& f = fixture();
  const auto g = PanoramaGeometry::full_sphere(512, 128);
  const auto a = ground_plane_project(f.mpi.colors, g, f.scene.camera());
  const auto b = ground_plane_project(f.mpi.colors, g, f.scene.camera().shifted(0.5, 0.0));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::ssim(a, b));
}
BENCHMARK(BM_Ssim)->Unit(benchmark::kMillisecond);

void BM_AlignmentScore(benchmark::State& state) {
  const auto& f = fixture();
  const auto g = PanoramaGeometry::full_sphere(256, 64);
  const auto pano = ground_plane_project(f.mpi.colors, g, f.scene.camera().shifted(1.0, -2.0));
  const align::AlignmentSearch search(f.mpi.colors, pano, f.scene.camera(), g);
  for (auto _ : state) benchmark::DoNotOptimize(search.score(1.0, -2.0));
}
BENCHMARK(BM_AlignmentScore)->Unit(benchmark::kMicrosecond);

void BM_Raycast(benchmark::State& state) {
  const auto& f = fixture();
  const auto g = PanoramaGeometry::full_sphere(256, 64);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::raycast_reference(f.scene, g));
}
BENCHMARK(BM_Raycast)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
