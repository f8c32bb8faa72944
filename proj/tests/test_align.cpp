#include <cmath>

#include <gtest/gtest.h>

#include "sat2pano/align.hpp"
#include "sat2pano/metrics.hpp"
#include "sat2pano/mpi.hpp"
#include "sat2pano/oracle.hpp"
#include "test_util.hpp"

using namespace sat2pano;
using sat2pano::testing::code_of;

namespace {

ImageBuffer textured_ground(int n, std::uint64_t seed) {
  oracle::SceneParams params;
  params.sat_size = n;
  params.scale = 4.0;
  params.max_ground_slope = 0.05;
  auto scene = oracle::random_scene(seed, params);
  scene.boxes.clear();
  ImageBuffer img = scene.render_satellite();
  // Add texture so the similarity surface has a clear peak.
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const float t = 0.25f * std::sin(0.9f * c + 0.3f * r) * std::cos(0.7f * r - 0.2f * c);
      for (int k = 0; k < 3; ++k) img.at(r, c, k) = std::clamp(img.at(r, c, k) + t, 0.0f, 1.0f);
    }
  }
  return img;
}

}  // namespace

TEST(ShiftGrid, Geometry) {
  const align::ShiftGrid g;
  EXPECT_EQ(g.n_u, 40);
  EXPECT_DOUBLE_EQ(g.step_u(), 11.25 / 39);
  EXPECT_DOUBLE_EQ(g.offset_u(0), -5.625);
  EXPECT_NEAR(g.offset_u(39), 5.625, 1e-12);
  align::ShiftGrid odd{5, 5, 4.0};
  EXPECT_EQ(odd.offset_v(2), 0.0);
  EXPECT_EQ(code_of([] { align::ShiftGrid{0, 3, 1.0}.validate(); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { align::ShiftGrid{3, 3, 0.0}.validate(); }), ErrorCode::kInvalidArgument);
}

TEST(SelectBest, ConstantMapIsDegenerateAndPicksCenter) {
  const align::ShiftGrid grid{5, 5, 4.0};
  const auto r = align::select_best(std::vector<double>(25, 0.3), grid);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.best_iu, 2);
  EXPECT_EQ(r.best_iv, 2);
  EXPECT_EQ(r.best_du, 0.0);
  EXPECT_EQ(r.best_dv, 0.0);
}

TEST(SelectBest, TieBreakSmallestMagnitudeThenRowMajor) {
  const align::ShiftGrid grid{5, 5, 4.0};
  std::vector<double> map(25, 0.1);
  map[0 * 5 + 0] = 0.9;  // (-2, -2)
  map[1 * 5 + 2] = 0.9;  // (0, -1)
  map[2 * 5 + 1] = 0.9;  // (-1, 0)
  auto r = align::select_best(map, grid);
  EXPECT_FALSE(r.degenerate);
  EXPECT_EQ(r.best_iu, 2);
  EXPECT_EQ(r.best_iv, 1);
  EXPECT_DOUBLE_EQ(r.best_dv, 1.0);

  map[1 * 5 + 2] = 0.9 - 1e-12;  // still a tie within tolerance
  r = align::select_best(map, grid);
  EXPECT_EQ(r.best_iv, 1);
  map[1 * 5 + 2] = 0.8;
  r = align::select_best(map, grid);
  EXPECT_EQ(r.best_iu, 1);
  EXPECT_EQ(r.best_iv, 2);
  EXPECT_DOUBLE_EQ(r.best_du, 1.0);
}

TEST(SelectBest, UnalignableFlag) {
  const align::ShiftGrid grid{3, 3, 1.0};
  std::vector<double> map(9, 0.05);
  map[4] = 0.15;
  const auto r = align::select_best(map, grid);
  EXPECT_TRUE(r.unalignable);
  EXPECT_FALSE(r.degenerate);
  EXPECT_EQ(code_of([&] { align::select_best(std::vector<double>(8), grid); }),
            ErrorCode::kDimensionMismatch);
}

TEST(AlignmentSearch, ScoreMatchesGroundProjectionSsim) {
  const int n = 64;
  const ImageBuffer sat = textured_ground(n, 1);
  const auto cam = SatelliteCamera::centered(n, n, 4.0);
  const auto g = PanoramaGeometry::full_sphere(128, 32);
  const ImageBuffer pano = ground_plane_project(sat, g, cam.shifted(1.0, -0.5));
  const align::AlignmentSearch search(sat, pano, cam, g);
  for (const auto& [du, dv] : {std::pair{0.0, 0.0}, {1.0, -0.5}, {-2.0, 1.5}}) {
    const ImageBuffer proj = ground_plane_project(sat, g, cam.shifted(du, dv));
    // Reference: SSIM over the rows below the horizon where both are valid.
    const int first = g.height / 2;
    ImageBuffer a(g.width, g.height - first, 3), b(g.width, g.height - first, 3);
    std::vector<std::uint8_t> mask(a.pixel_count());
    for (int r = first; r < g.height; ++r) {
      for (int c = 0; c < g.width; ++c) {
        for (int k = 0; k < 3; ++k) {
          a.at(r - first, c, k) = proj.at(r, c, k);
          b.at(r - first, c, k) = pano.at(r, c, k);
        }
        mask[(r - first) * g.width + c] = proj.valid(r, c) && pano.valid(r, c);
      }
    }
    EXPECT_NEAR(search.score(du, dv), metrics::ssim(a, b, mask), 1e-6);
  }
}

TEST(AlignPair, SelfProjectedPairGivesZeroShift) {
  const int n = 64;
  const ImageBuffer sat = textured_ground(n, 2);
  const auto cam = SatelliteCamera::centered(n, n, 4.0);
  const auto g = PanoramaGeometry::full_sphere(128, 32);
  const ImageBuffer pano = ground_plane_project(sat, g, cam);
  const auto r = align::align_pair(sat, pano, cam, g, {9, 9, 4.0});
  EXPECT_EQ(r.best_du, 0.0);
  EXPECT_EQ(r.best_dv, 0.0);
  EXPECT_NEAR(r.best_score, 1.0, 1e-9);
  EXPECT_FALSE(r.degenerate);
  EXPECT_FALSE(r.unalignable);
}

TEST(AlignPair, RecoversInjectedShift) {
  const int n = 64;
  const ImageBuffer sat = textured_ground(n, 3);
  const auto cam = SatelliteCamera::centered(n, n, 4.0);
  const auto g = PanoramaGeometry::full_sphere(128, 32);
  const align::ShiftGrid grid{11, 11, 5.0};
  const ImageBuffer pano = ground_plane_project(sat, g, cam.shifted(1.5, -1.0));
  const auto r = align::align_pair(sat, pano, cam, g, grid);
  EXPECT_NEAR(r.best_du, -1.5, 1e-9);
  EXPECT_NEAR(r.best_dv, 1.0, 1e-9);
  EXPECT_EQ(r.score_map.size(), 121u);
}

TEST(AlignPair, ConstantPairIsDegenerate) {
  const ImageBuffer sat(32, 32, 3, 0.4f);
  const auto g = PanoramaGeometry::full_sphere(64, 16);
  const ImageBuffer pano(64, 16, 3, 0.4f);
  const auto r = align::align_pair(sat, pano, SatelliteCamera::centered(32, 32, 4.0), g, {7, 7, 3.0});
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.best_du, 0.0);
  EXPECT_EQ(r.best_dv, 0.0);
}

TEST(AlignmentSearch, Errors) {
  const ImageBuffer sat(16, 16, 3, 0.5f);
  const auto cam = SatelliteCamera::centered(16, 16, 1.0);
  const auto g = PanoramaGeometry::full_sphere(32, 8);
  EXPECT_EQ(code_of([&] { align::AlignmentSearch(sat, ImageBuffer(31, 8, 3), cam, g); }),
            ErrorCode::kDimensionMismatch);
  PanoramaGeometry sky = g;
  sky.theta_max = kHalfPi;
  EXPECT_EQ(code_of([&] { align::AlignmentSearch(sat, ImageBuffer(32, 8, 3), cam, sky); }),
            ErrorCode::kEmptyValidRegion);
}
