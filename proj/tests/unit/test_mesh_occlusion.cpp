#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "occlusym/error.hpp"
#include "occlusym/mesh.hpp"
#include "occlusym/mesh_occlusion.hpp"
#include "occlusym/raster.hpp"
#include "occlusym/rng.hpp"
#include "oracles.hpp"

using namespace occlusym;

namespace {

double max_face_share(const TriMesh& m) {
  double best = 0.0;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) best = std::max(best, m.triangle_area(t));
  return best / m.total_area();
}

double area_sum(const TriMesh& m, const std::vector<int>& tris) {
  double s = 0.0;
  for (int t : tris) s += m.triangle_area(static_cast<std::size_t>(t));
  return s / m.total_area();
}

TriMesh two_triangles() {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

double agreement(const IdBuffer& ids, const std::vector<int>& ref, const TriangleSelection* sel) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const int a = ids.triangle[i], b = ref[i];
    const bool obj_ok = (a >= 0) == (b >= 0);
    const bool occ_ok = !sel || ((a >= 0 && sel->contains(a)) == (b >= 0 && sel->contains(b)));
    same += obj_ok && occ_ok;
  }
  return static_cast<double>(same) / static_cast<double>(ref.size());
}

}  // namespace

TEST(Adjacency, SharedEdgeAndClosedManifold) {
  const auto two = build_adjacency(two_triangles());
  EXPECT_EQ(two[0], std::vector<int>{1});
  EXPECT_EQ(two[1], std::vector<int>{0});
  const auto tet = build_adjacency(make_tetrahedron());
  for (const auto& n : tet) EXPECT_EQ(n.size(), 3u);
  const auto ico = make_icosphere(1);
  for (const auto& n : build_adjacency(ico)) EXPECT_EQ(n.size(), 3u);
}

TEST(Adjacency, FanWithoutSharedEdges) {
  TriMesh fan;
  fan.vertices.push_back({0, 0, 0});
  for (int k = 0; k < 10; ++k) {
    const double a = 2.0 * M_PI * k / 10.0;
    fan.vertices.push_back({std::cos(a), std::sin(a), 0.0});
  }
  for (int k = 0; k < 5; ++k) fan.triangles.push_back({0, 1 + 2 * k, 2 + 2 * k});
  for (const auto& n : build_adjacency(fan)) EXPECT_TRUE(n.empty());
}

TEST(RandomWalk, TwoTrianglesQuantize) {
  const auto sel = random_walk_select(two_triangles(), 0.4, 1);
  EXPECT_EQ(sel.selected.size(), 1u);
  EXPECT_DOUBLE_EQ(sel.achieved_ratio, 0.5);
  EXPECT_FALSE(sel.exhausted);
}

TEST(RandomWalk, NearOneSelectsEverything) {
  const auto ico = make_icosphere(1);
  const auto sel = random_walk_select(ico, 1.0 - 1e-12, 9);
  EXPECT_EQ(sel.selected.size(), ico.triangles.size());
}

TEST(RandomWalk, IcosphereHalf) {
  const auto ico = make_icosphere(1);
  ASSERT_EQ(ico.triangles.size(), 80u);
  const auto sel = random_walk_select(ico, 0.5, 3);
  EXPECT_GE(sel.achieved_ratio, 0.5);
  EXPECT_LT(sel.achieved_ratio, 0.5 + max_face_share(ico));
  EXPECT_NEAR(sel.achieved_ratio, area_sum(ico, sel.selected), 1e-12);
  EXPECT_TRUE(oracle::edge_connected(ico, sel.selected));
  EXPECT_TRUE(std::is_sorted(sel.selected.begin(), sel.selected.end()));
}

TEST(RandomWalk, PropertiesOverSeeds) {
  const TriMesh meshes[] = {make_icosphere(2), make_cube(1.0), normalize_to_unit_cube(make_icosphere(1))};
  for (const auto& m : meshes)
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      const double target = rng.uniform(0.4, 0.6);
      const auto sel = random_walk_select(m, target, seed);
      ASSERT_FALSE(sel.exhausted);
      EXPECT_GE(sel.achieved_ratio, target);
      EXPECT_LT(sel.achieved_ratio - target, max_face_share(m));
      EXPECT_TRUE(oracle::edge_connected(m, sel.selected));
      EXPECT_EQ(random_walk_select(m, target, seed).selected, sel.selected);
    }
}

TEST(RandomWalk, ExhaustsDisconnectedComponent) {
  TriMesh m = two_triangles();
  // A far-away triangle with no shared edge and the same total area.
  const int b = static_cast<int>(m.vertices.size());
  m.vertices.push_back({5, 0, 0});
  m.vertices.push_back({7, 0, 0});
  m.vertices.push_back({5, 1, 0});
  m.triangles.push_back({b, b + 1, b + 2});
  bool saw_exhausted = false;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sel = random_walk_select(m, 0.9, seed);
    if (sel.exhausted) {
      saw_exhausted = true;
      EXPECT_LT(sel.achieved_ratio, 0.9);
    }
  }
  EXPECT_TRUE(saw_exhausted);
}

TEST(RandomWalk, RejectsBadInput) {
  EXPECT_THROW(random_walk_select(make_cube(), 0.0, 1), ParameterError);
  EXPECT_THROW(random_walk_select(make_cube(), 1.0, 1), ParameterError);
  TriMesh flat;
  flat.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  flat.triangles = {{0, 1, 2}};
  EXPECT_THROW(random_walk_select(flat, 0.5, 1), ParameterError);
}

TEST(OrbitCameras, YawSpacing) {
  const auto four = orbit_cameras(4, 2.0, 40.0, 30.0, 0.0);
  ASSERT_EQ(four.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(four[i].yaw_deg, 90.0 * i);
    EXPECT_DOUBLE_EQ(four[i].pitch_deg, 30.0);
    EXPECT_DOUBLE_EQ(four[i].radius, 2.0);
  }
  const auto three = orbit_cameras(3, 2.0, 40.0, 30.0, 30.0);
  EXPECT_DOUBLE_EQ(three[0].yaw_deg, 30.0);
  EXPECT_DOUBLE_EQ(three[1].yaw_deg, 150.0);
  EXPECT_DOUBLE_EQ(three[2].yaw_deg, 270.0);
  EXPECT_EQ(orbit_cameras(1, 2.0, 40.0, 30.0, 12.0).size(), 1u);
  EXPECT_THROW(orbit_cameras(0, 2.0, 40.0, 30.0, 0.0), ParameterError);
}

TEST(Camera, PositionUsesZUp) {
  Camera c;
  c.yaw_deg = 90.0;
  c.pitch_deg = 0.0;
  const Vec3 p = c.position();
  EXPECT_NEAR(p.x(), 0.0, 1e-15);
  EXPECT_NEAR(p.y(), 2.0, 1e-15);
  EXPECT_NEAR(p.z(), 0.0, 1e-15);
  Camera bad;
  bad.fov_y_deg = 180.0;
  EXPECT_THROW(bad.validate(), ParameterError);
}

TEST(RenderMasks, EmptyAndFullSelection) {
  const auto cube = make_cube();
  const Camera cam;
  TriangleSelection none;
  const auto a = render_masks(cube, none, cam);
  EXPECT_EQ(a.occ.count(), 0u);
  EXPECT_GT(a.obj.count(), 0u);
  TriangleSelection all;
  for (int t = 0; t < static_cast<int>(cube.triangles.size()); ++t) all.selected.push_back(t);
  const auto b = render_masks(cube, all, cam);
  EXPECT_EQ(b.occ, b.obj);
}

TEST(RenderMasks, CubeFrontFaceMatchesRayCast) {
  const auto cube = make_cube();
  Camera cam;
  cam.pitch_deg = 0.0;
  cam.yaw_deg = 0.0;
  // The two triangles of the +x face look at the camera.
  TriangleSelection front;
  for (int t = 0; t < static_cast<int>(cube.triangles.size()); ++t) {
    const auto& f = cube.triangles[static_cast<std::size_t>(t)];
    if (cube.vertices[f[0]].x() > 0.49 && cube.vertices[f[1]].x() > 0.49 && cube.vertices[f[2]].x() > 0.49)
      front.selected.push_back(t);
  }
  ASSERT_EQ(front.selected.size(), 2u);
  const auto m = render_masks(cube, front, cam);
  EXPECT_EQ(m.occ, m.obj);
  const auto ref = oracle::raycast_ids(cube, cam);
  BinaryMask ref_obj(cam.image_size, cam.image_size);
  for (std::size_t i = 0; i < ref.size(); ++i) ref_obj.set_index(i, ref[i] >= 0);
  EXPECT_EQ(m.obj, ref_obj);
}

TEST(RenderMasks, AgreesWithRayCastOracle) {
  const auto ico = normalize_to_unit_cube(make_icosphere(2));
  const auto sel = random_walk_select(ico, 0.5, 4);
  for (const auto& cam : orbit_cameras(4, 2.0, 40.0, 30.0, 0.0, 64)) {
    const auto ids = rasterize_ids(ico, cam);
    const auto ref = oracle::raycast_ids(ico, cam);
    EXPECT_GE(agreement(ids, ref, &sel), 0.995);
    const auto m = masks_from_ids(ids, sel);
    for (std::size_t i = 0; i < m.occ.size(); ++i) EXPECT_LE(m.occ[i], m.obj[i]);
  }
}

TEST(Rasterizer, DeterministicAndEmptyWhenBehind) {
  const auto cube = make_cube();
  const Camera cam;
  EXPECT_EQ(rasterize_ids(cube, cam).triangle, rasterize_ids(cube, cam).triangle);
  // A mesh around the camera is clipped away entirely by the near plane test.
  TriMesh far;
  const Vec3 p = cam.position();
  far.vertices = {p + Vec3(0.001, 0, 0), p + Vec3(0, 0.001, 0), p + Vec3(0, 0, 0.001)};
  far.triangles = {{0, 1, 2}};
  for (int id : rasterize_ids(far, cam).triangle) EXPECT_EQ(id, -1);
}

TEST(Obj, ParseFanAndNegativeIndices) {
  const auto m = parse_obj("# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/2 3 4\nf -4 -2 -1\n");
  ASSERT_EQ(m.vertices.size(), 4u);
  ASSERT_EQ(m.triangles.size(), 3u);
  EXPECT_EQ(m.triangles[0], (std::array<int, 3>{0, 1, 2}));
  EXPECT_EQ(m.triangles[1], (std::array<int, 3>{0, 2, 3}));
  EXPECT_EQ(m.triangles[2], (std::array<int, 3>{0, 2, 3}));
  EXPECT_EQ(parse_obj(encode_obj(m)).triangles, m.triangles);
  EXPECT_THROW(parse_obj("v 0 0 0\nf 1 2 3\n"), ParameterError);
}

TEST(Obj, NormalizeToUnitCube) {
  TriMesh m = make_cube(4.0);
  for (auto& v : m.vertices) v += Vec3(3, -2, 7);
  const auto n = normalize_to_unit_cube(m);
  Vec3 lo = n.vertices[0], hi = n.vertices[0];
  for (const auto& v : n.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  EXPECT_NEAR((hi - lo).maxCoeff(), 1.0, 1e-12);
  EXPECT_NEAR(((hi + lo) / 2).norm(), 0.0, 1e-12);
}
