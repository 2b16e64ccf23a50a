#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "support/synthetic.hpp"
#include "tvc/errors.hpp"
#include "tvc/mesh.hpp"
#include "tvc/mesh_io.hpp"
#include "tvc/sdf_oracle.hpp"

using namespace tvc;
using namespace tvc::testsupport;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("load_mesh parses an OFF tetrahedron") {
  std::string path = write_temp("tet.off",
                                "OFF\n4 4 0\n"
                                "0 0 0\n1 0 0\n0 1 0\n0 0 1\n"
                                "3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n");
  TriangleMesh mesh = load_mesh(path);
  CHECK(mesh.vertex_count() == 4);
  CHECK(mesh.face_count() == 4);
}

TEST_CASE("load_mesh rejects an empty mesh") {
  std::string path = write_temp("empty.off", "OFF\n0 0 0\n");
  CHECK_THROWS(load_mesh(path));
}

TEST_CASE("sample_surface rejects a zero-area mesh") {
  TriangleMesh degenerate;
  degenerate.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  degenerate.faces = {{0, 1, 2}};
  CHECK_THROWS_AS(sample_surface(degenerate, 10, 1), ValidationError);
}

TEST_CASE("load_mesh rejects out-of-range face indices") {
  std::string path = write_temp("bad.off",
                                "OFF\n4 1 0\n"
                                "0 0 0\n1 0 0\n0 1 0\n0 0 1\n"
                                "3 0 1 99\n");
  CHECK_THROWS_AS(load_mesh(path), ValidationError);
}

TEST_CASE("load_mesh reads 1-based OBJ faces as 0-based") {
  std::string path = write_temp("tri.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  TriangleMesh mesh = load_mesh(path);
  REQUIRE(mesh.face_count() == 1);
  CHECK(mesh.faces[0] == std::array<int, 3>{0, 1, 2});
}

TEST_CASE("mesh io round-trips through OFF and OBJ") {
  TriangleMesh mesh = icosphere(1, 0.7);
  for (auto format : {MeshFormat::Off, MeshFormat::Obj}) {
    std::string path = write_temp(format == MeshFormat::Off ? "rt.off" : "rt.obj", "");
    save_mesh(mesh, path, format);
    TriangleMesh back = load_mesh(path, format);
    REQUIRE(back.vertex_count() == mesh.vertex_count());
    REQUIRE(back.face_count() == mesh.face_count());
    for (int i = 0; i < mesh.vertex_count(); ++i)
      CHECK(dist(back.vertices[i], mesh.vertices[i]) == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("normalize_to_unit_sphere scales a cube analytically") {
  TriangleMesh mesh = cube(2.0);  // vertices at +-2, radius 2*sqrt(3)
  NormalizeTransform transform;
  TriangleMesh normalized_mesh = normalize_to_unit_sphere(mesh, &transform);
  CHECK(transform.scale == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));
  double max_norm = 0.0;
  for (const auto& v : normalized_mesh.vertices) max_norm = std::max(max_norm, norm(v));
  CHECK(max_norm <= 1.0 + 1e-9);
  CHECK(max_norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalize_to_unit_sphere is idempotent") {
  TriangleMesh mesh = normalize_to_unit_sphere(icosphere(1, 3.0));
  NormalizeTransform transform;
  normalize_to_unit_sphere(mesh, &transform);
  CHECK(transform.scale == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(norm(transform.center) < 1e-12);
}

TEST_CASE("normalize_to_unit_sphere rejects coincident vertices") {
  TriangleMesh mesh;
  mesh.vertices = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
  mesh.faces = {{0, 1, 2}};
  CHECK_THROWS_AS(normalize_to_unit_sphere(mesh), ValidationError);
}

TEST_CASE("sample_surface mean matches the square centroid (Monte Carlo)") {
  SurfaceSamples samples = sample_surface(unit_square(), 10000, 42);
  Vec3 mean{0, 0, 0};
  for (const auto& p : samples.points) mean += p;
  mean *= 1.0 / 10000.0;
  CHECK(dist(mean, Vec3{0.5, 0.5, 0.0}) < 0.02);
}

TEST_CASE("sample_surface on a single triangle uses its face normal") {
  TriangleMesh tri;
  tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  tri.faces = {{0, 1, 2}};
  SurfaceSamples samples = sample_surface(tri, 50, 3);
  for (const auto& n : samples.normals) CHECK(dist(n, Vec3{0, 0, 1}) < 1e-14);
}

TEST_CASE("sample_surface is deterministic per seed") {
  TriangleMesh mesh = icosphere(1);
  SurfaceSamples a = sample_surface(mesh, 500, 9);
  SurfaceSamples b = sample_surface(mesh, 500, 9);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].x == b.points[i].x);
    CHECK(a.points[i].y == b.points[i].y);
    CHECK(a.points[i].z == b.points[i].z);
  }
}

TEST_CASE("sample_surface points lie on their triangle planes") {
  TriangleMesh mesh = icosphere(1, 0.8);
  SampleProvenance prov;
  SurfaceSamples samples = sample_surface(mesh, 400, 5, &prov);
  for (std::size_t i = 0; i < samples.points.size(); ++i) {
    const auto& f = mesh.faces[prov.face[i]];
    Vec3 n = normalized(cross(mesh.vertices[f[1]] - mesh.vertices[f[0]],
                              mesh.vertices[f[2]] - mesh.vertices[f[0]]));
    CHECK(std::abs(dot(samples.points[i] - mesh.vertices[f[0]], n)) < 1e-12);
  }
}

TEST_CASE("signed_distance matches the analytic sphere field") {
  TriangleMesh mesh = icosphere(3, 0.5);
  SdfOracle oracle(mesh);
  CHECK(oracle.signed_distance({0, 0, 0}) == doctest::Approx(-0.5).epsilon(4e-3));

  // On-vertex query is exactly on the surface.
  CHECK(std::abs(oracle.signed_distance(mesh.vertices[0])) < 1e-12);
}

TEST_CASE("signed_distance of a cube corner direction") {
  SdfOracle oracle(cube(0.5));
  CHECK(oracle.signed_distance({1, 0, 0}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(oracle.signed_distance({0, 0, 0}) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(oracle.signed_distance({0.7, 0.7, 0.7}) ==
        doctest::Approx(std::sqrt(3 * 0.2 * 0.2)).epsilon(1e-12));
}

TEST_CASE("signed_distance sign flips under orientation reversal") {
  TriangleMesh mesh = icosphere(2, 0.5);
  SdfOracle oracle(mesh);
  SdfOracle flipped(flipped_orientation(mesh));
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    Vec3 q = rng.uniform(0.1, 0.9) * normalized(rng.normal_vec3());
    double a = oracle.signed_distance(q);
    double b = flipped.signed_distance(q);
    CHECK(a == doctest::Approx(-b).epsilon(1e-12));
  }
}

TEST_CASE("signed_distance error bound on a fine icosphere") {
  TriangleMesh mesh = icosphere(4, 0.5);
  SdfOracle oracle(mesh);
  Rng rng(7);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Vec3 q = rng.uniform(0.35, 0.65) * normalized(rng.normal_vec3());
    double got = oracle.signed_distance(q);
    double want = norm(q) - 0.5;
    worst = std::max(worst, std::abs(std::abs(got) - std::abs(want)));
  }
  CHECK(worst <= 5e-3);
}

TEST_CASE("geodesic_distances on a strip equals edge lengths") {
  TriangleMesh strip;
  strip.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  strip.faces = {{0, 1, 2}, {1, 3, 2}};
  GeodesicField field = geodesic_distances(strip, 0);
  CHECK(field.distances[0] == 0.0);
  CHECK(field.distances[1] == doctest::Approx(1.0));
  CHECK(field.distances[2] == doctest::Approx(1.0));
}

TEST_CASE("geodesic_distances matches Bellman-Ford on a small mesh") {
  TriangleMesh mesh = icosphere(0);  // 12 vertices
  for (int source : {0, 3, 7}) {
    GeodesicField field = geodesic_distances(mesh, source);
    std::vector<double> oracle = bellman_ford_distances(mesh, source);
    for (int v = 0; v < mesh.vertex_count(); ++v)
      CHECK(std::abs(field.distances[v] - oracle[v]) < 1e-12);
  }
}

TEST_CASE("geodesic_distances reports unreachable components as infinity") {
  TriangleMesh two;
  two.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 5, 5}, {6, 5, 5}, {5, 6, 5}};
  two.faces = {{0, 1, 2}, {3, 4, 5}};
  GeodesicField field = geodesic_distances(two, 0);
  CHECK(std::isinf(field.distances[3]));
  CHECK(std::isinf(field.distances[4]));
  CHECK(field.distances[1] == doctest::Approx(1.0));
}

TEST_CASE("geodesic_distances satisfies the edge triangle inequality") {
  TriangleMesh mesh = icosphere(2);
  GeodesicField field = geodesic_distances(mesh, 5);
  for (const auto& f : mesh.faces)
    for (int k = 0; k < 3; ++k) {
      int a = f[k], b = f[(k + 1) % 3];
      double w = dist(mesh.vertices[a], mesh.vertices[b]);
      CHECK(field.distances[a] <= field.distances[b] + w + 1e-15);
    }
}

TEST_CASE("geodesic source out of range") {
  CHECK_THROWS_AS(geodesic_distances(unit_square(), 99), ValidationError);
}

TEST_CASE("surface_area analytic cases") {
  CHECK(surface_area(unit_square()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(surface_area(cube(0.5)) == doctest::Approx(6.0).epsilon(1e-15));
  TriangleMesh degenerate;
  degenerate.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  degenerate.faces = {{0, 1, 2}};
  CHECK(surface_area(degenerate) == doctest::Approx(0.0));
}
