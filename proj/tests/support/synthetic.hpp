#ifndef TVC_TESTS_SYNTHETIC_HPP
#define TVC_TESTS_SYNTHETIC_HPP

// Test-only fixtures and independent oracles. Nothing here calls back into the
// code paths under test.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "tvc/mesh.hpp"
#include "tvc/rng.hpp"

namespace tvc::testsupport {

// Icosahedron subdivided `subdivisions` times, projected to the given radius,
// outward orientation.
inline TriangleMesh icosphere(int subdivisions, double radius = 1.0) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
  };
  for (auto& v : verts) v = normalized(v);
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = normalized(verts[a] + verts[b]);
      verts.push_back(m);
      int idx = static_cast<int>(verts.size()) - 1;
      midpoint[key] = idx;
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  TriangleMesh mesh;
  mesh.vertices = std::move(verts);
  for (auto& v : mesh.vertices) v *= radius;
  mesh.faces = std::move(faces);
  return mesh;
}

// Axis-aligned cube [-h, h]^3 with outward-oriented faces.
inline TriangleMesh cube(double h = 0.5) {
  TriangleMesh mesh;
  for (int i = 0; i < 8; ++i)
    mesh.vertices.push_back({(i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h});
  auto quad = [&](int a, int b, int c, int d) {
    mesh.faces.push_back({a, b, c});
    mesh.faces.push_back({a, c, d});
  };
  quad(0, 2, 3, 1);  // z = -h
  quad(4, 5, 7, 6);  // z = +h
  quad(0, 1, 5, 4);  // y = -h
  quad(2, 6, 7, 3);  // y = +h
  quad(0, 4, 6, 2);  // x = -h
  quad(1, 3, 7, 5);  // x = +h
  return mesh;
}

// Unit square in the z=0 plane, two triangles.
inline TriangleMesh unit_square() {
  TriangleMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  mesh.faces = {{0, 1, 2}, {0, 2, 3}};
  return mesh;
}

// Smooth low-frequency deformation family used by the end-to-end experiment:
// anisotropic stretch plus sinusoidal bends, vertex indexing preserved.
inline TriangleMesh smooth_deform(const TriangleMesh& mesh, std::uint64_t seed,
                                  double bend_amplitude = 0.25, int wave_count = 3,
                                  double freq_lo = 0.6, double freq_hi = 1.6) {
  Rng rng(seed);
  Vec3 stretch{rng.uniform(0.85, 1.2), rng.uniform(0.85, 1.2), rng.uniform(0.85, 1.2)};
  struct Wave {
    Vec3 dir, k;
    double amp, phase;
  };
  std::vector<Wave> waves;
  for (int i = 0; i < wave_count; ++i) {
    Wave w;
    w.dir = normalized(rng.normal_vec3());
    w.k = rng.uniform(freq_lo, freq_hi) * normalized(rng.normal_vec3());
    w.amp = bend_amplitude * rng.uniform(0.4, 1.0);
    w.phase = rng.uniform(0.0, 6.283185307179586);
    waves.push_back(w);
  }
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) {
    Vec3 p{v.x * stretch.x, v.y * stretch.y, v.z * stretch.z};
    for (const auto& w : waves) p += w.amp * std::sin(dot(w.k, v) + w.phase) * w.dir;
    v = p;
  }
  return out;
}

// Bellman-Ford shortest paths over the mesh edge graph (geodesic oracle).
inline std::vector<double> bellman_ford_distances(const TriangleMesh& mesh, int source) {
  const int nv = mesh.vertex_count();
  std::vector<std::tuple<int, int, double>> edges;
  for (const auto& f : mesh.faces)
    for (int k = 0; k < 3; ++k) {
      int a = f[k], b = f[(k + 1) % 3];
      edges.emplace_back(a, b, dist(mesh.vertices[a], mesh.vertices[b]));
    }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(nv, inf);
  d[source] = 0.0;
  for (int pass = 0; pass < nv; ++pass) {
    bool changed = false;
    for (const auto& [a, b, w] : edges) {
      if (d[a] + w < d[b]) {
        d[b] = d[a] + w;
        changed = true;
      }
      if (d[b] + w < d[a]) {
        d[a] = d[b] + w;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return d;
}

}  // namespace tvc::testsupport

#endif
