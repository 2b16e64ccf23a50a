#include "tvc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "tvc/errors.hpp"

namespace tvc {

void validate_mesh(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) throw ValidationError("mesh has no vertices");
  const int nv = mesh.vertex_count();
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      if (t[k] < 0 || t[k] >= nv)
        throw ValidationError("face " + std::to_string(f) + " references vertex " +
                              std::to_string(t[k]) + " of a " + std::to_string(nv) +
                              "-vertex mesh");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw ValidationError("face " + std::to_string(f) + " is degenerate (repeated vertex index)");
  }
  if (!mesh.vertex_labels.empty() && static_cast<int>(mesh.vertex_labels.size()) != nv)
    throw ValidationError("vertex label count does not match vertex count");
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

double surface_area(const TriangleMesh& mesh) {
  double area = 0.0;
  for (const auto& f : mesh.faces)
    area += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
  return area;
}

Vec3 face_normal(const TriangleMesh& mesh, int face) {
  const auto& f = mesh.faces[face];
  return normalized(cross(mesh.vertices[f[1]] - mesh.vertices[f[0]],
                          mesh.vertices[f[2]] - mesh.vertices[f[0]]));
}

TriangleMesh normalize_to_unit_sphere(const TriangleMesh& mesh, NormalizeTransform* transform) {
  if (mesh.vertices.empty()) throw ValidationError("cannot normalize an empty mesh");
  Vec3 center{0, 0, 0};
  for (const auto& v : mesh.vertices) center += v;
  center *= 1.0 / static_cast<double>(mesh.vertices.size());

  double radius = 0.0;
  for (const auto& v : mesh.vertices) radius = std::max(radius, norm(v - center));
  if (radius <= 0.0) throw ValidationError("degenerate mesh: all vertices coincide (scale 0)");

  TriangleMesh out = mesh;
  const double inv = 1.0 / radius;
  for (auto& v : out.vertices) v = (v - center) * inv;
  if (transform) *transform = NormalizeTransform{center, radius};
  return out;
}

SurfaceSamples sample_surface(const TriangleMesh& mesh, int n, std::uint64_t seed) {
  return sample_surface(mesh, n, seed, nullptr);
}

SurfaceSamples sample_surface(const TriangleMesh& mesh, int n, std::uint64_t seed,
                              SampleProvenance* provenance) {
  validate_mesh(mesh);
  if (n <= 0) throw ValidationError("sample count must be positive");

  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    total += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    cumulative[f] = total;
  }
  if (total <= 0.0) throw ValidationError("mesh has zero surface area");

  SurfaceSamples out;
  out.points.reserve(n);
  out.normals.reserve(n);
  if (provenance) {
    provenance->face.reserve(n);
    provenance->bary_u.reserve(n);
    provenance->bary_v.reserve(n);
  }

  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    double r = rng.uniform() * total;
    int face = static_cast<int>(std::lower_bound(cumulative.begin(), cumulative.end(), r) -
                                cumulative.begin());
    if (face >= static_cast<int>(mesh.faces.size())) face = static_cast<int>(mesh.faces.size()) - 1;

    // Uniform barycentric via sqrt trick.
    double s = std::sqrt(rng.uniform());
    double t = rng.uniform();
    double u = 1.0 - s;
    double v = s * (1.0 - t);
    const auto& fv = mesh.faces[face];
    Vec3 p = u * mesh.vertices[fv[0]] + v * mesh.vertices[fv[1]] +
             (1.0 - u - v) * mesh.vertices[fv[2]];
    out.points.push_back(p);
    out.normals.push_back(face_normal(mesh, face));
    if (provenance) {
      provenance->face.push_back(face);
      provenance->bary_u.push_back(u);
      provenance->bary_v.push_back(v);
    }
  }
  return out;
}

SurfaceSamples replay_surface(const TriangleMesh& mesh, const SampleProvenance& provenance) {
  validate_mesh(mesh);
  SurfaceSamples out;
  const int n = static_cast<int>(provenance.face.size());
  out.points.reserve(n);
  out.normals.reserve(n);
  for (int i = 0; i < n; ++i) {
    int face = provenance.face[i];
    if (face < 0 || face >= mesh.face_count())
      throw ValidationError("replay face index out of range: mesh is not registered");
    double u = provenance.bary_u[i], v = provenance.bary_v[i];
    const auto& fv = mesh.faces[face];
    out.points.push_back(u * mesh.vertices[fv[0]] + v * mesh.vertices[fv[1]] +
                         (1.0 - u - v) * mesh.vertices[fv[2]]);
    out.normals.push_back(face_normal(mesh, face));
  }
  return out;
}

std::vector<Vec3> vertex_pseudo_normals(const TriangleMesh& mesh) {
  std::vector<Vec3> acc(mesh.vertices.size(), Vec3{0, 0, 0});
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    Vec3 fn = face_normal(mesh, static_cast<int>(f));
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = mesh.vertices[t[k]];
      Vec3 e1 = normalized(mesh.vertices[t[(k + 1) % 3]] - p);
      Vec3 e2 = normalized(mesh.vertices[t[(k + 2) % 3]] - p);
      double c = std::clamp(dot(e1, e2), -1.0, 1.0);
      acc[t[k]] += std::acos(c) * fn;
    }
  }
  for (auto& n : acc) n = normalized(n);
  return acc;
}

GeodesicField geodesic_distances(const TriangleMesh& mesh, int source_vertex) {
  validate_mesh(mesh);
  const int nv = mesh.vertex_count();
  if (source_vertex < 0 || source_vertex >= nv)
    throw ValidationError("geodesic source vertex " + std::to_string(source_vertex) +
                          " out of range");

  // Adjacency from face edges.
  std::vector<std::vector<std::pair<int, double>>> adj(nv);
  auto add_edge = [&](int a, int b) {
    double w = dist(mesh.vertices[a], mesh.vertices[b]);
    adj[a].push_back({b, w});
    adj[b].push_back({a, w});
  };
  for (const auto& f : mesh.faces) {
    add_edge(f[0], f[1]);
    add_edge(f[1], f[2]);
    add_edge(f[2], f[0]);
  }

  const double inf = std::numeric_limits<double>::infinity();
  GeodesicField field;
  field.source_vertex = source_vertex;
  field.distances.assign(nv, inf);
  field.distances[source_vertex] = 0.0;

  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  heap.push({0.0, source_vertex});
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > field.distances[v]) continue;
    for (auto [u, w] : adj[v]) {
      double nd = d + w;
      if (nd < field.distances[u]) {
        field.distances[u] = nd;
        heap.push({nd, u});
      }
    }
  }
  return field;
}

TriangleMesh flipped_orientation(const TriangleMesh& mesh) {
  TriangleMesh out = mesh;
  for (auto& f : out.faces) std::swap(f[1], f[2]);
  return out;
}

}  // namespace tvc
