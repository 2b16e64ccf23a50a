#ifndef TVC_MESH_HPP
#define TVC_MESH_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tvc/rng.hpp"
#include "tvc/vec3.hpp"

namespace tvc {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<std::string> vertex_labels;  // optional, empty or |V|

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }
};

struct PointCloud {
  std::vector<Vec3> points;
};

struct SurfaceSamples {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;            // unit; empty for bare point clouds
  std::vector<int> template_index;      // empty when no correspondence is known
};

struct GeodesicField {
  int source_vertex = -1;
  std::vector<double> distances;  // +inf for unreachable vertices
};

struct NormalizeTransform {
  Vec3 center{0, 0, 0};
  double scale = 1.0;
};

// Throws ValidationError on out-of-range or degenerate faces / empty mesh.
void validate_mesh(const TriangleMesh& mesh);

double surface_area(const TriangleMesh& mesh);
double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
Vec3 face_normal(const TriangleMesh& mesh, int face);  // unit; zero for degenerate

// Centers on the vertex centroid and scales so the max vertex radius is 1.
// Throws ValidationError if all vertices coincide.
TriangleMesh normalize_to_unit_sphere(const TriangleMesh& mesh, NormalizeTransform* transform = nullptr);

// Area-weighted surface sampling; normals are face normals. Deterministic per seed.
SurfaceSamples sample_surface(const TriangleMesh& mesh, int n, std::uint64_t seed);

// Sample location bookkeeping so corresponding points can be re-evaluated on a
// registered mesh that shares the face indexing.
struct SampleProvenance {
  std::vector<int> face;
  std::vector<double> bary_u;  // weight of vertex 0
  std::vector<double> bary_v;  // weight of vertex 1
};

SurfaceSamples sample_surface(const TriangleMesh& mesh, int n, std::uint64_t seed,
                              SampleProvenance* provenance);

// Evaluate previously drawn (face, barycentric) locations on a mesh with the
// same face list; used for registered datasets where correspondence is the
// identity over sample indices.
SurfaceSamples replay_surface(const TriangleMesh& mesh, const SampleProvenance& provenance);

// Angle-weighted vertex pseudo-normals (unit length).
std::vector<Vec3> vertex_pseudo_normals(const TriangleMesh& mesh);

// Dijkstra over the edge graph with Euclidean edge weights.
GeodesicField geodesic_distances(const TriangleMesh& mesh, int source_vertex);

TriangleMesh flipped_orientation(const TriangleMesh& mesh);

}  // namespace tvc

#endif
