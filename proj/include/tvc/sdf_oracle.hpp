#ifndef TVC_SDF_ORACLE_HPP
#define TVC_SDF_ORACLE_HPP

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "tvc/mesh.hpp"

namespace tvc {

// Exact point-to-mesh signed distance: magnitude from the closest triangle,
// sign from the angle-weighted pseudo-normal at the closest feature.
// Expects a watertight, consistently outward-oriented mesh; for other inputs
// the magnitude is still exact and the sign is best effort.
class SdfOracle {
 public:
  explicit SdfOracle(const TriangleMesh& mesh);

  double signed_distance(const Vec3& query) const;
  double unsigned_distance(const Vec3& query) const;

  // Closest surface point and the pseudo-normal at its feature.
  void closest_point(const Vec3& query, Vec3* point, Vec3* pseudo_normal) const;

  const TriangleMesh& mesh() const { return mesh_; }

 private:
  struct FaceData {
    Vec3 a, b, c;
    Vec3 centroid;
    double radius = 0.0;  // bounding-sphere radius around the centroid
    Vec3 normal;
  };

  Vec3 feature_pseudo_normal(int face, const Vec3& point, double u, double v, double w) const;
  Vec3 edge_pseudo_normal(int va, int vb) const;

  TriangleMesh mesh_;
  std::vector<FaceData> face_data_;
  std::vector<Vec3> vertex_normals_;                       // angle-weighted
  std::unordered_map<std::uint64_t, Vec3> edge_normals_;   // packed (min,max) -> summed face normals
};

// Convenience wrapper building a throwaway oracle; prefer SdfOracle for batches.
double signed_distance(const TriangleMesh& mesh, const Vec3& query);

// Closest point on triangle abc plus barycentric coordinates (u,v,w for a,b,c).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               double* u, double* v, double* w);

}  // namespace tvc

#endif
