#include "tvc/sdf_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tvc/errors.hpp"

namespace tvc {
namespace {

std::uint64_t pack_edge(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

constexpr double kFeatureEps = 1e-12;

}  // namespace

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               double* u, double* v, double* w) {
  // Ericson, Real-Time Collision Detection, 5.1.5.
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    *u = 1.0; *v = 0.0; *w = 0.0;
    return a;
  }
  Vec3 bp = p - b;
  double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) {
    *u = 0.0; *v = 1.0; *w = 0.0;
    return b;
  }
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    double t = d1 / (d1 - d3);
    *u = 1.0 - t; *v = t; *w = 0.0;
    return a + t * ab;
  }
  Vec3 cp = p - c;
  double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) {
    *u = 0.0; *v = 0.0; *w = 1.0;
    return c;
  }
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    double t = d2 / (d2 - d6);
    *u = 1.0 - t; *v = 0.0; *w = t;
    return a + t * ac;
  }
  double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    *u = 0.0; *v = 1.0 - t; *w = t;
    return b + t * (c - b);
  }
  double denom = 1.0 / (va + vb + vc);
  double vv = vb * denom, ww = vc * denom;
  *u = 1.0 - vv - ww; *v = vv; *w = ww;
  return a + ab * vv + ac * ww;
}

SdfOracle::SdfOracle(const TriangleMesh& mesh) : mesh_(mesh) {
  validate_mesh(mesh_);
  face_data_.reserve(mesh_.faces.size());
  for (std::size_t f = 0; f < mesh_.faces.size(); ++f) {
    const auto& t = mesh_.faces[f];
    FaceData fd;
    fd.a = mesh_.vertices[t[0]];
    fd.b = mesh_.vertices[t[1]];
    fd.c = mesh_.vertices[t[2]];
    fd.centroid = (fd.a + fd.b + fd.c) * (1.0 / 3.0);
    fd.radius = std::sqrt(std::max({dist2(fd.centroid, fd.a), dist2(fd.centroid, fd.b),
                                    dist2(fd.centroid, fd.c)}));
    fd.normal = normalized(cross(fd.b - fd.a, fd.c - fd.a));
    face_data_.push_back(fd);

    for (int k = 0; k < 3; ++k) {
      auto key = pack_edge(t[k], t[(k + 1) % 3]);
      edge_normals_[key] += fd.normal;
    }
  }
  vertex_normals_.assign(mesh_.vertices.size(), Vec3{0, 0, 0});
  for (std::size_t f = 0; f < mesh_.faces.size(); ++f) {
    const auto& t = mesh_.faces[f];
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = mesh_.vertices[t[k]];
      Vec3 e1 = normalized(mesh_.vertices[t[(k + 1) % 3]] - p);
      Vec3 e2 = normalized(mesh_.vertices[t[(k + 2) % 3]] - p);
      double cosang = std::clamp(dot(e1, e2), -1.0, 1.0);
      vertex_normals_[t[k]] += std::acos(cosang) * face_data_[f].normal;
    }
  }
}

Vec3 SdfOracle::edge_pseudo_normal(int va, int vb) const {
  auto it = edge_normals_.find(pack_edge(va, vb));
  return it != edge_normals_.end() ? it->second : Vec3{0, 0, 0};
}

Vec3 SdfOracle::feature_pseudo_normal(int face, const Vec3&, double u, double v, double w) const {
  const auto& t = mesh_.faces[face];
  const bool zu = u <= kFeatureEps, zv = v <= kFeatureEps, zw = w <= kFeatureEps;
  if (!zu && !zv && !zw) return face_data_[face].normal;
  if (zu && zv) return vertex_normals_[t[2]];
  if (zv && zw) return vertex_normals_[t[0]];
  if (zu && zw) return vertex_normals_[t[1]];
  if (zu) return edge_pseudo_normal(t[1], t[2]);
  if (zv) return edge_pseudo_normal(t[2], t[0]);
  return edge_pseudo_normal(t[0], t[1]);
}

void SdfOracle::closest_point(const Vec3& query, Vec3* point, Vec3* pseudo_normal) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  Vec3 best_p{0, 0, 0};
  int best_face = -1;
  double bu = 0, bv = 0, bw = 0;
  for (std::size_t f = 0; f < face_data_.size(); ++f) {
    const FaceData& fd = face_data_[f];
    // Bounding-sphere reject.
    double dc = norm(query - fd.centroid) - fd.radius;
    if (dc > 0.0 && dc * dc >= best_d2) continue;
    double u, v, w;
    Vec3 cp = closest_point_on_triangle(query, fd.a, fd.b, fd.c, &u, &v, &w);
    double d2 = dist2(query, cp);
    if (d2 < best_d2) {
      best_d2 = d2;
      best_p = cp;
      best_face = static_cast<int>(f);
      bu = u; bv = v; bw = w;
    }
  }
  if (point) *point = best_p;
  if (pseudo_normal) *pseudo_normal = feature_pseudo_normal(best_face, best_p, bu, bv, bw);
}

double SdfOracle::unsigned_distance(const Vec3& query) const {
  Vec3 p;
  closest_point(query, &p, nullptr);
  return dist(query, p);
}

double SdfOracle::signed_distance(const Vec3& query) const {
  Vec3 p, n;
  closest_point(query, &p, &n);
  double d = dist(query, p);
  return dot(query - p, n) < 0.0 ? -d : d;
}

double signed_distance(const TriangleMesh& mesh, const Vec3& query) {
  return SdfOracle(mesh).signed_distance(query);
}

}  // namespace tvc
