#include "tvc/perturb.hpp"

#include <fstream>
#include <numeric>

#include "tvc/errors.hpp"
#include "tvc/rng.hpp"

namespace tvc {
namespace {

bool inside_region(const PerturbScenario& s, const Vec3& p) {
  if (s.region == PerturbScenario::Region::HalfSpace) return p[s.axis] > s.offset;
  return dist(p, s.center) < s.radius;
}

std::vector<int> pick_fraction(int n, double fraction, Rng& rng) {
  if (fraction < 0.0 || fraction > 1.0)
    throw ValidationError("fraction must lie in [0, 1], got " + std::to_string(fraction));
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  rng.shuffle(indices);
  indices.resize(static_cast<std::size_t>(fraction * n));
  return indices;
}

}  // namespace

PerturbedCloud perturb_cloud(const PointCloud& cloud, const PerturbScenario& scenario,
                             std::uint64_t seed) {
  if (cloud.points.empty()) throw ValidationError("perturb of an empty cloud");
  Rng rng(seed);
  PerturbedCloud out;
  out.cloud = cloud;
  out.source_index.resize(cloud.points.size());
  std::iota(out.source_index.begin(), out.source_index.end(), 0);

  switch (scenario.kind) {
    case PerturbScenario::Kind::Noise: {
      if (scenario.noise_std < 0.0) throw ValidationError("noise stddev must be non-negative");
      if (scenario.noise_std > 0.0)
        for (auto& p : out.cloud.points) p += scenario.noise_std * rng.normal_vec3();
      break;
    }
    case PerturbScenario::Kind::Outliers: {
      for (int idx : pick_fraction(static_cast<int>(cloud.points.size()), scenario.fraction, rng))
        out.cloud.points[idx] += scenario.outlier_std * rng.normal_vec3();
      break;
    }
    case PerturbScenario::Kind::Clutter: {
      if (scenario.fraction < 0.0 || scenario.fraction > 1.0)
        throw ValidationError("clutter fraction must lie in [0, 1], got " +
                              std::to_string(scenario.fraction));
      int extra = static_cast<int>(std::ceil(scenario.fraction * cloud.points.size()));
      for (int i = 0; i < extra; ++i) {
        out.cloud.points.push_back(
            {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
        out.source_index.push_back(-1);
      }
      break;
    }
    case PerturbScenario::Kind::Partial: {
      PointCloud kept;
      std::vector<int> kept_index;
      for (std::size_t i = 0; i < cloud.points.size(); ++i)
        if (!inside_region(scenario, cloud.points[i])) {
          kept.points.push_back(cloud.points[i]);
          kept_index.push_back(static_cast<int>(i));
        }
      if (kept.points.empty()) throw ValidationError("partial region removed every point");
      out.cloud = std::move(kept);
      out.source_index = std::move(kept_index);
      break;
    }
  }
  return out;
}

PerturbedMesh perturb_mesh(const TriangleMesh& mesh, const PerturbScenario& scenario,
                           std::uint64_t seed) {
  validate_mesh(mesh);
  Rng rng(seed);
  PerturbedMesh out;
  out.mesh = mesh;
  out.source_index.resize(mesh.vertices.size());
  std::iota(out.source_index.begin(), out.source_index.end(), 0);

  switch (scenario.kind) {
    case PerturbScenario::Kind::Noise: {
      if (scenario.noise_std < 0.0) throw ValidationError("noise stddev must be non-negative");
      if (scenario.noise_std > 0.0)
        for (auto& v : out.mesh.vertices) v += scenario.noise_std * rng.normal_vec3();
      break;
    }
    case PerturbScenario::Kind::Outliers: {
      for (int idx : pick_fraction(mesh.vertex_count(), scenario.fraction, rng))
        out.mesh.vertices[idx] += scenario.outlier_std * rng.normal_vec3();
      break;
    }
    case PerturbScenario::Kind::Clutter:
      throw ValidationError("clutter applies to point clouds, not meshes");
    case PerturbScenario::Kind::Partial: {
      std::vector<int> new_index(mesh.vertices.size(), -1);
      TriangleMesh kept;
      std::vector<int> kept_index;
      for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        if (!inside_region(scenario, mesh.vertices[i])) {
          new_index[i] = kept.vertex_count();
          kept.vertices.push_back(mesh.vertices[i]);
          kept_index.push_back(static_cast<int>(i));
        }
      if (kept.vertices.empty()) throw ValidationError("partial region removed every vertex");
      for (const auto& f : mesh.faces) {
        if (new_index[f[0]] < 0 || new_index[f[1]] < 0 || new_index[f[2]] < 0) continue;
        kept.faces.push_back({new_index[f[0]], new_index[f[1]], new_index[f[2]]});
      }
      out.mesh = std::move(kept);
      out.source_index = std::move(kept_index);
      break;
    }
  }
  return out;
}

void save_kept_indices(const std::vector<int>& source_index, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write kept-index file: " + path);
  for (int idx : source_index) out << idx << "\n";
  if (!out) throw IoError("failed writing kept-index file: " + path);
}

}  // namespace tvc
