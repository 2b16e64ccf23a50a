#ifndef TVC_PERTURB_HPP
#define TVC_PERTURB_HPP

#include <cstdint>
#include <vector>

#include "tvc/mesh.hpp"

namespace tvc {

// Deterministic corruption generators for the robustness experiments.
struct PerturbScenario {
  enum class Kind { Noise, Outliers, Clutter, Partial };
  enum class Region { HalfSpace, Sphere };

  Kind kind = Kind::Noise;
  double noise_std = 0.0;     // Noise: applied to every point
  double fraction = 0.0;      // Outliers / Clutter: share of the input count
  double outlier_std = 0.1;   // Outliers: the strong displacement
  Region region = Region::HalfSpace;  // Partial: points inside are dropped
  int axis = 0;               // half-space: drop where point[axis] > offset
  double offset = 0.0;
  Vec3 center{0, 0, 0};       // sphere region
  double radius = 0.5;
};

// source_index holds, per output point, its input index; clutter points carry
// -1 so evaluation can ignore them.
struct PerturbedCloud {
  PointCloud cloud;
  std::vector<int> source_index;
};

struct PerturbedMesh {
  TriangleMesh mesh;
  std::vector<int> source_index;  // surviving vertices
};

PerturbedCloud perturb_cloud(const PointCloud& cloud, const PerturbScenario& scenario,
                             std::uint64_t seed);

// Clutter is cloud-only; partial drops vertices inside the region along with
// their faces.
PerturbedMesh perturb_mesh(const TriangleMesh& mesh, const PerturbScenario& scenario,
                           std::uint64_t seed);

void save_kept_indices(const std::vector<int>& source_index, const std::string& path);

}  // namespace tvc

#endif
