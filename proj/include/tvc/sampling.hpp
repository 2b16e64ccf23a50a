#ifndef TVC_SAMPLING_HPP
#define TVC_SAMPLING_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tvc/mesh.hpp"
#include "tvc/sdf_oracle.hpp"

namespace tvc {

// Off-surface points with ground-truth signed distances inside the band zeta.
struct VolumeSamples {
  std::vector<Vec3> points;
  std::vector<double> sdf;
  double zeta = 0.0;
};

void validate_volume_samples(const VolumeSamples& v);

// One shape's training record: on-surface supervision plus its sampled volume.
struct ShapeRecord {
  std::string id;
  SurfaceSamples surface;
  VolumeSamples volume;
  std::optional<TriangleMesh> source_mesh;
  std::optional<SampleProvenance> provenance;  // template only, replay mode
  bool sdf_reliable = true;                    // false for clouds / corrupted inputs
};

enum class SurfaceMode {
  Replay,    // registered meshes: template barycentric samples re-evaluated per shape
  Vertices,  // surface samples are the mesh vertices (correspondence-file datasets)
};

struct SamplingConfig {
  int n_volume = 20000;
  int n_surface = 2000;
  std::pair<double, double> noise_stddevs{0.05, 0.005};
  double zeta = 0.1;
  SurfaceMode surface_mode = SurfaceMode::Replay;
};

// Surface samples displaced by two scales of Gaussian noise (half the budget
// each), rejected outside the band |sdf| < zeta. Deterministic per seed.
// Throws NumericError when the rejection rate exceeds 99% of the retry budget.
VolumeSamples build_volume_samples(const TriangleMesh& mesh, int n,
                                   std::pair<double, double> noise_stddevs, double zeta,
                                   std::uint64_t seed);
VolumeSamples build_volume_samples(const SdfOracle& oracle, int n,
                                   std::pair<double, double> noise_stddevs, double zeta,
                                   std::uint64_t seed);

// Plain text, one 0-based template index per line; line i is the image of
// shape vertex i.
std::vector<int> load_correspondence_file(const std::string& path);

// Builds the per-shape record. For the template pass template_record = null;
// the record gets identity correspondence and, in replay mode, provenance for
// registered targets. Training shapes need either matching vertex counts
// (registered) or an explicit correspondence list.
ShapeRecord build_shape_record(const std::string& id, const TriangleMesh& normalized_mesh,
                               const ShapeRecord* template_record, const SamplingConfig& config,
                               std::uint64_t seed,
                               const std::vector<int>* correspondence = nullptr);

}  // namespace tvc

#endif
