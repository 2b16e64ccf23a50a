#include "tvc/sampling.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tvc/errors.hpp"
#include "tvc/rng.hpp"

namespace tvc {

void validate_volume_samples(const VolumeSamples& v) {
  if (v.points.size() != v.sdf.size())
    throw ValidationError("volume samples: points and sdf lengths differ");
  if (v.zeta <= 0.0) throw ValidationError("volume samples: zeta must be positive");
  for (double s : v.sdf)
    if (!(std::abs(s) < v.zeta))
      throw ValidationError("volume sample sdf " + std::to_string(s) + " outside band " +
                            std::to_string(v.zeta));
}

VolumeSamples build_volume_samples(const TriangleMesh& mesh, int n,
                                   std::pair<double, double> noise_stddevs, double zeta,
                                   std::uint64_t seed) {
  SdfOracle oracle(mesh);
  return build_volume_samples(oracle, n, noise_stddevs, zeta, seed);
}

VolumeSamples build_volume_samples(const SdfOracle& oracle, int n,
                                   std::pair<double, double> noise_stddevs, double zeta,
                                   std::uint64_t seed) {
  if (n <= 0) throw ValidationError("volume sample count must be positive");
  if (zeta <= 0.0) throw ValidationError("band half-width zeta must be positive");
  if (noise_stddevs.first < 0.0 || noise_stddevs.second < 0.0)
    throw ValidationError("noise stddevs must be non-negative");

  const TriangleMesh& mesh = oracle.mesh();
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    total += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    cumulative[f] = total;
  }
  if (total <= 0.0) throw ValidationError("mesh has zero surface area");

  VolumeSamples out;
  out.zeta = zeta;
  out.points.reserve(n);
  out.sdf.reserve(n);

  Rng rng(seed);
  const long budget = 100L * n;  // accepts down to a 1% acceptance rate
  long attempts = 0;
  while (static_cast<int>(out.points.size()) < n) {
    if (++attempts > budget)
      throw NumericError("volume sampling rejection rate too high: band zeta=" +
                         std::to_string(zeta) + " is too narrow for noise scales (" +
                         std::to_string(noise_stddevs.first) + ", " +
                         std::to_string(noise_stddevs.second) + ")");
    double r = rng.uniform() * total;
    int face = static_cast<int>(std::lower_bound(cumulative.begin(), cumulative.end(), r) -
                                cumulative.begin());
    if (face >= static_cast<int>(mesh.faces.size())) face = static_cast<int>(mesh.faces.size()) - 1;
    double s = std::sqrt(rng.uniform());
    double t = rng.uniform();
    double u = 1.0 - s;
    double v = s * (1.0 - t);
    const auto& fv = mesh.faces[face];
    Vec3 p = u * mesh.vertices[fv[0]] + v * mesh.vertices[fv[1]] +
             (1.0 - u - v) * mesh.vertices[fv[2]];

    // Alternate the two noise scales so each gets half the budget.
    double stddev =
        (out.points.size() % 2 == 0) ? noise_stddevs.first : noise_stddevs.second;
    p += stddev * rng.normal_vec3();

    double sdf = oracle.signed_distance(p);
    if (std::abs(sdf) < zeta) {
      out.points.push_back(p);
      out.sdf.push_back(sdf);
    }
  }
  return out;
}

std::vector<int> load_correspondence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open correspondence file: " + path);
  std::vector<int> indices;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    int idx;
    if (ls >> idx) indices.push_back(idx);
  }
  if (indices.empty()) throw ValidationError("correspondence file is empty: " + path);
  return indices;
}

ShapeRecord build_shape_record(const std::string& id, const TriangleMesh& normalized_mesh,
                               const ShapeRecord* template_record, const SamplingConfig& config,
                               std::uint64_t seed, const std::vector<int>* correspondence) {
  validate_mesh(normalized_mesh);
  ShapeRecord record;
  record.id = id;
  record.source_mesh = normalized_mesh;

  const bool is_template = template_record == nullptr;

  if (config.surface_mode == SurfaceMode::Replay) {
    if (is_template) {
      SampleProvenance prov;
      record.surface =
          sample_surface(normalized_mesh, config.n_surface, mix_seed(seed, 1), &prov);
      record.provenance = std::move(prov);
    } else {
      if (correspondence)
        throw ValidationError(
            "replay mode derives correspondence from registration; correspondence files need "
            "surface_mode=vertices");
      if (!template_record->provenance)
        throw ValidationError("template record lacks sample provenance for replay");
      if (!template_record->source_mesh ||
          template_record->source_mesh->vertex_count() != normalized_mesh.vertex_count() ||
          template_record->source_mesh->face_count() != normalized_mesh.face_count())
        throw ValidationError("shape '" + id +
                              "' is not registered with the template (vertex/face counts "
                              "differ) and no correspondence file was supplied");
      record.surface = replay_surface(normalized_mesh, *template_record->provenance);
    }
    record.surface.template_index.resize(record.surface.points.size());
    std::iota(record.surface.template_index.begin(), record.surface.template_index.end(), 0);
  } else {
    record.surface.points = normalized_mesh.vertices;
    record.surface.normals = vertex_pseudo_normals(normalized_mesh);
    const int nv = normalized_mesh.vertex_count();
    if (is_template) {
      record.surface.template_index.resize(nv);
      std::iota(record.surface.template_index.begin(), record.surface.template_index.end(), 0);
    } else if (correspondence) {
      if (static_cast<int>(correspondence->size()) != nv)
        throw ValidationError("correspondence file has " +
                              std::to_string(correspondence->size()) + " entries for a " +
                              std::to_string(nv) + "-vertex shape");
      const int nt = static_cast<int>(template_record->surface.points.size());
      for (int idx : *correspondence)
        if (idx < 0 || idx >= nt)
          throw ValidationError("correspondence index " + std::to_string(idx) +
                                " out of template range");
      record.surface.template_index = *correspondence;
    } else if (template_record->source_mesh &&
               template_record->source_mesh->vertex_count() == nv) {
      record.surface.template_index.resize(nv);
      std::iota(record.surface.template_index.begin(), record.surface.template_index.end(), 0);
    } else {
      throw ValidationError("shape '" + id +
                            "' vertex count does not match the template and no correspondence "
                            "file was supplied");
    }
  }

  record.volume = build_volume_samples(normalized_mesh, config.n_volume, config.noise_stddevs,
                                       config.zeta, mix_seed(seed, 2));
  return record;
}

}  // namespace tvc
