#include "tvc/batching.hpp"

#include <cmath>

#include "tvc/errors.hpp"

namespace tvc {

ShapeContext::ShapeContext(const ShapeRecord& record, const RbfConfig& rbf) : record_(&record) {
  zeta_ = record.volume.zeta > 0.0 ? record.volume.zeta : 0.1;
  if (!record.volume.points.empty())
    field_ = std::make_unique<RbfEstimator>(record.volume.points, record.volume.sdf, rbf);
  if (record.source_mesh)
    oracle_ = std::make_unique<SdfOracle>(*record.source_mesh);
  else if (!record.surface.points.empty())
    surface_nn_ = std::make_unique<KdTree>(record.surface.points);
}

bool ShapeContext::in_band(const Vec3& p) const {
  if (oracle_) return std::abs(oracle_->signed_distance(p)) < zeta_;
  if (surface_nn_) return dist(p, surface_nn_->points()[surface_nn_->nearest(p)]) < zeta_;
  return false;
}

ShapeBatch sample_shape_batch(const ShapeRecord& template_record, const ShapeContext& shape,
                              const BatchSpec& spec, Rng& rng) {
  const ShapeRecord& record = shape.record();
  ShapeBatch batch;

  if (spec.with_surf_pairs) {
    if (record.surface.template_index.empty())
      throw ValidationError("shape '" + record.id + "' has no template correspondence");
    const int pool = static_cast<int>(record.surface.points.size());
    const int tpool = static_cast<int>(template_record.surface.points.size());
    batch.surf_template.reserve(spec.n_surface);
    batch.surf_target.reserve(spec.n_surface);
    for (int i = 0; i < spec.n_surface; ++i) {
      int j = rng.uniform_int(pool);
      int k = record.surface.template_index[j];
      if (k < 0 || k >= tpool)
        throw ValidationError("template index " + std::to_string(k) + " out of range");
      batch.surf_template.push_back(template_record.surface.points[k]);
      batch.surf_target.push_back(record.surface.points[j]);
    }
  }

  if (spec.with_template_volume) {
    const int pool = static_cast<int>(template_record.volume.points.size());
    if (pool == 0) throw ValidationError("template record has no volume samples");
    batch.vol_template.reserve(spec.n_sdr);
    batch.vol_template_sdf.reserve(spec.n_sdr);
    for (int i = 0; i < spec.n_sdr; ++i) {
      int j = rng.uniform_int(pool);
      batch.vol_template.push_back(template_record.volume.points[j]);
      batch.vol_template_sdf.push_back(template_record.volume.sdf[j]);
    }
  }

  if (spec.with_sdf_terms) {
    const int vpool = static_cast<int>(record.volume.points.size());
    if (vpool > 0) {
      batch.sdf_volume.reserve(spec.n_sdr);
      batch.sdf_volume_sdf.reserve(spec.n_sdr);
      for (int i = 0; i < spec.n_sdr; ++i) {
        int j = rng.uniform_int(vpool);
        batch.sdf_volume.push_back(record.volume.points[j]);
        batch.sdf_volume_sdf.push_back(record.volume.sdf[j]);
      }
    }
    if (!record.surface.normals.empty()) {
      const int spool = static_cast<int>(record.surface.points.size());
      batch.sdf_surface.reserve(spec.n_surface);
      batch.sdf_surface_normals.reserve(spec.n_surface);
      for (int i = 0; i < spec.n_surface; ++i) {
        int j = rng.uniform_int(spool);
        batch.sdf_surface.push_back(record.surface.points[j]);
        batch.sdf_surface_normals.push_back(record.surface.normals[j]);
      }
    }
    // Fresh ambient points for the spurious-zero penalty, outside the band.
    batch.off_surface.reserve(spec.n_sdr);
    long guard = 0;
    while (static_cast<int>(batch.off_surface.size()) < spec.n_sdr) {
      if (++guard > 200L * spec.n_sdr)
        throw NumericError("off-surface rejection sampling failed: band covers the unit cube");
      Vec3 p{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      if (!shape.in_band(p)) batch.off_surface.push_back(p);
    }
  }
  return batch;
}

}  // namespace tvc
