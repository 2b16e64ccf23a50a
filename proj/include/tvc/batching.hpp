#ifndef TVC_BATCHING_HPP
#define TVC_BATCHING_HPP

#include <memory>
#include <optional>

#include "tvc/energy.hpp"
#include "tvc/rng.hpp"
#include "tvc/sampling.hpp"
#include "tvc/sdf_oracle.hpp"

namespace tvc {

// Derived per-shape structures reused across steps: the RBF field over the
// shape volume and a band test for off-surface rejection sampling.
class ShapeContext {
 public:
  ShapeContext(const ShapeRecord& record, const RbfConfig& rbf);

  const ShapeRecord& record() const { return *record_; }
  // Null when the record has no usable volume samples.
  const RbfEstimator* field() const { return field_.get(); }
  // True when the point lies within the zeta band of the surface.
  bool in_band(const Vec3& p) const;

 private:
  const ShapeRecord* record_;
  std::unique_ptr<RbfEstimator> field_;
  std::unique_ptr<SdfOracle> oracle_;   // meshes: exact band test
  std::unique_ptr<KdTree> surface_nn_;  // clouds: nearest-sample band test
  double zeta_ = 0.1;
};

struct BatchSpec {
  int n_surface = 256;
  int n_sdr = 512;
  bool with_surf_pairs = true;     // needs template correspondence
  bool with_template_volume = true;
  bool with_sdf_terms = true;
};

// Draws one fixed point subset for an energy evaluation. Surface pairs follow
// the record's template correspondence; off-surface points are uniform in
// [-1,1]^3 rejected inside the band.
ShapeBatch sample_shape_batch(const ShapeRecord& template_record, const ShapeContext& shape,
                              const BatchSpec& spec, Rng& rng);

}  // namespace tvc

#endif
