#ifndef TVC_ENERGY_HPP
#define TVC_ENERGY_HPP

#include "tvc/hypernet.hpp"
#include "tvc/losses.hpp"
#include "tvc/mlp.hpp"
#include "tvc/rbf.hpp"

namespace tvc {

// Fixed point subsets one energy evaluation runs over. All losses are
// point-additive means, so evaluation streams through each group once.
struct ShapeBatch {
  // Surface supervision pairs (template sample, corresponding target sample).
  std::vector<Vec3> surf_template;
  std::vector<Vec3> surf_target;
  // Template volume points driving sdr / smoothness / volume terms.
  std::vector<Vec3> vol_template;
  std::vector<double> vol_template_sdf;
  // Implicit-field supervision on the target.
  std::vector<Vec3> sdf_volume;
  std::vector<double> sdf_volume_sdf;
  std::vector<Vec3> sdf_surface;
  std::vector<Vec3> sdf_surface_normals;
  std::vector<Vec3> off_surface;
};

struct EnergyTerms {
  double sdf = 0.0;     // raw (unweighted) per-term values
  double surf = 0.0;
  double sdr = 0.0;
  double smooth = 0.0;
  double vol = 0.0;
  double total = 0.0;   // weighted, mask-honoring combination
};

// Training energy for one shape at the target-net level. Gradients, when
// requested, accumulate into sdf_grads / deform_grads (weighted, masked).
EnergyTerms evaluate_energy(const MlpParams& sdf_params, const MlpSpec& sdf_spec,
                            const MlpParams& deform_params, const MlpSpec& deform_spec,
                            const ShapeBatch& batch, const RbfEstimator* target_field,
                            const LossWeights& weights, const LossConfig& config,
                            const DropoutMask* sdf_mask, const DropoutMask* deform_mask,
                            MlpParams* sdf_grads, MlpParams* deform_grads);

// Same energy with both target nets derived from one latent code via the two
// hypernets; gradients flow back into block parameters and the latent.
EnergyTerms evaluate_shape_energy(const HyperNet& hyper_s, const HyperNet& hyper_d,
                                  const Vector& alpha, const ShapeBatch& batch,
                                  const RbfEstimator* target_field, const LossWeights& weights,
                                  const LossConfig& config, const DropoutMask* sdf_mask,
                                  const DropoutMask* deform_mask, HyperNetGrads* hyper_s_grads,
                                  HyperNetGrads* hyper_d_grads, Vector* alpha_grad);

}  // namespace tvc

#endif
