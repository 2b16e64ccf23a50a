#ifndef TVC_LOSSES_HPP
#define TVC_LOSSES_HPP

#include <vector>

#include "tvc/linalg.hpp"
#include "tvc/rbf.hpp"
#include "tvc/vec3.hpp"

namespace tvc {

// Per-term loss toggles: ablation switches over the training/inference energy.
struct AblationMask {
  bool use_sdf = true;
  bool use_surf = true;
  bool use_sdr = true;
  bool use_smooth = true;
  bool use_vol = true;
};

struct LossWeights {
  double lambda1 = 1.0;    // sdf field fit
  double lambda2 = 500.0;  // surface correspondence
  double lambda3 = 50.0;   // signed-distance regularization
  double lambda4 = 5.0;    // smoothness
  double lambda5 = 20.0;   // volume preservation
  AblationMask mask;
};

struct LossConfig {
  double eta = 0.1;           // clamp half-width for the sdr term
  double c_off_surface = 100.0;
  int n_surface = 256;        // points per step for the surface term
  int n_sdr = 512;            // points per step for volume-regularized terms
  bool vol_full_map = true;   // det(I + grad D) - 1; false = literal det(grad D) - 1
};

inline double clamp_sym(double x, double eta) { return std::min(eta, std::max(-eta, x)); }

// Mean Euclidean distance between deformed and target surface points.
// Adjoints are d(loss)/d(deformed point).
double surface_loss(const std::vector<Vec3>& deformed, const std::vector<Vec3>& targets,
                    std::vector<Vec3>* adjoints = nullptr);

// Signed-distance regularization: mean |clamp(sdf_template) - clamp(sdf_hat)|
// with sdf_hat interpolated against the target volume samples. Adjoints are
// d(loss)/d(deformed point); zero where the estimated-side clamp saturates.
double sdr_loss(const std::vector<double>& template_sdf, const std::vector<Vec3>& deformed,
                const RbfEstimator& target_field, double eta,
                std::vector<Vec3>* adjoints = nullptr);

// Mean Frobenius norm of the displacement Jacobians.
double smoothness_loss(const std::vector<Matrix>& jacobians,
                       std::vector<Matrix>* adjoints = nullptr);

// Mean |det(I + J) - 1| of the full map (or |det J - 1| when full_map=false).
double volume_loss(const std::vector<Matrix>& jacobians, bool full_map = true,
                   std::vector<Matrix>* adjoints = nullptr);

// Implicit-field fitting loss. Three independently averaged groups:
//   volume points:  |  |grad f| - 1 | + | f - sdf |
//   surface points: 1 - <grad f, normal>
//   off-surface:    exp(-C |f|)
struct SdfLossTerms {
  // volume group
  std::vector<double> volume_values;       // f(x)
  std::vector<Vec3> volume_gradients;      // grad f(x)
  std::vector<double> volume_sdf;          // ground truth
  // surface group
  std::vector<Vec3> surface_gradients;
  std::vector<Vec3> surface_normals;
  // off-surface group
  std::vector<double> off_surface_values;
};

struct SdfLossAdjoints {
  std::vector<double> volume_value;   // dL/df per volume point
  std::vector<Vec3> volume_gradient;  // dL/d(grad f) per volume point
  std::vector<Vec3> surface_gradient;
  std::vector<double> off_surface_value;
};

double sdf_field_loss(const SdfLossTerms& terms, double c_off_surface,
                      SdfLossAdjoints* adjoints = nullptr);

}  // namespace tvc

#endif
