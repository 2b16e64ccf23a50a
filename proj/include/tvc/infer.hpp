#ifndef TVC_INFER_HPP
#define TVC_INFER_HPP

#include <string>
#include <vector>

#include "tvc/batching.hpp"
#include "tvc/model.hpp"
#include "tvc/trainer.hpp"

namespace tvc {

enum class LatentInit { Zero, MeanOfTrainingLatents };

struct InferConfig {
  int map_steps = 300;
  int chamfer_steps = 300;
  double learning_rate = 1e-3;
  LatentInit latent_init = LatentInit::Zero;
  double latent_prior_weight = 1e-4;
  int chamfer_template_points = 1024;  // template surface subsample for refinement
  bool use_chamfer_refine = true;      // the "skip refinement" ablation turns this off
  std::uint64_t seed = 0;
};

struct StageResult {
  Vector alpha;
  double initial_objective = 0.0;
  double final_objective = 0.0;  // best over iterates, never above initial
};

// Latent recovery for an unseen target by minimizing the frozen model's
// implicit-field and sdr terms plus a small quadratic latent prior. The sdr
// term drops out automatically for records flagged sdf-unreliable.
StageResult map_estimate(const ModelState& state, const ShapeRecord& target,
                         const LossWeights& weights, const LossConfig& loss,
                         const RbfConfig& rbf, const InferConfig& config);

// Bidirectional Chamfer refinement of the latent against the target surface;
// nearest-neighbor assignments are recomputed every step and gradients flow
// only through the deformed template positions.
StageResult chamfer_refine(const ModelState& state, const Vector& alpha,
                           const std::vector<Vec3>& target_surface, const InferConfig& config);

// Deformed template surface points under the latent code (dropout off).
std::vector<Vec3> deform_template(const ModelState& state, const Vector& alpha);
std::vector<Vec3> deform_points(const ModelState& state, const Vector& alpha,
                                const std::vector<Vec3>& points);

struct MatchResult {
  Vector alpha;
  double map_initial = 0.0, map_final = 0.0;
  double chamfer_initial = 0.0, chamfer_final = 0.0;
};

// MAP estimation followed by (optional) Chamfer refinement.
MatchResult fit_latent(const ModelState& state, const ShapeRecord& target,
                       const LossWeights& weights, const LossConfig& loss, const RbfConfig& rbf,
                       const InferConfig& config);

struct DenseMap {
  std::string source_id, target_id;
  std::vector<int> assignment;     // per source point: target point index
  std::vector<double> distances;   // residual of the final nearest-neighbor step
};

// Correspondence through the deformed templates: source point -> nearest
// deformed-template point under alpha_x -> that template point under alpha_y
// -> nearest target point. Ties break toward the lower index.
DenseMap correspond_points(const ModelState& state, const Vector& alpha_x, const Vector& alpha_y,
                           const std::vector<Vec3>& source_points,
                           const std::vector<Vec3>& target_points);

// Full pipeline for a record pair (latent fits included).
DenseMap correspond(const ModelState& state, const ShapeRecord& source, const ShapeRecord& target,
                    const LossWeights& weights, const LossConfig& loss, const RbfConfig& rbf,
                    const InferConfig& config, MatchResult* source_fit = nullptr,
                    MatchResult* target_fit = nullptr);

// Plain text: one 0-based target index per source-point line.
void save_dense_map(const DenseMap& map, const std::string& path);
DenseMap load_dense_map(const std::string& path);

}  // namespace tvc

#endif
