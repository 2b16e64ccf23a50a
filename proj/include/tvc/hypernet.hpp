#ifndef TVC_HYPERNET_HPP
#define TVC_HYPERNET_HPP

#include <cstdint>
#include <vector>

#include "tvc/mlp.hpp"

namespace tvc {

// One relu-MLP block per target layer; each block maps the latent code to the
// flattened weights and bias of its layer.
struct HyperNet {
  int latent_dim = 0;
  MlpSpec target_spec;
  std::vector<MlpSpec> block_specs;
  std::vector<MlpParams> blocks;

  int block_count() const { return static_cast<int>(blocks.size()); }
};

struct HyperNetConfig {
  int hidden_dim = 64;
  int hidden_layers = 1;
  double final_scale = 1e-2;  // shrink of the last block layer toward the reference init
  // Scale applied to the reference net's output layer; < 1 starts the
  // predicted net near the zero function (used for deformation fields).
  double reference_output_scale = 1.0;
};

// Blocks are initialized so that at small latent norm the predicted target net
// sits near a reference init of target_spec (final weights scaled down, final
// bias = flattened reference layer).
HyperNet init_hypernet(const MlpSpec& target_spec, int latent_dim, const HyperNetConfig& config,
                       std::uint64_t seed);

struct HyperNetCache {
  std::vector<MlpCache> block_caches;
  std::vector<Vector> block_outputs;
};

// Predicted target-net parameters for a latent code.
MlpParams hypernet_forward(const HyperNet& h, const Vector& alpha, HyperNetCache* cache = nullptr);

struct HyperNetGrads {
  std::vector<MlpParams> blocks;

  void set_zero();
  void add_scaled(const HyperNetGrads& other, double s);
};

HyperNetGrads zero_grads(const HyperNet& h);

// Backprop dL/dtheta (target-parameter adjoints) through every block,
// accumulating block gradients and the latent adjoint.
void hypernet_backward(const HyperNet& h, const Vector& alpha, const HyperNetCache& cache,
                       const MlpParams& target_adjoint, HyperNetGrads& grads, Vector& alpha_adjoint);

// Flat views used by the optimizer and checkpoints.
Vector flatten_hypernet(const HyperNet& h);
void unflatten_hypernet(const Vector& flat, HyperNet& h);
Vector flatten_hypernet_grads(const HyperNetGrads& g);
int hypernet_param_count(const HyperNet& h);

}  // namespace tvc

#endif
