#ifndef TVC_MLP_HPP
#define TVC_MLP_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "tvc/linalg.hpp"
#include "tvc/vec3.hpp"

namespace tvc {

enum class ActivationKind { Sine, Relu };

struct Activation {
  ActivationKind kind = ActivationKind::Relu;
  double omega0 = 30.0;  // sine frequency; ignored for relu
};

struct MlpSpec {
  std::vector<int> layer_sizes;  // input, hidden..., output
  Activation activation;
  double dropout_rate = 0.0;

  int layer_count() const { return static_cast<int>(layer_sizes.size()) - 1; }
  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
};

void validate_spec(const MlpSpec& spec);

// Per-layer weights (out x in, row-major) and biases. Also reused as the
// gradient container since shapes coincide.
struct MlpParams {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  void set_zero();
  void scale(double s);
  void add_scaled(const MlpParams& other, double s);
};

MlpParams zero_params(const MlpSpec& spec);
int param_count(const MlpSpec& spec);
int layer_param_count(const MlpSpec& spec, int layer);  // weights + bias

// Flat layout: per layer, weights row-major then bias.
Vector flatten_params(const MlpParams& params);
void unflatten_params(const MlpSpec& spec, const double* flat, MlpParams& out);
void flatten_layer(const MlpParams& params, int layer, double* out);
void unflatten_layer(const MlpSpec& spec, int layer, const double* flat, MlpParams& out);

// Inverted-dropout scale factors per hidden layer: 0 or 1/(1-p).
struct DropoutMask {
  std::vector<Vector> scale;
};

class Rng;
DropoutMask make_dropout_mask(const MlpSpec& spec, Rng& rng);

// Frequency-aware init for sine nets (first layer +-1/fan_in, later layers
// +-sqrt(6/fan_in)/omega0), fan-in-scaled uniform for relu.
MlpParams init_mlp(const MlpSpec& spec, std::uint64_t seed);

// Forward/backward working storage, reusable across calls.
struct MlpCache {
  std::vector<Vector> act;  // act[0] = input, act[l] = post-activation of layer l-1
  std::vector<Vector> pre;  // pre[l] = W_l act[l] + b_l
  std::vector<std::array<Vector, 3>> tan_act;  // input-tangent activations
  std::vector<std::array<Vector, 3>> tan_pre;  // input-tangent pre-activations
  bool has_tangents = false;
};

// Plain forward pass; fills cache when given.
Vector mlp_forward(const MlpParams& params, const MlpSpec& spec, const double* x,
                   const DropoutMask* mask = nullptr, MlpCache* cache = nullptr);
Vector mlp_forward(const MlpParams& params, const MlpSpec& spec, const Vec3& x,
                   const DropoutMask* mask = nullptr, MlpCache* cache = nullptr);

// Forward plus exact input Jacobian (output_dim x 3; requires input_dim == 3).
Vector mlp_forward_jacobian(const MlpParams& params, const MlpSpec& spec, const Vec3& x,
                            Matrix& jacobian, const DropoutMask* mask = nullptr,
                            MlpCache* cache = nullptr);
Matrix mlp_input_jacobian(const MlpParams& params, const MlpSpec& spec, const Vec3& x,
                          const DropoutMask* mask = nullptr);

// First-order reverse pass for losses of the outputs only. Accumulates into
// grads; writes dL/dx when x_adjoint is non-null.
void mlp_backward(const MlpParams& params, const MlpSpec& spec, const MlpCache& cache,
                  const Vector& y_adjoint, const DropoutMask* mask, MlpParams& grads,
                  double* x_adjoint = nullptr);

// Reverse-over-forward pass for losses that also depend on the input Jacobian:
// given dL/dy and dL/dJ it accumulates exact parameter gradients, including
// the second-order terms through the Jacobian computation.
void mlp_backward_jacobian(const MlpParams& params, const MlpSpec& spec, const MlpCache& cache,
                           const Vector& y_adjoint, const Matrix& jacobian_adjoint,
                           const DropoutMask* mask, MlpParams& grads,
                           double* x_adjoint = nullptr);

// Batch gradient accumulation: the loss supplies dL/dy_i (and dL/dJ_i when the
// loss depends on input Jacobians); returns gradients w.r.t. every parameter
// and, when requested, w.r.t. the inputs.
void accumulate_loss_gradients(const MlpParams& params, const MlpSpec& spec,
                               const std::vector<Vec3>& points,
                               const std::vector<Vector>& y_adjoints,
                               const std::vector<Matrix>* jacobian_adjoints, MlpParams& grads,
                               std::vector<Vec3>* x_adjoints = nullptr);

}  // namespace tvc

#endif
