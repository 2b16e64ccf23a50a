#ifndef TVC_ADAM_HPP
#define TVC_ADAM_HPP

#include <cstdint>

#include "tvc/linalg.hpp"

namespace tvc {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second-moment buffers with a per-group step count, so groups touched
// intermittently (per-shape latents) keep their own bias correction.
struct AdamState {
  Vector m, v;
  std::int64_t t = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

void adam_update(AdamState& state, Vector& params, const Vector& grads, const AdamConfig& config);

}  // namespace tvc

#endif
