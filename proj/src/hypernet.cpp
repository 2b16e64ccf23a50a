#include "tvc/hypernet.hpp"

#include "tvc/errors.hpp"
#include "tvc/rng.hpp"

namespace tvc {

HyperNet init_hypernet(const MlpSpec& target_spec, int latent_dim, const HyperNetConfig& config,
                       std::uint64_t seed) {
  validate_spec(target_spec);
  if (latent_dim <= 0) throw ValidationError("latent dimension must be positive");

  HyperNet h;
  h.latent_dim = latent_dim;
  h.target_spec = target_spec;

  MlpParams reference = init_mlp(target_spec, mix_seed(seed, 0xEF));
  if (config.reference_output_scale != 1.0) {
    for (auto& v : reference.weights.back().a) v *= config.reference_output_scale;
    for (auto& v : reference.biases.back()) v *= config.reference_output_scale;
  }
  for (int l = 0; l < target_spec.layer_count(); ++l) {
    MlpSpec block_spec;
    block_spec.layer_sizes.push_back(latent_dim);
    for (int k = 0; k < config.hidden_layers; ++k)
      block_spec.layer_sizes.push_back(config.hidden_dim);
    block_spec.layer_sizes.push_back(layer_param_count(target_spec, l));
    block_spec.activation = Activation{ActivationKind::Relu, 0.0};

    MlpParams params = init_mlp(block_spec, mix_seed(seed, l + 1));
    // Final layer: small weights, bias = flattened reference layer, so the
    // predicted net starts near the reference init for any small latent.
    Matrix& last_w = params.weights.back();
    for (auto& v : last_w.a) v *= config.final_scale;
    flatten_layer(reference, l, params.biases.back().data());

    h.block_specs.push_back(std::move(block_spec));
    h.blocks.push_back(std::move(params));
  }
  return h;
}

MlpParams hypernet_forward(const HyperNet& h, const Vector& alpha, HyperNetCache* cache) {
  if (static_cast<int>(alpha.size()) != h.latent_dim)
    throw ValidationError("latent code dimension does not match hypernet");
  MlpParams target = zero_params(h.target_spec);
  if (cache) {
    cache->block_caches.resize(h.block_count());
    cache->block_outputs.resize(h.block_count());
  }
  for (int l = 0; l < h.block_count(); ++l) {
    Vector flat = mlp_forward(h.blocks[l], h.block_specs[l], alpha.data(), nullptr,
                              cache ? &cache->block_caches[l] : nullptr);
    unflatten_layer(h.target_spec, l, flat.data(), target);
    if (cache) cache->block_outputs[l] = std::move(flat);
  }
  return target;
}

void HyperNetGrads::set_zero() {
  for (auto& b : blocks) b.set_zero();
}

void HyperNetGrads::add_scaled(const HyperNetGrads& other, double s) {
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i].add_scaled(other.blocks[i], s);
}

HyperNetGrads zero_grads(const HyperNet& h) {
  HyperNetGrads g;
  for (const auto& spec : h.block_specs) g.blocks.push_back(zero_params(spec));
  return g;
}

void hypernet_backward(const HyperNet& h, const Vector& alpha, const HyperNetCache& cache,
                       const MlpParams& target_adjoint, HyperNetGrads& grads,
                       Vector& alpha_adjoint) {
  if (cache.block_caches.size() != static_cast<std::size_t>(h.block_count()))
    throw ValidationError("hypernet cache does not match network");
  alpha_adjoint.assign(h.latent_dim, 0.0);
  Vector flat_adjoint;
  for (int l = 0; l < h.block_count(); ++l) {
    flat_adjoint.resize(layer_param_count(h.target_spec, l));
    const Matrix& w = target_adjoint.weights[l];
    std::copy(w.a.begin(), w.a.end(), flat_adjoint.begin());
    std::copy(target_adjoint.biases[l].begin(), target_adjoint.biases[l].end(),
              flat_adjoint.begin() + w.a.size());
    mlp_backward(h.blocks[l], h.block_specs[l], cache.block_caches[l], flat_adjoint, nullptr,
                 grads.blocks[l], alpha_adjoint.data());
  }
  (void)alpha;
}

Vector flatten_hypernet(const HyperNet& h) {
  Vector out;
  for (const auto& b : h.blocks) {
    Vector f = flatten_params(b);
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

void unflatten_hypernet(const Vector& flat, HyperNet& h) {
  std::size_t offset = 0;
  for (int l = 0; l < h.block_count(); ++l) {
    int n = param_count(h.block_specs[l]);
    if (offset + n > flat.size()) throw ValidationError("hypernet flat buffer too small");
    unflatten_params(h.block_specs[l], flat.data() + offset, h.blocks[l]);
    offset += n;
  }
  if (offset != flat.size()) throw ValidationError("hypernet flat buffer size mismatch");
}

Vector flatten_hypernet_grads(const HyperNetGrads& g) {
  Vector out;
  for (const auto& b : g.blocks) {
    Vector f = flatten_params(b);
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

int hypernet_param_count(const HyperNet& h) {
  int n = 0;
  for (const auto& spec : h.block_specs) n += param_count(spec);
  return n;
}

}  // namespace tvc
