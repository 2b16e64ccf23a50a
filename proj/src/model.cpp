#include "tvc/model.hpp"

#include "tvc/errors.hpp"
#include "tvc/rng.hpp"

namespace tvc {

MlpSpec NetsConfig::sdf_spec() const {
  MlpSpec spec;
  spec.layer_sizes.push_back(3);
  for (int i = 0; i < hidden_layers; ++i) spec.layer_sizes.push_back(hidden_dim);
  spec.layer_sizes.push_back(1);
  spec.activation = Activation{ActivationKind::Sine, omega0};
  spec.dropout_rate = dropout;
  return spec;
}

MlpSpec NetsConfig::deform_spec() const {
  MlpSpec spec;
  spec.layer_sizes.push_back(3);
  for (int i = 0; i < hidden_layers; ++i) spec.layer_sizes.push_back(hidden_dim);
  spec.layer_sizes.push_back(3);
  spec.activation = Activation{ActivationKind::Relu, 0.0};
  spec.dropout_rate = dropout;
  return spec;
}

int ModelState::latent_index(const std::string& id) const {
  for (std::size_t i = 0; i < shape_ids.size(); ++i)
    if (shape_ids[i] == id) return static_cast<int>(i);
  return -1;
}

Vector ModelState::mean_latent() const {
  Vector mean(latent_dim(), 0.0);
  if (latents.empty()) return mean;
  for (const auto& l : latents)
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += l[i];
  for (auto& v : mean) v /= static_cast<double>(latents.size());
  return mean;
}

ModelState init_model(const std::vector<std::string>& shape_ids, ShapeRecord template_record,
                      const NetsConfig& nets, std::uint64_t seed) {
  if (shape_ids.empty()) throw ValidationError("cannot initialize a model without shapes");
  ModelState state;
  state.hyper_s = init_hypernet(nets.sdf_spec(), nets.latent_dim, nets.hyper, mix_seed(seed, 101));
  HyperNetConfig deform_hyper = nets.hyper;
  deform_hyper.reference_output_scale = nets.deform_output_scale;
  state.hyper_d = init_hypernet(nets.deform_spec(), nets.latent_dim, deform_hyper,
                                mix_seed(seed, 102));
  state.shape_ids = shape_ids;
  state.template_record = std::move(template_record);

  Rng rng(mix_seed(seed, 103));
  state.latents.reserve(shape_ids.size());
  for (std::size_t i = 0; i < shape_ids.size(); ++i) {
    Vector alpha(nets.latent_dim);
    for (auto& v : alpha) v = 0.01 * rng.normal();
    state.latents.push_back(std::move(alpha));
  }
  return state;
}

}  // namespace tvc
