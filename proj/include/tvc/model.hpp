#ifndef TVC_MODEL_HPP
#define TVC_MODEL_HPP

#include <string>
#include <vector>

#include "tvc/hypernet.hpp"
#include "tvc/sampling.hpp"

namespace tvc {

struct NetsConfig {
  int hidden_dim = 64;
  int hidden_layers = 4;
  int latent_dim = 32;
  double omega0 = 30.0;
  double dropout = 0.2;
  double deform_output_scale = 0.01;  // near-identity initial deformation
  HyperNetConfig hyper;

  MlpSpec sdf_spec() const;     // 3 -> hidden... -> 1, sine
  MlpSpec deform_spec() const;  // 3 -> hidden... -> 3, relu
};

// Trained state: the two hypernets, one latent row per training shape, and the
// template record everything deforms.
struct ModelState {
  HyperNet hyper_s;
  HyperNet hyper_d;
  std::vector<std::string> shape_ids;
  std::vector<Vector> latents;
  ShapeRecord template_record;

  int latent_dim() const { return hyper_s.latent_dim; }
  int latent_index(const std::string& id) const;  // -1 when unknown
  Vector mean_latent() const;
};

// Hypernets from the nets config; latent codes drawn from N(0, 0.01^2).
ModelState init_model(const std::vector<std::string>& shape_ids, ShapeRecord template_record,
                      const NetsConfig& nets, std::uint64_t seed);

}  // namespace tvc

#endif
