#ifndef TVC_CONFIG_HPP
#define TVC_CONFIG_HPP

#include <string>

#include "tvc/infer.hpp"
#include "tvc/model.hpp"
#include "tvc/sampling.hpp"
#include "tvc/trainer.hpp"

namespace tvc {

// The named ablation experiments; each is a pure mask / stage-toggle change.
enum class AblationPreset {
  None,
  WoSdfNet,       // drop the implicit-field term at train and test
  WoLsurf,        // drop surface supervision at training
  TrTeWoSdr,      // drop sdr at train and test
  TeWoSdr,        // drop sdr at test only
  WoFieldRegul,   // train/test with surface + field terms only
  WoOpt,          // skip the Chamfer refinement stage
};

AblationPreset ablation_from_string(const std::string& name);
std::string ablation_to_string(AblationPreset preset);

// Full run configuration; every field has a documented default and the JSON
// parser rejects unknown keys. The serialized form is embedded into output
// manifests for provenance.
struct RunConfig {
  std::uint64_t seed = 1;
  SamplingConfig sampling;
  NetsConfig nets;
  LossWeights weights;
  LossConfig loss;
  RbfConfig rbf;
  TrainConfig train;   // seed/weights/loss/rbf duplicated in resolved()
  InferConfig infer;
  AblationPreset ablation = AblationPreset::None;

  // Copies the shared sections (seed, weights, loss, rbf) into train/infer and
  // applies the ablation preset; call after parsing.
  void resolve();

  LossWeights train_weights() const;
  LossWeights infer_weights() const;

  std::string to_json_text() const;
  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
};

}  // namespace tvc

#endif
