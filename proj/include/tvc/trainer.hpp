#ifndef TVC_TRAINER_HPP
#define TVC_TRAINER_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tvc/adam.hpp"
#include "tvc/batching.hpp"
#include "tvc/model.hpp"

namespace tvc {

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 30;
  int batch_shapes = 4;
  double beta1 = 0.9, beta2 = 0.999, adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  LossWeights weights;
  LossConfig loss;
  RbfConfig rbf;
};

struct StepMetrics {
  int epoch = 0;
  int step = 0;  // global step index
  EnergyTerms terms;  // batch means
};

void write_history_csv(const std::vector<StepMetrics>& history, const std::string& path);

// Owns optimizer state and per-shape caches for one training run over an
// in-memory dataset. The dataset and state must outlive the session.
class TrainSession {
 public:
  TrainSession(ModelState& state, const std::vector<ShapeRecord>& dataset,
               const TrainConfig& config);

  // One optimization step over the given shape ids: derive both target nets
  // per shape, evaluate the energy on fresh point subsets, and apply one Adam
  // update to the hypernets and the batch latents only.
  StepMetrics train_step(const std::vector<std::string>& batch_ids);

  // epochs x shuffled batches; writes a checkpoint per epoch when
  // checkpoint_dir is non-empty. Appends to history().
  void fit(const std::string& checkpoint_dir);

  const std::vector<StepMetrics>& history() const { return history_; }
  ModelState& state() { return *state_; }

  // Optimizer state exposed for checkpointing.
  AdamState& adam_hyper_s() { return adam_hyper_s_; }
  AdamState& adam_hyper_d() { return adam_hyper_d_; }
  std::vector<AdamState>& adam_latents() { return adam_latents_; }
  int start_epoch = 0;  // set when resuming from a checkpoint
  int global_step = 0;
  std::string config_echo = "{}";  // embedded into checkpoints for provenance

 private:
  const ShapeRecord& find_record(const std::string& id) const;
  ShapeContext& context_for(const std::string& id);

  ModelState* state_;
  const std::vector<ShapeRecord>* dataset_;
  TrainConfig config_;
  AdamState adam_hyper_s_, adam_hyper_d_;
  std::vector<AdamState> adam_latents_;
  std::map<std::string, std::unique_ptr<ShapeContext>> contexts_;
  std::vector<StepMetrics> history_;
};

}  // namespace tvc

#endif
