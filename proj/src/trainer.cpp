#include "tvc/trainer.hpp"

#include <filesystem>
#include <fstream>

#include "tvc/checkpoint.hpp"
#include "tvc/errors.hpp"

namespace tvc {

void write_history_csv(const std::vector<StepMetrics>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write loss history: " + path);
  out << "epoch,step,sdf,surf,sdr,smooth,vol,total\n";
  out.precision(17);
  for (const auto& m : history)
    out << m.epoch << "," << m.step << "," << m.terms.sdf << "," << m.terms.surf << ","
        << m.terms.sdr << "," << m.terms.smooth << "," << m.terms.vol << "," << m.terms.total
        << "\n";
  if (!out) throw IoError("failed writing loss history: " + path);
}

TrainSession::TrainSession(ModelState& state, const std::vector<ShapeRecord>& dataset,
                           const TrainConfig& config)
    : state_(&state), dataset_(&dataset), config_(config) {
  if (state.shape_ids.size() != state.latents.size())
    throw ValidationError("model state: one latent per shape id required");
  adam_hyper_s_ = AdamState(hypernet_param_count(state.hyper_s));
  adam_hyper_d_ = AdamState(hypernet_param_count(state.hyper_d));
  adam_latents_.assign(state.latents.size(), AdamState(state.latent_dim()));
}

const ShapeRecord& TrainSession::find_record(const std::string& id) const {
  for (const auto& r : *dataset_)
    if (r.id == id) return r;
  throw ValidationError("shape id '" + id + "' not found in dataset");
}

ShapeContext& TrainSession::context_for(const std::string& id) {
  auto it = contexts_.find(id);
  if (it == contexts_.end())
    it = contexts_.emplace(id, std::make_unique<ShapeContext>(find_record(id), config_.rbf)).first;
  return *it->second;
}

StepMetrics TrainSession::train_step(const std::vector<std::string>& batch_ids) {
  if (batch_ids.empty()) throw ValidationError("train step with an empty batch");
  ModelState& state = *state_;

  HyperNetGrads grads_s = zero_grads(state.hyper_s);
  HyperNetGrads grads_d = zero_grads(state.hyper_d);
  std::vector<std::pair<int, Vector>> latent_grads;

  const double inv_batch = 1.0 / static_cast<double>(batch_ids.size());
  EnergyTerms mean;

  BatchSpec bspec;
  bspec.n_surface = config_.loss.n_surface;
  bspec.n_sdr = config_.loss.n_sdr;

  for (const auto& id : batch_ids) {
    int row = state.latent_index(id);
    if (row < 0) throw ValidationError("shape id '" + id + "' has no latent");
    ShapeContext& ctx = context_for(id);

    Rng rng(mix_seed(config_.seed, mix_seed(0x5A11, static_cast<std::uint64_t>(global_step) * 1009 +
                                                        static_cast<std::uint64_t>(row))));
    ShapeBatch batch = sample_shape_batch(state.template_record, ctx, bspec, rng);

    const MlpSpec& sdf_spec = state.hyper_s.target_spec;
    const MlpSpec& deform_spec = state.hyper_d.target_spec;
    DropoutMask sdf_mask = make_dropout_mask(sdf_spec, rng);
    DropoutMask deform_mask = make_dropout_mask(deform_spec, rng);

    Vector alpha_grad(state.latent_dim(), 0.0);
    EnergyTerms terms;
    try {
      terms = evaluate_shape_energy(state.hyper_s, state.hyper_d, state.latents[row], batch,
                                    ctx.field(), config_.weights, config_.loss,
                                    sdf_mask.scale.empty() ? nullptr : &sdf_mask,
                                    deform_mask.scale.empty() ? nullptr : &deform_mask, &grads_s,
                                    &grads_d, &alpha_grad);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " (shape '" + id + "', step " +
                         std::to_string(global_step) + ")");
    }

    mean.sdf += terms.sdf * inv_batch;
    mean.surf += terms.surf * inv_batch;
    mean.sdr += terms.sdr * inv_batch;
    mean.smooth += terms.smooth * inv_batch;
    mean.vol += terms.vol * inv_batch;
    mean.total += terms.total * inv_batch;

    for (auto& g : alpha_grad) g *= inv_batch;
    latent_grads.emplace_back(row, std::move(alpha_grad));
  }

  AdamConfig adam{config_.learning_rate, config_.beta1, config_.beta2, config_.adam_epsilon};

  Vector flat_s = flatten_hypernet(state.hyper_s);
  Vector gflat_s = flatten_hypernet_grads(grads_s);
  for (auto& g : gflat_s) g *= inv_batch;
  adam_update(adam_hyper_s_, flat_s, gflat_s, adam);
  unflatten_hypernet(flat_s, state.hyper_s);

  Vector flat_d = flatten_hypernet(state.hyper_d);
  Vector gflat_d = flatten_hypernet_grads(grads_d);
  for (auto& g : gflat_d) g *= inv_batch;
  adam_update(adam_hyper_d_, flat_d, gflat_d, adam);
  unflatten_hypernet(flat_d, state.hyper_d);

  for (auto& [row, grad] : latent_grads)
    adam_update(adam_latents_[row], state.latents[row], grad, adam);

  StepMetrics metrics;
  metrics.step = global_step;
  metrics.terms = mean;
  ++global_step;
  return metrics;
}

void TrainSession::fit(const std::string& checkpoint_dir) {
  if (!checkpoint_dir.empty()) std::filesystem::create_directories(checkpoint_dir);

  for (int epoch = start_epoch; epoch < config_.epochs; ++epoch) {
    // Shuffle from the canonical order so any epoch's batches are a pure
    // function of (seed, epoch) and resumed runs reproduce them.
    std::vector<std::string> order = state_->shape_ids;
    Rng shuffle_rng(mix_seed(config_.seed, 0xE90C + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(config_.batch_shapes)) {
      std::size_t end = std::min(order.size(), begin + config_.batch_shapes);
      std::vector<std::string> batch(order.begin() + begin, order.begin() + end);
      StepMetrics m = train_step(batch);
      m.epoch = epoch;
      history_.push_back(m);
    }

    if (!checkpoint_dir.empty()) {
      save_checkpoint(*this, epoch + 1, checkpoint_dir + "/epoch_" + std::to_string(epoch + 1),
                      config_echo);
      write_history_csv(history_, checkpoint_dir + "/history.csv");
    }
  }
}

}  // namespace tvc
