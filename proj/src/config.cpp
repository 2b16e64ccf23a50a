#include "tvc/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "tvc/errors.hpp"

namespace tvc {
namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& section) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ValidationError("unknown config key '" + it.key() + "' in section '" + section + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

AblationPreset ablation_from_string(const std::string& name) {
  if (name == "none") return AblationPreset::None;
  if (name == "wo_sdfnet") return AblationPreset::WoSdfNet;
  if (name == "wo_lsurf") return AblationPreset::WoLsurf;
  if (name == "trte_wo_sdr") return AblationPreset::TrTeWoSdr;
  if (name == "te_wo_sdr") return AblationPreset::TeWoSdr;
  if (name == "wo_field_regul") return AblationPreset::WoFieldRegul;
  if (name == "wo_opt") return AblationPreset::WoOpt;
  throw ValidationError(
      "unknown ablation '" + name +
      "' (expected none, wo_sdfnet, wo_lsurf, trte_wo_sdr, te_wo_sdr, wo_field_regul, wo_opt)");
}

std::string ablation_to_string(AblationPreset preset) {
  switch (preset) {
    case AblationPreset::None: return "none";
    case AblationPreset::WoSdfNet: return "wo_sdfnet";
    case AblationPreset::WoLsurf: return "wo_lsurf";
    case AblationPreset::TrTeWoSdr: return "trte_wo_sdr";
    case AblationPreset::TeWoSdr: return "te_wo_sdr";
    case AblationPreset::WoFieldRegul: return "wo_field_regul";
    case AblationPreset::WoOpt: return "wo_opt";
  }
  return "none";
}

LossWeights RunConfig::train_weights() const {
  LossWeights w = weights;
  switch (ablation) {
    case AblationPreset::WoSdfNet: w.mask.use_sdf = false; break;
    case AblationPreset::WoLsurf: w.mask.use_surf = false; break;
    case AblationPreset::TrTeWoSdr: w.mask.use_sdr = false; break;
    case AblationPreset::WoFieldRegul:
      w.mask.use_sdr = false;
      w.mask.use_smooth = false;
      w.mask.use_vol = false;
      break;
    default: break;
  }
  return w;
}

LossWeights RunConfig::infer_weights() const {
  LossWeights w = weights;
  switch (ablation) {
    case AblationPreset::WoSdfNet: w.mask.use_sdf = false; break;
    case AblationPreset::TrTeWoSdr: w.mask.use_sdr = false; break;
    case AblationPreset::TeWoSdr: w.mask.use_sdr = false; break;
    case AblationPreset::WoFieldRegul:
      w.mask.use_sdr = false;
      w.mask.use_smooth = false;
      w.mask.use_vol = false;
      break;
    default: break;
  }
  return w;
}

void RunConfig::resolve() {
  train.seed = seed;
  train.weights = train_weights();
  train.loss = loss;
  train.rbf = rbf;
  infer.seed = seed;
  infer.use_chamfer_refine = ablation != AblationPreset::WoOpt;
}

std::string RunConfig::to_json_text() const {
  json j = {
      {"seed", seed},
      {"sampling",
       {{"n_volume", sampling.n_volume},
        {"n_surface", sampling.n_surface},
        {"noise_stddevs", {sampling.noise_stddevs.first, sampling.noise_stddevs.second}},
        {"zeta", sampling.zeta},
        {"surface_mode", sampling.surface_mode == SurfaceMode::Replay ? "replay" : "vertices"}}},
      {"nets",
       {{"hidden_dim", nets.hidden_dim},
        {"hidden_layers", nets.hidden_layers},
        {"latent_dim", nets.latent_dim},
        {"omega0", nets.omega0},
        {"dropout", nets.dropout},
        {"deform_output_scale", nets.deform_output_scale},
        {"hyper_hidden_dim", nets.hyper.hidden_dim},
        {"hyper_hidden_layers", nets.hyper.hidden_layers},
        {"hyper_final_scale", nets.hyper.final_scale}}},
      {"loss",
       {{"lambda1", weights.lambda1},
        {"lambda2", weights.lambda2},
        {"lambda3", weights.lambda3},
        {"lambda4", weights.lambda4},
        {"lambda5", weights.lambda5},
        {"eta", loss.eta},
        {"c_off_surface", loss.c_off_surface},
        {"n_surface", loss.n_surface},
        {"n_sdr", loss.n_sdr},
        {"vol_full_map", loss.vol_full_map}}},
      {"rbf", {{"k", rbf.k}, {"epsilon0", rbf.epsilon0}}},
      {"train",
       {{"learning_rate", train.learning_rate},
        {"epochs", train.epochs},
        {"batch_shapes", train.batch_shapes},
        {"beta1", train.beta1},
        {"beta2", train.beta2},
        {"adam_epsilon", train.adam_epsilon}}},
      {"infer",
       {{"map_steps", infer.map_steps},
        {"chamfer_steps", infer.chamfer_steps},
        {"learning_rate", infer.learning_rate},
        {"latent_init", infer.latent_init == LatentInit::Zero ? "zero" : "mean_of_training_latents"},
        {"latent_prior_weight", infer.latent_prior_weight},
        {"chamfer_template_points", infer.chamfer_template_points}}},
      {"ablation", ablation_to_string(ablation)},
  };
  return j.dump(2);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("malformed config JSON: " + std::string(e.what()));
  }

  RunConfig c;
  try {
    reject_unknown_keys(
        j, {"seed", "sampling", "nets", "loss", "rbf", "train", "infer", "ablation"}, "root");
    read(j, "seed", c.seed);
    if (j.contains("sampling")) {
      const json& s = j["sampling"];
      reject_unknown_keys(s, {"n_volume", "n_surface", "noise_stddevs", "zeta", "surface_mode"},
                          "sampling");
      read(s, "n_volume", c.sampling.n_volume);
      read(s, "n_surface", c.sampling.n_surface);
      if (s.contains("noise_stddevs")) {
        auto v = s["noise_stddevs"].get<std::vector<double>>();
        if (v.size() != 2) throw ValidationError("noise_stddevs must have two entries");
        c.sampling.noise_stddevs = {v[0], v[1]};
      }
      read(s, "zeta", c.sampling.zeta);
      if (s.contains("surface_mode")) {
        std::string mode = s["surface_mode"].get<std::string>();
        if (mode == "replay")
          c.sampling.surface_mode = SurfaceMode::Replay;
        else if (mode == "vertices")
          c.sampling.surface_mode = SurfaceMode::Vertices;
        else
          throw ValidationError("surface_mode must be 'replay' or 'vertices'");
      }
    }
    if (j.contains("nets")) {
      const json& n = j["nets"];
      reject_unknown_keys(n,
                          {"hidden_dim", "hidden_layers", "latent_dim", "omega0", "dropout",
                           "deform_output_scale", "hyper_hidden_dim", "hyper_hidden_layers",
                           "hyper_final_scale"},
                          "nets");
      read(n, "hidden_dim", c.nets.hidden_dim);
      read(n, "hidden_layers", c.nets.hidden_layers);
      read(n, "latent_dim", c.nets.latent_dim);
      read(n, "omega0", c.nets.omega0);
      read(n, "dropout", c.nets.dropout);
      read(n, "deform_output_scale", c.nets.deform_output_scale);
      read(n, "hyper_hidden_dim", c.nets.hyper.hidden_dim);
      read(n, "hyper_hidden_layers", c.nets.hyper.hidden_layers);
      read(n, "hyper_final_scale", c.nets.hyper.final_scale);
    }
    if (j.contains("loss")) {
      const json& l = j["loss"];
      reject_unknown_keys(l,
                          {"lambda1", "lambda2", "lambda3", "lambda4", "lambda5", "eta",
                           "c_off_surface", "n_surface", "n_sdr", "vol_full_map"},
                          "loss");
      read(l, "lambda1", c.weights.lambda1);
      read(l, "lambda2", c.weights.lambda2);
      read(l, "lambda3", c.weights.lambda3);
      read(l, "lambda4", c.weights.lambda4);
      read(l, "lambda5", c.weights.lambda5);
      read(l, "eta", c.loss.eta);
      read(l, "c_off_surface", c.loss.c_off_surface);
      read(l, "n_surface", c.loss.n_surface);
      read(l, "n_sdr", c.loss.n_sdr);
      read(l, "vol_full_map", c.loss.vol_full_map);
    }
    if (j.contains("rbf")) {
      const json& r = j["rbf"];
      reject_unknown_keys(r, {"k", "epsilon0"}, "rbf");
      read(r, "k", c.rbf.k);
      read(r, "epsilon0", c.rbf.epsilon0);
    }
    if (j.contains("train")) {
      const json& t = j["train"];
      reject_unknown_keys(
          t, {"learning_rate", "epochs", "batch_shapes", "beta1", "beta2", "adam_epsilon"},
          "train");
      read(t, "learning_rate", c.train.learning_rate);
      read(t, "epochs", c.train.epochs);
      read(t, "batch_shapes", c.train.batch_shapes);
      read(t, "beta1", c.train.beta1);
      read(t, "beta2", c.train.beta2);
      read(t, "adam_epsilon", c.train.adam_epsilon);
    }
    if (j.contains("infer")) {
      const json& i = j["infer"];
      reject_unknown_keys(i,
                          {"map_steps", "chamfer_steps", "learning_rate", "latent_init",
                           "latent_prior_weight", "chamfer_template_points"},
                          "infer");
      read(i, "map_steps", c.infer.map_steps);
      read(i, "chamfer_steps", c.infer.chamfer_steps);
      read(i, "learning_rate", c.infer.learning_rate);
      if (i.contains("latent_init")) {
        std::string init = i["latent_init"].get<std::string>();
        if (init == "zero")
          c.infer.latent_init = LatentInit::Zero;
        else if (init == "mean_of_training_latents")
          c.infer.latent_init = LatentInit::MeanOfTrainingLatents;
        else
          throw ValidationError("latent_init must be 'zero' or 'mean_of_training_latents'");
      }
      read(i, "latent_prior_weight", c.infer.latent_prior_weight);
      read(i, "chamfer_template_points", c.infer.chamfer_template_points);
    }
    if (j.contains("ablation")) c.ablation = ablation_from_string(j["ablation"].get<std::string>());
  } catch (const json::exception& e) {
    throw ValidationError("invalid config value: " + std::string(e.what()));
  }

  // Basic sanity on counts and rates.
  if (c.sampling.n_volume <= 0 || c.sampling.n_surface <= 0 || c.sampling.zeta <= 0.0)
    throw ValidationError("sampling counts and zeta must be positive");
  if (c.loss.eta <= 0.0 || c.loss.c_off_surface <= 0.0)
    throw ValidationError("loss eta and c_off_surface must be positive");
  if (c.loss.n_surface <= 0 || c.loss.n_sdr <= 0)
    throw ValidationError("loss point counts must be positive");
  if (c.weights.lambda1 < 0 || c.weights.lambda2 < 0 || c.weights.lambda3 < 0 ||
      c.weights.lambda4 < 0 || c.weights.lambda5 < 0)
    throw ValidationError("loss weights must be non-negative");
  if (c.rbf.k < 1 || c.rbf.epsilon0 <= 0.0)
    throw ValidationError("rbf needs k >= 1 and epsilon0 > 0");
  if (c.train.learning_rate <= 0.0 || c.train.epochs < 0 || c.train.batch_shapes <= 0)
    throw ValidationError("train needs positive learning rate and batch size");
  if (c.infer.map_steps < 0 || c.infer.chamfer_steps < 0 || c.infer.learning_rate <= 0.0 ||
      c.infer.latent_prior_weight < 0.0)
    throw ValidationError("infer needs non-negative steps/prior and a positive learning rate");

  c.resolve();
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

}  // namespace tvc
