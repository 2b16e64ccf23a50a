#include "tvc/infer.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tvc/errors.hpp"

namespace tvc {
namespace {

double squared_norm(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

Vector initial_alpha(const ModelState& state, const InferConfig& config) {
  if (config.latent_init == LatentInit::MeanOfTrainingLatents) return state.mean_latent();
  return Vector(state.latent_dim(), 0.0);
}

void check_finite_objective(double value, const char* stage) {
  if (!std::isfinite(value))
    throw NumericError(std::string("non-finite objective in ") + stage + " stage");
}

}  // namespace

StageResult map_estimate(const ModelState& state, const ShapeRecord& target,
                         const LossWeights& weights, const LossConfig& loss, const RbfConfig& rbf,
                         const InferConfig& config) {
  ShapeContext ctx(target, rbf);

  LossWeights stage_weights = weights;
  stage_weights.mask.use_surf = false;
  stage_weights.mask.use_smooth = false;
  stage_weights.mask.use_vol = false;
  // sdr is dropped when the target's signed distances are unreliable
  // (partial / noisy / bare point clouds).
  stage_weights.mask.use_sdr = weights.mask.use_sdr && target.sdf_reliable;

  BatchSpec bspec;
  bspec.n_surface = loss.n_surface;
  bspec.n_sdr = loss.n_sdr;
  bspec.with_surf_pairs = false;
  bspec.with_template_volume = stage_weights.mask.use_sdr;
  bspec.with_sdf_terms = stage_weights.mask.use_sdf;

  // One fixed evaluation batch keeps the latent-only descent deterministic and
  // the best-iterate contract exact.
  Rng rng(mix_seed(config.seed, 0x3A9));
  ShapeBatch batch = sample_shape_batch(state.template_record, ctx, bspec, rng);

  Vector alpha = initial_alpha(state, config);

  auto objective = [&](const Vector& a, Vector* grad) {
    EnergyTerms terms =
        evaluate_shape_energy(state.hyper_s, state.hyper_d, a, batch, ctx.field(), stage_weights,
                              loss, nullptr, nullptr, nullptr, nullptr, grad);
    double value = terms.total + config.latent_prior_weight * squared_norm(a);
    if (grad && config.latent_prior_weight > 0.0)
      for (std::size_t i = 0; i < a.size(); ++i)
        (*grad)[i] += 2.0 * config.latent_prior_weight * a[i];
    return value;
  };

  StageResult result;
  result.alpha = alpha;
  result.initial_objective = objective(alpha, nullptr);
  check_finite_objective(result.initial_objective, "MAP");
  result.final_objective = result.initial_objective;

  AdamConfig adam_config{config.learning_rate, 0.9, 0.999, 1e-8};
  AdamState adam(alpha.size());
  for (int step = 0; step < config.map_steps; ++step) {
    Vector grad(alpha.size(), 0.0);
    double value = objective(alpha, &grad);
    check_finite_objective(value, "MAP");
    if (value < result.final_objective) {
      result.final_objective = value;
      result.alpha = alpha;
    }
    adam_update(adam, alpha, grad, adam_config);
  }
  if (config.map_steps > 0) {
    double value = objective(alpha, nullptr);
    check_finite_objective(value, "MAP");
    if (value < result.final_objective) {
      result.final_objective = value;
      result.alpha = alpha;
    }
  }
  return result;
}

StageResult chamfer_refine(const ModelState& state, const Vector& alpha,
                           const std::vector<Vec3>& target_surface, const InferConfig& config) {
  if (target_surface.empty()) throw ValidationError("chamfer refinement needs target points");

  const std::vector<Vec3>& template_pool = state.template_record.surface.points;
  if (template_pool.empty()) throw ValidationError("template record has no surface samples");

  // Fixed template subsample for the whole stage.
  std::vector<Vec3> template_pts;
  if (static_cast<int>(template_pool.size()) <= config.chamfer_template_points) {
    template_pts = template_pool;
  } else {
    Rng rng(mix_seed(config.seed, 0xC4A));
    template_pts.reserve(config.chamfer_template_points);
    for (int i = 0; i < config.chamfer_template_points; ++i)
      template_pts.push_back(template_pool[rng.uniform_int(static_cast<int>(template_pool.size()))]);
  }
  const int n_template = static_cast<int>(template_pts.size());

  KdTree target_tree(target_surface);
  const MlpSpec& deform_spec = state.hyper_d.target_spec;

  std::vector<MlpCache> caches(n_template);
  std::vector<Vec3> deformed(n_template);

  // Bidirectional Chamfer value plus per-deformed-point adjoints for the
  // current assignments.
  auto evaluate = [&](const MlpParams& omega, std::vector<Vec3>* adjoints) {
    for (int i = 0; i < n_template; ++i) {
      Vector v = mlp_forward(omega, deform_spec, template_pts[i], nullptr,
                             adjoints ? &caches[i] : nullptr);
      deformed[i] = template_pts[i] + Vec3{v[0], v[1], v[2]};
    }
    if (adjoints) adjoints->assign(n_template, Vec3{0, 0, 0});
    double value = 0.0;
    for (int i = 0; i < n_template; ++i) {
      int j = target_tree.nearest(deformed[i]);
      Vec3 diff = deformed[i] - target_surface[j];
      value += norm2(diff);
      if (adjoints) (*adjoints)[i] += 2.0 * diff;
    }
    KdTree deformed_tree(deformed);
    for (const Vec3& s : target_surface) {
      int i = deformed_tree.nearest(s);
      Vec3 diff = deformed[i] - s;
      value += norm2(diff);
      if (adjoints) (*adjoints)[i] += 2.0 * diff;
    }
    return value;
  };

  StageResult result;
  result.alpha = alpha;
  Vector current = alpha;

  {
    MlpParams omega = hypernet_forward(state.hyper_d, current);
    result.initial_objective = evaluate(omega, nullptr);
  }
  check_finite_objective(result.initial_objective, "chamfer");
  result.final_objective = result.initial_objective;

  AdamConfig adam_config{config.learning_rate, 0.9, 0.999, 1e-8};
  AdamState adam(current.size());
  std::vector<Vec3> adjoints;
  for (int step = 0; step < config.chamfer_steps; ++step) {
    HyperNetCache hcache;
    MlpParams omega = hypernet_forward(state.hyper_d, current, &hcache);
    double value = evaluate(omega, &adjoints);
    check_finite_objective(value, "chamfer");
    if (value < result.final_objective) {
      result.final_objective = value;
      result.alpha = current;
    }

    MlpParams omega_bar = zero_params(deform_spec);
    for (int i = 0; i < n_template; ++i) {
      Vector ybar{adjoints[i].x, adjoints[i].y, adjoints[i].z};
      mlp_backward(omega, deform_spec, caches[i], ybar, nullptr, omega_bar);
    }
    HyperNetGrads hyper_grads = zero_grads(state.hyper_d);
    Vector alpha_grad;
    hypernet_backward(state.hyper_d, current, hcache, omega_bar, hyper_grads, alpha_grad);
    adam_update(adam, current, alpha_grad, adam_config);
  }
  if (config.chamfer_steps > 0) {
    MlpParams omega = hypernet_forward(state.hyper_d, current);
    double value = evaluate(omega, nullptr);
    check_finite_objective(value, "chamfer");
    if (value < result.final_objective) {
      result.final_objective = value;
      result.alpha = current;
    }
  }
  return result;
}

std::vector<Vec3> deform_points(const ModelState& state, const Vector& alpha,
                                const std::vector<Vec3>& points) {
  MlpParams omega = hypernet_forward(state.hyper_d, alpha);
  const MlpSpec& spec = state.hyper_d.target_spec;
  std::vector<Vec3> out;
  out.reserve(points.size());
  MlpCache cache;
  for (const Vec3& p : points) {
    Vector v = mlp_forward(omega, spec, p, nullptr, &cache);
    out.push_back(p + Vec3{v[0], v[1], v[2]});
  }
  return out;
}

std::vector<Vec3> deform_template(const ModelState& state, const Vector& alpha) {
  return deform_points(state, alpha, state.template_record.surface.points);
}

MatchResult fit_latent(const ModelState& state, const ShapeRecord& target,
                       const LossWeights& weights, const LossConfig& loss, const RbfConfig& rbf,
                       const InferConfig& config) {
  MatchResult result;
  StageResult map_stage = map_estimate(state, target, weights, loss, rbf, config);
  result.map_initial = map_stage.initial_objective;
  result.map_final = map_stage.final_objective;
  result.alpha = map_stage.alpha;

  if (config.use_chamfer_refine && config.chamfer_steps >= 0) {
    StageResult chamfer_stage =
        chamfer_refine(state, map_stage.alpha, target.surface.points, config);
    result.chamfer_initial = chamfer_stage.initial_objective;
    result.chamfer_final = chamfer_stage.final_objective;
    result.alpha = chamfer_stage.alpha;
  }
  return result;
}

DenseMap correspond_points(const ModelState& state, const Vector& alpha_x, const Vector& alpha_y,
                           const std::vector<Vec3>& source_points,
                           const std::vector<Vec3>& target_points) {
  if (source_points.empty() || target_points.empty())
    throw ValidationError("correspondence needs non-empty point sets");

  std::vector<Vec3> deformed_x = deform_template(state, alpha_x);
  std::vector<Vec3> deformed_y = deform_template(state, alpha_y);
  KdTree tree_x(deformed_x);
  KdTree tree_y(target_points);

  DenseMap map;
  map.assignment.reserve(source_points.size());
  map.distances.reserve(source_points.size());
  for (const Vec3& p : source_points) {
    int k = tree_x.nearest(p);
    Vec3 through_template = deformed_y[k];
    int j = tree_y.nearest(through_template);
    map.assignment.push_back(j);
    map.distances.push_back(dist(through_template, target_points[j]));
  }
  return map;
}

DenseMap correspond(const ModelState& state, const ShapeRecord& source, const ShapeRecord& target,
                    const LossWeights& weights, const LossConfig& loss, const RbfConfig& rbf,
                    const InferConfig& config, MatchResult* source_fit, MatchResult* target_fit) {
  MatchResult fit_x = fit_latent(state, source, weights, loss, rbf, config);
  MatchResult fit_y = fit_latent(state, target, weights, loss, rbf, config);
  if (source_fit) *source_fit = fit_x;
  if (target_fit) *target_fit = fit_y;

  DenseMap map =
      correspond_points(state, fit_x.alpha, fit_y.alpha, source.surface.points,
                        target.surface.points);
  map.source_id = source.id;
  map.target_id = target.id;
  return map;
}

void save_dense_map(const DenseMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write map file: " + path);
  for (int idx : map.assignment) out << idx << "\n";
  if (!out) throw IoError("failed writing map file: " + path);
}

DenseMap load_dense_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open map file: " + path);
  DenseMap map;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    int idx;
    if (ls >> idx) map.assignment.push_back(idx);
  }
  if (map.assignment.empty()) throw ValidationError("map file is empty: " + path);
  return map;
}

}  // namespace tvc
