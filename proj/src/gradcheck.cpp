#include "tvc/gradcheck.hpp"

#include <cmath>

#include "tvc/rng.hpp"

namespace tvc {
namespace {

constexpr double kSkipMagnitude = 1e-8;

double total_energy(const TinyProblem& p, const LossWeights& weights) {
  return evaluate_shape_energy(p.hyper_s, p.hyper_d, p.alpha, p.batch, p.field.get(), weights,
                               p.loss, nullptr, nullptr, nullptr, nullptr, nullptr)
      .total;
}

void compare_entry(double analytic, double numeric, const std::string& name, FdComparison& cmp) {
  if (std::abs(analytic) < kSkipMagnitude && std::abs(numeric) < kSkipMagnitude) return;
  double rel = std::abs(analytic - numeric) / std::max(std::abs(analytic), std::abs(numeric));
  ++cmp.checked;
  if (rel > cmp.worst_rel_err) {
    cmp.worst_rel_err = rel;
    cmp.worst_param = name;
  }
}

}  // namespace

TinyProblem make_tiny_problem(std::uint64_t seed, int points_per_term, int hidden,
                              int latent_dim) {
  TinyProblem p;

  MlpSpec sdf_spec;
  sdf_spec.layer_sizes = {3, hidden, hidden, 1};
  sdf_spec.activation = Activation{ActivationKind::Sine, 30.0};
  MlpSpec deform_spec;
  deform_spec.layer_sizes = {3, hidden, hidden, 3};
  deform_spec.activation = Activation{ActivationKind::Relu, 0.0};

  HyperNetConfig hconfig;
  hconfig.hidden_dim = hidden;
  hconfig.hidden_layers = 1;
  p.hyper_s = init_hypernet(sdf_spec, latent_dim, hconfig, mix_seed(seed, 1));
  HyperNetConfig dconfig = hconfig;
  dconfig.reference_output_scale = 0.1;  // keep deformed points inside the clamp band
  p.hyper_d = init_hypernet(deform_spec, latent_dim, dconfig, mix_seed(seed, 2));

  Rng rng(mix_seed(seed, 3));
  p.alpha.resize(latent_dim);
  for (auto& v : p.alpha) v = 0.1 * rng.normal();

  // Target field: sphere-band samples with their analytic signed distances.
  const double radius = 0.5;
  std::vector<Vec3> field_pts;
  std::vector<double> field_sdf;
  for (int i = 0; i < 64; ++i) {
    Vec3 dir = normalized(rng.normal_vec3());
    double r = radius + rng.uniform(-0.08, 0.08);
    field_pts.push_back(r * dir);
    field_sdf.push_back(r - radius);
  }
  RbfConfig rbf;
  p.field = std::make_unique<RbfEstimator>(field_pts, field_sdf, rbf);

  auto on_sphere = [&](double rad) { return rad * normalized(rng.normal_vec3()); };
  for (int i = 0; i < points_per_term; ++i) {
    // Surface pairs: template point and a nearby corresponding target point.
    Vec3 t = on_sphere(radius);
    p.batch.surf_template.push_back(t);
    p.batch.surf_target.push_back(t + 0.1 * rng.normal_vec3());
    // Template volume points inside the band.
    double r = radius + rng.uniform(-0.08, 0.08);
    p.batch.vol_template.push_back(on_sphere(r));
    p.batch.vol_template_sdf.push_back(r - radius);
    // Implicit-field supervision.
    double r2 = radius + rng.uniform(-0.08, 0.08);
    p.batch.sdf_volume.push_back(on_sphere(r2));
    p.batch.sdf_volume_sdf.push_back(r2 - radius);
    Vec3 s = on_sphere(radius);
    p.batch.sdf_surface.push_back(s);
    p.batch.sdf_surface_normals.push_back(normalized(s));
    p.batch.off_surface.push_back(
        {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
  }

  p.loss = LossConfig{};
  p.loss.n_surface = points_per_term;
  p.loss.n_sdr = points_per_term;
  return p;
}

FdComparison finite_difference_check(TinyProblem& p, const LossWeights& weights, double step) {
  HyperNetGrads grads_s = zero_grads(p.hyper_s);
  HyperNetGrads grads_d = zero_grads(p.hyper_d);
  Vector alpha_grad(p.alpha.size(), 0.0);
  evaluate_shape_energy(p.hyper_s, p.hyper_d, p.alpha, p.batch, p.field.get(), weights, p.loss,
                        nullptr, nullptr, &grads_s, &grads_d, &alpha_grad);

  FdComparison cmp;

  auto check_hypernet = [&](HyperNet& h, const HyperNetGrads& analytic, const std::string& tag) {
    Vector flat = flatten_hypernet(h);
    Vector gflat = flatten_hypernet_grads(analytic);
    for (std::size_t i = 0; i < flat.size(); ++i) {
      double keep = flat[i];
      flat[i] = keep + step;
      unflatten_hypernet(flat, h);
      double plus = total_energy(p, weights);
      flat[i] = keep - step;
      unflatten_hypernet(flat, h);
      double minus = total_energy(p, weights);
      flat[i] = keep;
      unflatten_hypernet(flat, h);
      compare_entry(gflat[i], (plus - minus) / (2.0 * step), tag + "[" + std::to_string(i) + "]",
                    cmp);
    }
  };
  check_hypernet(p.hyper_s, grads_s, "hyper_s");
  check_hypernet(p.hyper_d, grads_d, "hyper_d");

  for (std::size_t i = 0; i < p.alpha.size(); ++i) {
    double keep = p.alpha[i];
    p.alpha[i] = keep + step;
    double plus = total_energy(p, weights);
    p.alpha[i] = keep - step;
    double minus = total_energy(p, weights);
    p.alpha[i] = keep;
    compare_entry(alpha_grad[i], (plus - minus) / (2.0 * step),
                  "alpha[" + std::to_string(i) + "]", cmp);
  }
  return cmp;
}

GradCheckReport run_gradcheck(const GradCheckOptions& options) {
  struct TermMask {
    const char* name;
    AblationMask mask;
  };
  const TermMask masks[] = {
      {"surface", {false, true, false, false, false}},
      {"sdr", {false, false, true, false, false}},
      {"smoothness", {false, false, false, true, false}},
      {"volume", {false, false, false, false, true}},
      {"sdf", {true, false, false, false, false}},
      {"energy", {true, true, true, true, true}},
  };

  GradCheckReport report;
  for (int s = 0; s < options.seeds; ++s) {
    std::uint64_t seed = mix_seed(options.base_seed, static_cast<std::uint64_t>(s));
    for (const auto& term : masks) {
      TinyProblem problem = make_tiny_problem(seed);
      LossWeights weights;
      weights.mask = term.mask;
      FdComparison cmp = finite_difference_check(problem, weights, options.step);

      GradCheckTermResult result;
      result.term = term.name;
      result.seed = seed;
      result.worst_rel_err = cmp.worst_rel_err;
      result.worst_param = cmp.worst_param;
      result.checked = cmp.checked;
      result.pass = cmp.worst_rel_err < options.tolerance;
      if (!result.pass) report.pass = false;
      report.terms.push_back(result);
    }
  }
  return report;
}

}  // namespace tvc
