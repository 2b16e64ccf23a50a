#include "tvc/mlp.hpp"

#include <cmath>

#include "tvc/errors.hpp"
#include "tvc/rng.hpp"

namespace tvc {
namespace {

inline double act_value(const Activation& a, double z) {
  return a.kind == ActivationKind::Sine ? std::sin(a.omega0 * z) : (z > 0.0 ? z : 0.0);
}
inline double act_deriv(const Activation& a, double z) {
  return a.kind == ActivationKind::Sine ? a.omega0 * std::cos(a.omega0 * z)
                                        : (z > 0.0 ? 1.0 : 0.0);
}
inline double act_deriv2(const Activation& a, double z) {
  return a.kind == ActivationKind::Sine ? -a.omega0 * a.omega0 * std::sin(a.omega0 * z) : 0.0;
}

void ensure_cache(const MlpSpec& spec, MlpCache& cache, bool tangents) {
  const int layers = spec.layer_count();
  cache.act.resize(layers);
  cache.pre.resize(layers);
  for (int l = 0; l < layers; ++l) {
    cache.act[l].resize(spec.layer_sizes[l]);
    cache.pre[l].resize(spec.layer_sizes[l + 1]);
  }
  cache.has_tangents = tangents;
  if (tangents) {
    cache.tan_act.resize(layers);
    cache.tan_pre.resize(layers);
    for (int l = 0; l < layers; ++l)
      for (int c = 0; c < 3; ++c) {
        cache.tan_act[l][c].resize(spec.layer_sizes[l]);
        cache.tan_pre[l][c].resize(spec.layer_sizes[l + 1]);
      }
  }
}

const Vector* mask_for_layer(const MlpSpec& spec, const DropoutMask* mask, int hidden_layer) {
  if (!mask || mask->scale.empty()) return nullptr;
  if (hidden_layer >= static_cast<int>(mask->scale.size()))
    throw ValidationError("dropout mask does not match network depth");
  return &mask->scale[hidden_layer];
}

}  // namespace

void validate_spec(const MlpSpec& spec) {
  if (spec.layer_sizes.size() < 2) throw ValidationError("MLP needs at least input and output layers");
  for (int s : spec.layer_sizes)
    if (s <= 0) throw ValidationError("MLP layer sizes must be positive");
  if (spec.dropout_rate < 0.0 || spec.dropout_rate >= 1.0)
    throw ValidationError("dropout rate must lie in [0, 1)");
}

void MlpParams::set_zero() {
  for (auto& w : weights) std::fill(w.a.begin(), w.a.end(), 0.0);
  for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

void MlpParams::scale(double s) {
  for (auto& w : weights)
    for (auto& v : w.a) v *= s;
  for (auto& b : biases)
    for (auto& v : b) v *= s;
}

void MlpParams::add_scaled(const MlpParams& other, double s) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (std::size_t i = 0; i < weights[l].a.size(); ++i) weights[l].a[i] += s * other.weights[l].a[i];
    for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += s * other.biases[l][i];
  }
}

MlpParams zero_params(const MlpSpec& spec) {
  validate_spec(spec);
  MlpParams p;
  for (int l = 0; l < spec.layer_count(); ++l) {
    p.weights.emplace_back(spec.layer_sizes[l + 1], spec.layer_sizes[l]);
    p.biases.emplace_back(spec.layer_sizes[l + 1], 0.0);
  }
  return p;
}

int layer_param_count(const MlpSpec& spec, int layer) {
  return spec.layer_sizes[layer + 1] * spec.layer_sizes[layer] + spec.layer_sizes[layer + 1];
}

int param_count(const MlpSpec& spec) {
  int n = 0;
  for (int l = 0; l < spec.layer_count(); ++l) n += layer_param_count(spec, l);
  return n;
}

Vector flatten_params(const MlpParams& params) {
  Vector out;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    out.insert(out.end(), params.weights[l].a.begin(), params.weights[l].a.end());
    out.insert(out.end(), params.biases[l].begin(), params.biases[l].end());
  }
  return out;
}

void unflatten_params(const MlpSpec& spec, const double* flat, MlpParams& out) {
  int offset = 0;
  for (int l = 0; l < spec.layer_count(); ++l) {
    unflatten_layer(spec, l, flat + offset, out);
    offset += layer_param_count(spec, l);
  }
}

void flatten_layer(const MlpParams& params, int layer, double* out) {
  const Matrix& w = params.weights[layer];
  std::copy(w.a.begin(), w.a.end(), out);
  std::copy(params.biases[layer].begin(), params.biases[layer].end(), out + w.a.size());
}

void unflatten_layer(const MlpSpec& spec, int layer, const double* flat, MlpParams& out) {
  Matrix& w = out.weights[layer];
  w.rows = spec.layer_sizes[layer + 1];
  w.cols = spec.layer_sizes[layer];
  w.a.assign(flat, flat + static_cast<std::size_t>(w.rows) * w.cols);
  out.biases[layer].assign(flat + w.a.size(), flat + w.a.size() + w.rows);
}

DropoutMask make_dropout_mask(const MlpSpec& spec, Rng& rng) {
  DropoutMask mask;
  const double p = spec.dropout_rate;
  if (p <= 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - p);
  for (int l = 0; l < spec.layer_count() - 1; ++l) {
    Vector m(spec.layer_sizes[l + 1]);
    for (auto& v : m) v = rng.uniform() < p ? 0.0 : keep_scale;
    mask.scale.push_back(std::move(m));
  }
  return mask;
}

MlpParams init_mlp(const MlpSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  MlpParams p = zero_params(spec);
  Rng rng(seed);
  for (int l = 0; l < spec.layer_count(); ++l) {
    const double fan_in = spec.layer_sizes[l];
    double bound;
    if (spec.activation.kind == ActivationKind::Sine)
      bound = l == 0 ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / spec.activation.omega0;
    else
      bound = std::sqrt(6.0 / fan_in);
    for (auto& v : p.weights[l].a) v = rng.uniform(-bound, bound);
    for (auto& v : p.biases[l]) v = rng.uniform(-bound, bound);
  }
  return p;
}

Vector mlp_forward(const MlpParams& params, const MlpSpec& spec, const double* x,
                   const DropoutMask* mask, MlpCache* cache) {
  const int layers = spec.layer_count();
  MlpCache local;
  MlpCache& c = cache ? *cache : local;
  ensure_cache(spec, c, false);

  std::copy(x, x + spec.input_dim(), c.act[0].begin());
  for (int l = 0; l < layers; ++l) {
    matvec(params.weights[l], c.act[l].data(), c.pre[l].data());
    for (std::size_t i = 0; i < c.pre[l].size(); ++i) c.pre[l][i] += params.biases[l][i];
    if (l + 1 < layers) {
      const Vector* m = mask_for_layer(spec, mask, l);
      Vector& a = c.act[l + 1];
      for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = act_value(spec.activation, c.pre[l][i]);
        if (m) a[i] *= (*m)[i];
      }
    }
  }
  return c.pre[layers - 1];
}

Vector mlp_forward(const MlpParams& params, const MlpSpec& spec, const Vec3& x,
                   const DropoutMask* mask, MlpCache* cache) {
  if (spec.input_dim() != 3) throw ValidationError("Vec3 input requires a 3-input network");
  double buf[3] = {x.x, x.y, x.z};
  return mlp_forward(params, spec, buf, mask, cache);
}

Vector mlp_forward_jacobian(const MlpParams& params, const MlpSpec& spec, const Vec3& x,
                            Matrix& jacobian, const DropoutMask* mask, MlpCache* cache) {
  if (spec.input_dim() != 3)
    throw ValidationError("input Jacobian path requires a 3-input network");
  const int layers = spec.layer_count();
  MlpCache local;
  MlpCache& c = cache ? *cache : local;
  ensure_cache(spec, c, true);

  c.act[0][0] = x.x;
  c.act[0][1] = x.y;
  c.act[0][2] = x.z;
  for (int cdim = 0; cdim < 3; ++cdim) {
    std::fill(c.tan_act[0][cdim].begin(), c.tan_act[0][cdim].end(), 0.0);
    c.tan_act[0][cdim][cdim] = 1.0;
  }

  for (int l = 0; l < layers; ++l) {
    matvec(params.weights[l], c.act[l].data(), c.pre[l].data());
    for (std::size_t i = 0; i < c.pre[l].size(); ++i) c.pre[l][i] += params.biases[l][i];
    for (int cdim = 0; cdim < 3; ++cdim)
      matvec(params.weights[l], c.tan_act[l][cdim].data(), c.tan_pre[l][cdim].data());

    if (l + 1 < layers) {
      const Vector* m = mask_for_layer(spec, mask, l);
      Vector& a = c.act[l + 1];
      for (std::size_t i = 0; i < a.size(); ++i) {
        double d = act_deriv(spec.activation, c.pre[l][i]);
        double scale = m ? (*m)[i] : 1.0;
        a[i] = act_value(spec.activation, c.pre[l][i]) * scale;
        for (int cdim = 0; cdim < 3; ++cdim)
          c.tan_act[l + 1][cdim][i] = d * c.tan_pre[l][cdim][i] * scale;
      }
    }
  }

  const int out_dim = spec.output_dim();
  jacobian = Matrix(out_dim, 3);
  for (int cdim = 0; cdim < 3; ++cdim)
    for (int i = 0; i < out_dim; ++i) jacobian(i, cdim) = c.tan_pre[layers - 1][cdim][i];
  return c.pre[layers - 1];
}

Matrix mlp_input_jacobian(const MlpParams& params, const MlpSpec& spec, const Vec3& x,
                          const DropoutMask* mask) {
  Matrix j;
  mlp_forward_jacobian(params, spec, x, j, mask);
  return j;
}

void mlp_backward(const MlpParams& params, const MlpSpec& spec, const MlpCache& cache,
                  const Vector& y_adjoint, const DropoutMask* mask, MlpParams& grads,
                  double* x_adjoint) {
  const int layers = spec.layer_count();
  Vector zbar = y_adjoint;
  Vector abar;
  for (int l = layers - 1; l >= 0; --l) {
    add_outer(grads.weights[l], zbar.data(), cache.act[l].data());
    for (std::size_t i = 0; i < zbar.size(); ++i) grads.biases[l][i] += zbar[i];
    abar.resize(spec.layer_sizes[l]);
    matTvec(params.weights[l], zbar.data(), abar.data());
    if (l > 0) {
      const Vector* m = mask_for_layer(spec, mask, l - 1);
      zbar.resize(spec.layer_sizes[l]);
      for (std::size_t i = 0; i < zbar.size(); ++i) {
        double g = abar[i];
        if (m) g *= (*m)[i];
        zbar[i] = g * act_deriv(spec.activation, cache.pre[l - 1][i]);
      }
    }
  }
  if (x_adjoint)
    for (int i = 0; i < spec.input_dim(); ++i) x_adjoint[i] += abar[i];
}

void mlp_backward_jacobian(const MlpParams& params, const MlpSpec& spec, const MlpCache& cache,
                           const Vector& y_adjoint, const Matrix& jacobian_adjoint,
                           const DropoutMask* mask, MlpParams& grads, double* x_adjoint) {
  if (!cache.has_tangents)
    throw ValidationError("mlp_backward_jacobian requires a cache from mlp_forward_jacobian");
  const int layers = spec.layer_count();
  const int out_dim = spec.output_dim();

  Vector zbar = y_adjoint;
  std::array<Vector, 3> tzbar;
  for (int cdim = 0; cdim < 3; ++cdim) {
    tzbar[cdim].resize(out_dim);
    for (int i = 0; i < out_dim; ++i) tzbar[cdim][i] = jacobian_adjoint(i, cdim);
  }

  Vector abar;
  std::array<Vector, 3> tabar;
  for (int l = layers - 1; l >= 0; --l) {
    // Affine layer: value and tangent paths share the weights.
    add_outer(grads.weights[l], zbar.data(), cache.act[l].data());
    for (std::size_t i = 0; i < zbar.size(); ++i) grads.biases[l][i] += zbar[i];
    for (int cdim = 0; cdim < 3; ++cdim)
      add_outer(grads.weights[l], tzbar[cdim].data(), cache.tan_act[l][cdim].data());

    abar.resize(spec.layer_sizes[l]);
    matTvec(params.weights[l], zbar.data(), abar.data());
    for (int cdim = 0; cdim < 3; ++cdim) {
      tabar[cdim].resize(spec.layer_sizes[l]);
      matTvec(params.weights[l], tzbar[cdim].data(), tabar[cdim].data());
    }

    if (l > 0) {
      const Vector* m = mask_for_layer(spec, mask, l - 1);
      const int n = spec.layer_sizes[l];
      zbar.resize(n);
      for (int cdim = 0; cdim < 3; ++cdim) tzbar[cdim].resize(n);
      for (int i = 0; i < n; ++i) {
        double z = cache.pre[l - 1][i];
        double scale = m ? (*m)[i] : 1.0;
        double d1 = act_deriv(spec.activation, z);
        double d2 = act_deriv2(spec.activation, z);
        // Value path through the activation.
        double acc = abar[i] * scale * d1;
        // Curvature path: tangents multiply act'(z), so its z-dependence feeds back.
        for (int cdim = 0; cdim < 3; ++cdim) {
          acc += tabar[cdim][i] * scale * d2 * cache.tan_pre[l - 1][cdim][i];
          tzbar[cdim][i] = tabar[cdim][i] * scale * d1;
        }
        zbar[i] = acc;
      }
    }
  }
  if (x_adjoint)
    for (int i = 0; i < spec.input_dim(); ++i) x_adjoint[i] += abar[i];
}

void accumulate_loss_gradients(const MlpParams& params, const MlpSpec& spec,
                               const std::vector<Vec3>& points,
                               const std::vector<Vector>& y_adjoints,
                               const std::vector<Matrix>* jacobian_adjoints, MlpParams& grads,
                               std::vector<Vec3>* x_adjoints) {
  if (points.size() != y_adjoints.size())
    throw ValidationError("one output adjoint required per point");
  if (jacobian_adjoints && jacobian_adjoints->size() != points.size())
    throw ValidationError("one Jacobian adjoint required per point");
  if (x_adjoints) x_adjoints->assign(points.size(), Vec3{0, 0, 0});

  MlpCache cache;
  Matrix jac;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double xbar[3] = {0, 0, 0};
    if (jacobian_adjoints) {
      mlp_forward_jacobian(params, spec, points[i], jac, nullptr, &cache);
      mlp_backward_jacobian(params, spec, cache, y_adjoints[i], (*jacobian_adjoints)[i], nullptr,
                            grads, x_adjoints ? xbar : nullptr);
    } else {
      mlp_forward(params, spec, points[i], nullptr, &cache);
      mlp_backward(params, spec, cache, y_adjoints[i], nullptr, grads,
                   x_adjoints ? xbar : nullptr);
    }
    if (x_adjoints) (*x_adjoints)[i] = Vec3{xbar[0], xbar[1], xbar[2]};
  }
}

}  // namespace tvc
