#include "tvc/energy.hpp"

#include <cmath>

#include "tvc/errors.hpp"

namespace tvc {
namespace {

constexpr double kNormFloor = 1e-300;

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline double det3(const Matrix& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

void check_finite(double value, const char* term) {
  if (!std::isfinite(value))
    throw NumericError(std::string("non-finite value in ") + term + " loss");
}

}  // namespace

EnergyTerms evaluate_energy(const MlpParams& sdf_params, const MlpSpec& sdf_spec,
                            const MlpParams& deform_params, const MlpSpec& deform_spec,
                            const ShapeBatch& batch, const RbfEstimator* target_field,
                            const LossWeights& weights, const LossConfig& config,
                            const DropoutMask* sdf_mask, const DropoutMask* deform_mask,
                            MlpParams* sdf_grads, MlpParams* deform_grads) {
  const AblationMask& mask = weights.mask;
  const bool want_sdr = mask.use_sdr && target_field != nullptr && !batch.vol_template.empty();
  EnergyTerms terms;

  MlpCache cache;
  Matrix jac;

  // Deformed surface pairs.
  if (mask.use_surf && !batch.surf_template.empty()) {
    if (batch.surf_template.size() != batch.surf_target.size())
      throw ValidationError("surface batch pairs must align");
    const double inv_n = 1.0 / static_cast<double>(batch.surf_template.size());
    for (std::size_t i = 0; i < batch.surf_template.size(); ++i) {
      Vector v = mlp_forward(deform_params, deform_spec, batch.surf_template[i], deform_mask,
                             deform_grads ? &cache : nullptr);
      Vec3 deformed = batch.surf_template[i] + Vec3{v[0], v[1], v[2]};
      Vec3 diff = deformed - batch.surf_target[i];
      double d = norm(diff);
      terms.surf += d * inv_n;
      if (deform_grads && d > kNormFloor) {
        double s = weights.lambda2 * inv_n / d;
        Vector ybar{s * diff.x, s * diff.y, s * diff.z};
        mlp_backward(deform_params, deform_spec, cache, ybar, deform_mask, *deform_grads);
      }
    }
    check_finite(terms.surf, "surface");
  }

  // Template volume points: sdr needs the deformed position, smoothness and
  // volume preservation need the displacement Jacobian.
  const bool want_jac_terms = (mask.use_smooth || mask.use_vol) && !batch.vol_template.empty();
  if (want_sdr || want_jac_terms) {
    if (batch.vol_template.size() != batch.vol_template_sdf.size())
      throw ValidationError("template volume batch needs one sdf value per point");
    const double inv_n = 1.0 / static_cast<double>(batch.vol_template.size());
    Matrix jbar(3, 3);
    for (std::size_t i = 0; i < batch.vol_template.size(); ++i) {
      Vector ybar(3, 0.0);
      bool have_ybar = false;
      if (want_jac_terms) {
        Vector v = mlp_forward_jacobian(deform_params, deform_spec, batch.vol_template[i], jac,
                                        deform_mask, &cache);
        std::fill(jbar.a.begin(), jbar.a.end(), 0.0);

        if (mask.use_smooth) {
          double sq = 0.0;
          for (double e : jac.a) sq += e * e;
          double fro = std::sqrt(sq);
          terms.smooth += fro * inv_n;
          if (deform_grads && fro > kNormFloor) {
            double s = weights.lambda4 * inv_n / fro;
            for (int k = 0; k < 9; ++k) jbar.a[k] += s * jac.a[k];
          }
        }
        if (mask.use_vol) {
          Matrix full = jac;
          if (config.vol_full_map)
            for (int d = 0; d < 3; ++d) full(d, d) += 1.0;
          double det = det3(full);
          terms.vol += std::abs(det - 1.0) * inv_n;
          if (deform_grads) {
            double s = weights.lambda5 * sign_of(det - 1.0) * inv_n;
            // cofactor(full) = d det / d full = d det / d jac
            jbar(0, 0) += s * (full(1, 1) * full(2, 2) - full(1, 2) * full(2, 1));
            jbar(0, 1) += -s * (full(1, 0) * full(2, 2) - full(1, 2) * full(2, 0));
            jbar(0, 2) += s * (full(1, 0) * full(2, 1) - full(1, 1) * full(2, 0));
            jbar(1, 0) += -s * (full(0, 1) * full(2, 2) - full(0, 2) * full(2, 1));
            jbar(1, 1) += s * (full(0, 0) * full(2, 2) - full(0, 2) * full(2, 0));
            jbar(1, 2) += -s * (full(0, 0) * full(2, 1) - full(0, 1) * full(2, 0));
            jbar(2, 0) += s * (full(0, 1) * full(1, 2) - full(0, 2) * full(1, 1));
            jbar(2, 1) += -s * (full(0, 0) * full(1, 2) - full(0, 2) * full(1, 0));
            jbar(2, 2) += s * (full(0, 0) * full(1, 1) - full(0, 1) * full(1, 0));
          }
        }
        if (want_sdr) {
          Vec3 deformed = batch.vol_template[i] + Vec3{v[0], v[1], v[2]};
          RbfValue est = target_field->estimate(deformed);
          double e = clamp_sym(batch.vol_template_sdf[i], config.eta) -
                     clamp_sym(est.value, config.eta);
          terms.sdr += std::abs(e) * inv_n;
          if (deform_grads && std::abs(est.value) < config.eta) {
            double s = -weights.lambda3 * sign_of(e) * inv_n;
            ybar[0] = s * est.gradient.x;
            ybar[1] = s * est.gradient.y;
            ybar[2] = s * est.gradient.z;
            have_ybar = true;
          }
        }
        if (deform_grads)
          mlp_backward_jacobian(deform_params, deform_spec, cache, ybar, jbar, deform_mask,
                                *deform_grads);
        (void)have_ybar;
      } else {
        // sdr only: first-order path.
        Vector v = mlp_forward(deform_params, deform_spec, batch.vol_template[i], deform_mask,
                               deform_grads ? &cache : nullptr);
        Vec3 deformed = batch.vol_template[i] + Vec3{v[0], v[1], v[2]};
        RbfValue est = target_field->estimate(deformed);
        double e = clamp_sym(batch.vol_template_sdf[i], config.eta) -
                   clamp_sym(est.value, config.eta);
        terms.sdr += std::abs(e) * inv_n;
        if (deform_grads && std::abs(est.value) < config.eta) {
          double s = -weights.lambda3 * sign_of(e) * inv_n;
          ybar[0] = s * est.gradient.x;
          ybar[1] = s * est.gradient.y;
          ybar[2] = s * est.gradient.z;
          mlp_backward(deform_params, deform_spec, cache, ybar, deform_mask, *deform_grads);
        }
      }
    }
    check_finite(terms.sdr, "sdr");
    check_finite(terms.smooth, "smoothness");
    check_finite(terms.vol, "volume");
  }

  // Implicit-field supervision on the target shape.
  if (mask.use_sdf) {
    Matrix jbar(1, 3);
    if (!batch.sdf_volume.empty()) {
      if (batch.sdf_volume.size() != batch.sdf_volume_sdf.size())
        throw ValidationError("sdf volume batch needs one sdf value per point");
      const double inv_n = 1.0 / static_cast<double>(batch.sdf_volume.size());
      for (std::size_t i = 0; i < batch.sdf_volume.size(); ++i) {
        Vector f = mlp_forward_jacobian(sdf_params, sdf_spec, batch.sdf_volume[i], jac, sdf_mask,
                                        &cache);
        Vec3 g{jac(0, 0), jac(0, 1), jac(0, 2)};
        double gn = norm(g);
        terms.sdf += (std::abs(gn - 1.0) + std::abs(f[0] - batch.sdf_volume_sdf[i])) * inv_n;
        if (sdf_grads) {
          Vector ybar{weights.lambda1 * sign_of(f[0] - batch.sdf_volume_sdf[i]) * inv_n};
          double s = gn > kNormFloor ? weights.lambda1 * sign_of(gn - 1.0) * inv_n / gn : 0.0;
          jbar(0, 0) = s * g.x;
          jbar(0, 1) = s * g.y;
          jbar(0, 2) = s * g.z;
          mlp_backward_jacobian(sdf_params, sdf_spec, cache, ybar, jbar, sdf_mask, *sdf_grads);
        }
      }
    }
    if (!batch.sdf_surface.empty()) {
      if (batch.sdf_surface.size() != batch.sdf_surface_normals.size())
        throw ValidationError("sdf surface batch needs one normal per point");
      const double inv_n = 1.0 / static_cast<double>(batch.sdf_surface.size());
      for (std::size_t i = 0; i < batch.sdf_surface.size(); ++i) {
        mlp_forward_jacobian(sdf_params, sdf_spec, batch.sdf_surface[i], jac, sdf_mask, &cache);
        Vec3 g{jac(0, 0), jac(0, 1), jac(0, 2)};
        terms.sdf += (1.0 - dot(g, batch.sdf_surface_normals[i])) * inv_n;
        if (sdf_grads) {
          Vector ybar{0.0};
          double s = -weights.lambda1 * inv_n;
          jbar(0, 0) = s * batch.sdf_surface_normals[i].x;
          jbar(0, 1) = s * batch.sdf_surface_normals[i].y;
          jbar(0, 2) = s * batch.sdf_surface_normals[i].z;
          mlp_backward_jacobian(sdf_params, sdf_spec, cache, ybar, jbar, sdf_mask, *sdf_grads);
        }
      }
    }
    if (!batch.off_surface.empty()) {
      const double inv_n = 1.0 / static_cast<double>(batch.off_surface.size());
      for (std::size_t i = 0; i < batch.off_surface.size(); ++i) {
        Vector f = mlp_forward(sdf_params, sdf_spec, batch.off_surface[i], sdf_mask,
                               sdf_grads ? &cache : nullptr);
        double psi = std::exp(-config.c_off_surface * std::abs(f[0]));
        terms.sdf += psi * inv_n;
        if (sdf_grads) {
          Vector ybar{-weights.lambda1 * config.c_off_surface * sign_of(f[0]) * psi * inv_n};
          mlp_backward(sdf_params, sdf_spec, cache, ybar, sdf_mask, *sdf_grads);
        }
      }
    }
    check_finite(terms.sdf, "sdf");
  }

  terms.total = (mask.use_sdf ? weights.lambda1 * terms.sdf : 0.0) +
                (mask.use_surf ? weights.lambda2 * terms.surf : 0.0) +
                (want_sdr ? weights.lambda3 * terms.sdr : 0.0) +
                (mask.use_smooth ? weights.lambda4 * terms.smooth : 0.0) +
                (mask.use_vol ? weights.lambda5 * terms.vol : 0.0);
  check_finite(terms.total, "total");
  return terms;
}

EnergyTerms evaluate_shape_energy(const HyperNet& hyper_s, const HyperNet& hyper_d,
                                  const Vector& alpha, const ShapeBatch& batch,
                                  const RbfEstimator* target_field, const LossWeights& weights,
                                  const LossConfig& config, const DropoutMask* sdf_mask,
                                  const DropoutMask* deform_mask, HyperNetGrads* hyper_s_grads,
                                  HyperNetGrads* hyper_d_grads, Vector* alpha_grad) {
  const bool want_grads = hyper_s_grads || hyper_d_grads || alpha_grad;

  HyperNetCache cache_s, cache_d;
  MlpParams theta = hypernet_forward(hyper_s, alpha, want_grads ? &cache_s : nullptr);
  MlpParams omega = hypernet_forward(hyper_d, alpha, want_grads ? &cache_d : nullptr);

  MlpParams theta_bar, omega_bar;
  if (want_grads) {
    theta_bar = zero_params(hyper_s.target_spec);
    omega_bar = zero_params(hyper_d.target_spec);
  }

  EnergyTerms terms = evaluate_energy(theta, hyper_s.target_spec, omega, hyper_d.target_spec,
                                      batch, target_field, weights, config, sdf_mask, deform_mask,
                                      want_grads ? &theta_bar : nullptr,
                                      want_grads ? &omega_bar : nullptr);

  if (want_grads) {
    if (alpha_grad && alpha_grad->size() != alpha.size()) alpha_grad->assign(alpha.size(), 0.0);
    Vector alpha_bar_s, alpha_bar_d;
    HyperNetGrads local_s = hyper_s_grads ? HyperNetGrads{} : zero_grads(hyper_s);
    HyperNetGrads local_d = hyper_d_grads ? HyperNetGrads{} : zero_grads(hyper_d);
    hypernet_backward(hyper_s, alpha, cache_s, theta_bar,
                      hyper_s_grads ? *hyper_s_grads : local_s, alpha_bar_s);
    hypernet_backward(hyper_d, alpha, cache_d, omega_bar,
                      hyper_d_grads ? *hyper_d_grads : local_d, alpha_bar_d);
    if (alpha_grad)
      for (std::size_t i = 0; i < alpha.size(); ++i)
        (*alpha_grad)[i] += alpha_bar_s[i] + alpha_bar_d[i];
  }
  return terms;
}

}  // namespace tvc
