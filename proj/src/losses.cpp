#include "tvc/losses.hpp"

#include <cmath>

#include "tvc/errors.hpp"

namespace tvc {
namespace {

constexpr double kNormFloor = 1e-300;  // subgradient 0 at the norm kink

inline double det3(const Matrix& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

// Cofactor matrix: d det(A) / dA.
inline Matrix cofactor3(const Matrix& m) {
  Matrix c(3, 3);
  c(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  c(0, 1) = -(m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0));
  c(0, 2) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  c(1, 0) = -(m(0, 1) * m(2, 2) - m(0, 2) * m(2, 1));
  c(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  c(1, 2) = -(m(0, 0) * m(2, 1) - m(0, 1) * m(2, 0));
  c(2, 0) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  c(2, 1) = -(m(0, 0) * m(1, 2) - m(0, 2) * m(1, 0));
  c(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return c;
}

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double surface_loss(const std::vector<Vec3>& deformed, const std::vector<Vec3>& targets,
                    std::vector<Vec3>* adjoints) {
  if (deformed.empty()) throw ValidationError("surface loss on an empty batch");
  if (deformed.size() != targets.size())
    throw ValidationError("surface loss needs paired deformed/target lists");
  const double inv_n = 1.0 / static_cast<double>(deformed.size());
  if (adjoints) adjoints->assign(deformed.size(), Vec3{0, 0, 0});

  double loss = 0.0;
  for (std::size_t i = 0; i < deformed.size(); ++i) {
    Vec3 diff = deformed[i] - targets[i];
    double d = norm(diff);
    loss += d * inv_n;
    if (adjoints && d > kNormFloor) (*adjoints)[i] = (inv_n / d) * diff;
  }
  return loss;
}

double sdr_loss(const std::vector<double>& template_sdf, const std::vector<Vec3>& deformed,
                const RbfEstimator& target_field, double eta, std::vector<Vec3>* adjoints) {
  if (deformed.empty()) throw ValidationError("sdr loss on an empty batch");
  if (template_sdf.size() != deformed.size())
    throw ValidationError("sdr loss needs one template sdf value per deformed point");
  if (eta <= 0.0) throw ValidationError("clamp width eta must be positive");

  const double inv_n = 1.0 / static_cast<double>(deformed.size());
  if (adjoints) adjoints->assign(deformed.size(), Vec3{0, 0, 0});

  double loss = 0.0;
  for (std::size_t i = 0; i < deformed.size(); ++i) {
    RbfValue est = target_field.estimate(deformed[i]);
    double e = clamp_sym(template_sdf[i], eta) - clamp_sym(est.value, eta);
    loss += std::abs(e) * inv_n;
    if (adjoints && std::abs(est.value) < eta) {
      // d|e|/d(sdf_hat) = -sign(e) inside the clamp; zero when it saturates.
      (*adjoints)[i] = (-sign_of(e) * inv_n) * est.gradient;
    }
  }
  return loss;
}

double smoothness_loss(const std::vector<Matrix>& jacobians, std::vector<Matrix>* adjoints) {
  if (jacobians.empty()) throw ValidationError("smoothness loss on an empty batch");
  const double inv_n = 1.0 / static_cast<double>(jacobians.size());
  if (adjoints) adjoints->assign(jacobians.size(), Matrix(3, 3));

  double loss = 0.0;
  for (std::size_t i = 0; i < jacobians.size(); ++i) {
    double sq = 0.0;
    for (double v : jacobians[i].a) sq += v * v;
    double f = std::sqrt(sq);
    loss += f * inv_n;
    if (adjoints && f > kNormFloor) {
      Matrix& a = (*adjoints)[i];
      for (std::size_t k = 0; k < a.a.size(); ++k) a.a[k] = jacobians[i].a[k] * (inv_n / f);
    }
  }
  return loss;
}

double volume_loss(const std::vector<Matrix>& jacobians, bool full_map,
                   std::vector<Matrix>* adjoints) {
  if (jacobians.empty()) throw ValidationError("volume loss on an empty batch");
  const double inv_n = 1.0 / static_cast<double>(jacobians.size());
  if (adjoints) adjoints->assign(jacobians.size(), Matrix(3, 3));

  double loss = 0.0;
  for (std::size_t i = 0; i < jacobians.size(); ++i) {
    Matrix m = jacobians[i];
    if (full_map)
      for (int d = 0; d < 3; ++d) m(d, d) += 1.0;
    double det = det3(m);
    loss += std::abs(det - 1.0) * inv_n;
    if (adjoints) {
      double s = sign_of(det - 1.0) * inv_n;
      Matrix cof = cofactor3(m);
      Matrix& a = (*adjoints)[i];
      for (std::size_t k = 0; k < a.a.size(); ++k) a.a[k] = s * cof.a[k];
    }
  }
  return loss;
}

double sdf_field_loss(const SdfLossTerms& terms, double c_off_surface, SdfLossAdjoints* adjoints) {
  if (terms.volume_values.size() != terms.volume_gradients.size() ||
      terms.volume_values.size() != terms.volume_sdf.size())
    throw ValidationError("sdf loss: volume group lists must align");
  if (terms.surface_gradients.size() != terms.surface_normals.size())
    throw ValidationError("sdf loss: surface group lists must align");
  if (c_off_surface <= 0.0) throw ValidationError("off-surface sharpness C must be positive");

  if (adjoints) {
    adjoints->volume_value.assign(terms.volume_values.size(), 0.0);
    adjoints->volume_gradient.assign(terms.volume_values.size(), Vec3{0, 0, 0});
    adjoints->surface_gradient.assign(terms.surface_gradients.size(), Vec3{0, 0, 0});
    adjoints->off_surface_value.assign(terms.off_surface_values.size(), 0.0);
  }

  double loss = 0.0;
  if (!terms.volume_values.empty()) {
    const double inv_n = 1.0 / static_cast<double>(terms.volume_values.size());
    for (std::size_t i = 0; i < terms.volume_values.size(); ++i) {
      const Vec3& g = terms.volume_gradients[i];
      double gn = norm(g);
      double eik = std::abs(gn - 1.0);
      double fit = std::abs(terms.volume_values[i] - terms.volume_sdf[i]);
      loss += (eik + fit) * inv_n;
      if (adjoints) {
        adjoints->volume_value[i] = sign_of(terms.volume_values[i] - terms.volume_sdf[i]) * inv_n;
        if (gn > kNormFloor)
          adjoints->volume_gradient[i] = (sign_of(gn - 1.0) * inv_n / gn) * g;
      }
    }
  }
  if (!terms.surface_gradients.empty()) {
    const double inv_n = 1.0 / static_cast<double>(terms.surface_gradients.size());
    for (std::size_t i = 0; i < terms.surface_gradients.size(); ++i) {
      loss += (1.0 - dot(terms.surface_gradients[i], terms.surface_normals[i])) * inv_n;
      if (adjoints) adjoints->surface_gradient[i] = -inv_n * terms.surface_normals[i];
    }
  }
  if (!terms.off_surface_values.empty()) {
    const double inv_n = 1.0 / static_cast<double>(terms.off_surface_values.size());
    for (std::size_t i = 0; i < terms.off_surface_values.size(); ++i) {
      double f = terms.off_surface_values[i];
      double psi = std::exp(-c_off_surface * std::abs(f));
      loss += psi * inv_n;
      if (adjoints)
        adjoints->off_surface_value[i] = -c_off_surface * sign_of(f) * psi * inv_n;
    }
  }
  return loss;
}

}  // namespace tvc
