#include "tvc/rbf.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tvc/errors.hpp"
#include "tvc/linalg.hpp"

namespace tvc {
namespace {

std::string closest_pair_message(const std::vector<Vec3>& points) {
  double best = std::numeric_limits<double>::infinity();
  int bi = 0, bj = 1;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      double d = dist2(points[i], points[j]);
      if (d < best) {
        best = d;
        bi = static_cast<int>(i);
        bj = static_cast<int>(j);
      }
    }
  return "neighbors " + std::to_string(bi) + " and " + std::to_string(bj) +
         " are separated by " + std::to_string(std::sqrt(best));
}

// In-place LU solve with partial pivoting; returns false on a vanishing pivot.
bool lu_solve(Matrix& m, Vector& rhs) {
  const int n = m.rows;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(m(col, col));
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(m(r, col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < 1e-300) return false;
    if (pivot != col) {
      for (int j = 0; j < n; ++j) std::swap(m(pivot, j), m(col, j));
      std::swap(rhs[pivot], rhs[col]);
    }
    double inv = 1.0 / m(col, col);
    for (int r = col + 1; r < n; ++r) {
      double f = m(r, col) * inv;
      if (f == 0.0) continue;
      for (int j = col + 1; j < n; ++j) m(r, j) -= f * m(col, j);
      rhs[r] -= f * rhs[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int j = r + 1; j < n; ++j) s -= m(r, j) * rhs[j];
    rhs[r] = s / m(r, r);
  }
  return true;
}

double kernel(double epsilon0, double d2) { return std::sqrt(epsilon0 + d2); }

}  // namespace

RbfSystem build_rbf_system(const std::vector<Vec3>& points, const std::vector<double>& sdf,
                           double epsilon0) {
  if (points.empty() || points.size() != sdf.size())
    throw ValidationError("RBF system needs matching non-empty point and sdf lists");
  if (epsilon0 <= 0.0) throw ValidationError("RBF epsilon0 must be positive");

  const int k = static_cast<int>(points.size());
  Matrix phi(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      phi(i, j) = kernel(epsilon0, dist2(points[i], points[j]));

  Matrix lu = phi;
  Vector coeff(sdf.begin(), sdf.end());
  if (!lu_solve(lu, coeff))
    throw NumericError("RBF kernel matrix is numerically singular: " +
                       closest_pair_message(points));

  // Residual check against the original matrix.
  double rhs_norm = 0.0, res_norm = 0.0;
  for (int i = 0; i < k; ++i) {
    double ri = -sdf[i];
    for (int j = 0; j < k; ++j) ri += phi(i, j) * coeff[j];
    res_norm += ri * ri;
    rhs_norm += sdf[i] * sdf[i];
  }
  if (std::sqrt(res_norm) > 1e-8 * std::sqrt(rhs_norm) + 1e-14)
    throw NumericError("RBF solve residual too large (ill-conditioned neighborhood): " +
                       closest_pair_message(points));

  RbfSystem system;
  system.points = points;
  system.sdf = sdf;
  system.epsilon0 = epsilon0;
  system.coefficients = std::move(coeff);
  return system;
}

RbfValue rbf_interpolate(const RbfSystem& system, const Vec3& query) {
  RbfValue out;
  for (std::size_t j = 0; j < system.points.size(); ++j) {
    Vec3 d = query - system.points[j];
    double phi = kernel(system.epsilon0, norm2(d));
    double c = system.coefficients[j];
    out.value += c * phi;
    out.gradient += (c / phi) * d;
  }
  return out;
}

RbfEstimator::RbfEstimator(std::vector<Vec3> points, std::vector<double> sdf, RbfConfig config)
    : tree_(std::move(points)), sdf_(std::move(sdf)), config_(config) {
  if (tree_.points().size() != sdf_.size())
    throw ValidationError("RBF estimator needs one sdf value per point");
  if (tree_.empty()) throw ValidationError("RBF estimator over an empty sample pool");
}

RbfValue RbfEstimator::estimate(const Vec3& query) const {
  std::vector<int> nn = tree_.knn(query, config_.k);

  std::uint64_t h = 1469598103934665603ULL;
  for (int idx : nn) {
    h ^= static_cast<std::uint64_t>(idx) + 0x9e3779b97f4a7c15ULL;
    h *= 1099511628211ULL;
  }
  auto it = cache_.find(h);
  if (it == cache_.end()) {
    std::vector<Vec3> pts(nn.size());
    std::vector<double> vals(nn.size());
    for (std::size_t i = 0; i < nn.size(); ++i) {
      pts[i] = tree_.points()[nn[i]];
      vals[i] = sdf_[nn[i]];
    }
    if (cache_.size() > 200000) cache_.clear();
    it = cache_.emplace(h, std::make_shared<RbfSystem>(
                               build_rbf_system(pts, vals, config_.epsilon0)))
             .first;
  }
  return rbf_interpolate(*it->second, query);
}

}  // namespace tvc
