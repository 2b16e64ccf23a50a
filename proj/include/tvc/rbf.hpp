#ifndef TVC_RBF_HPP
#define TVC_RBF_HPP

#include <memory>
#include <unordered_map>
#include <vector>

#include "tvc/kdtree.hpp"
#include "tvc/vec3.hpp"

namespace tvc {

struct RbfConfig {
  int k = 8;               // neighborhood size
  double epsilon0 = 1e-2;  // multiquadric shift, keeps the kernel matrix regular
};

// Shifted-multiquadric interpolation system over one neighborhood:
// kernel(p, q) = sqrt(epsilon0 + |p - q|^2), coefficients solve Phi c = sdf.
struct RbfSystem {
  std::vector<Vec3> points;
  std::vector<double> sdf;
  double epsilon0 = 0.0;
  std::vector<double> coefficients;
};

struct RbfValue {
  double value = 0.0;
  Vec3 gradient{0, 0, 0};
};

// Assembles the kernel matrix and solves it with a partially pivoted LU.
// Throws NumericError naming the closest pair when the system is singular or
// the solve residual exceeds 1e-8 * |sdf|.
RbfSystem build_rbf_system(const std::vector<Vec3>& points, const std::vector<double>& sdf,
                           double epsilon0);

// Interpolated value and exact analytic gradient at the query point.
RbfValue rbf_interpolate(const RbfSystem& system, const Vec3& query);

// Signed-distance estimator over a fixed sample pool: kNN neighborhood per
// query, per-neighborhood systems cached since nearby queries share them.
class RbfEstimator {
 public:
  RbfEstimator(std::vector<Vec3> points, std::vector<double> sdf, RbfConfig config);

  RbfValue estimate(const Vec3& query) const;

  const KdTree& index() const { return tree_; }
  const RbfConfig& config() const { return config_; }

 private:
  KdTree tree_;
  std::vector<double> sdf_;
  RbfConfig config_;
  mutable std::unordered_map<std::uint64_t, std::shared_ptr<RbfSystem>> cache_;
};

}  // namespace tvc

#endif
