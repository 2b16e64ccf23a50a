#ifndef TVC_GRADCHECK_HPP
#define TVC_GRADCHECK_HPP

#include <string>
#include <vector>

#include "tvc/energy.hpp"
#include "tvc/model.hpp"

namespace tvc {

struct GradCheckOptions {
  int seeds = 3;
  double step = 1e-5;       // central-difference half step
  double tolerance = 1e-4;  // elementwise relative error bound
  std::uint64_t base_seed = 7;
};

struct GradCheckTermResult {
  std::string term;
  std::uint64_t seed = 0;
  double worst_rel_err = 0.0;
  std::string worst_param;
  int checked = 0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckTermResult> terms;
  bool pass = true;
};

// Finite-difference verification of analytic gradients w.r.t. every hypernet
// parameter and the latent code, per loss term and for the combined energy,
// on tiny nets (hidden 8, latent 4).
GradCheckReport run_gradcheck(const GradCheckOptions& options);

// Shared tiny fixture so tests can run the same checks on custom masks.
struct TinyProblem {
  HyperNet hyper_s, hyper_d;
  Vector alpha;
  ShapeBatch batch;
  std::unique_ptr<RbfEstimator> field;
  LossConfig loss;
};

TinyProblem make_tiny_problem(std::uint64_t seed, int points_per_term = 16, int hidden = 8,
                              int latent_dim = 4);

// Elementwise relative error with the small-magnitude skip rule; returns the
// worst offender.
struct FdComparison {
  double worst_rel_err = 0.0;
  std::string worst_param;
  int checked = 0;
};

FdComparison finite_difference_check(TinyProblem& problem, const LossWeights& weights,
                                     double step);

}  // namespace tvc

#endif
