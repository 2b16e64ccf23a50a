#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support/synthetic.hpp"
#include "tvc/errors.hpp"
#include "tvc/rbf.hpp"

using namespace tvc;
using namespace tvc::testsupport;

TEST_CASE("knn basic ordering") {
  KdTree tree({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}});
  std::vector<int> nn = tree.knn({0.1, 0, 0}, 2);
  CHECK(nn == std::vector<int>{0, 1});
}

TEST_CASE("knn equals brute force on random instances") {
  Rng rng(17);
  std::vector<Vec3> points(200);
  for (auto& p : points) p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  KdTree tree(points);
  for (int q = 0; q < 300; ++q) {
    Vec3 query{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
    CHECK(tree.knn(query, 8) == brute_force_knn(points, query, 8));
  }
}

TEST_CASE("knn with duplicate distances breaks ties to the lower index") {
  // Symmetric points equidistant from the origin.
  std::vector<Vec3> points = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  KdTree tree(points);
  std::vector<int> nn = tree.knn({0, 0, 0}, 2);
  CHECK(nn == std::vector<int>{0, 1});
}

TEST_CASE("knn clamps k to the point count") {
  KdTree tree({{0, 0, 0}, {1, 0, 0}});
  CHECK(tree.knn({0, 0, 0}, 10).size() == 2);
}

TEST_CASE("build_rbf_system scalar case") {
  RbfSystem system = build_rbf_system({{0, 0, 0}}, {0.04}, 1e-2);
  CHECK(system.coefficients[0] == doctest::Approx(0.04 / std::sqrt(1e-2)).epsilon(1e-14));
}

TEST_CASE("build_rbf_system K=2 matches the Cramer-rule oracle") {
  std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}};
  std::vector<double> delta = {0.1, -0.1};
  const double eps0 = 1.0;
  RbfSystem system = build_rbf_system(pts, delta, eps0);

  // Independent 2x2 solve: phi = [[a, b], [b, a]] with a = sqrt(eps0),
  // b = sqrt(eps0 + 1).
  double a = std::sqrt(eps0), b = std::sqrt(eps0 + 1.0);
  double det = a * a - b * b;
  double c0 = (delta[0] * a - b * delta[1]) / det;
  double c1 = (a * delta[1] - delta[0] * b) / det;
  CHECK(std::abs(system.coefficients[0] - c0) < 1e-10);
  CHECK(std::abs(system.coefficients[1] - c1) < 1e-10);
}

TEST_CASE("build_rbf_system rejects duplicate neighbors") {
  std::vector<Vec3> pts = {{0.3, 0.2, 0.1}, {0.3, 0.2, 0.1}, {1, 0, 0}};
  CHECK_THROWS_AS(build_rbf_system(pts, {0.1, 0.1, -0.2}, 1e-2), NumericError);
}

TEST_CASE("rbf collocation reproduces neighbor values") {
  Rng rng(5);
  std::vector<Vec3> pts(8);
  std::vector<double> delta(8);
  for (int i = 0; i < 8; ++i) {
    pts[i] = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    delta[i] = rng.uniform(-0.1, 0.1);
  }
  RbfSystem system = build_rbf_system(pts, delta, 1e-2);
  for (int i = 0; i < 8; ++i)
    CHECK(std::abs(rbf_interpolate(system, pts[i]).value - delta[i]) < 1e-8);
}

TEST_CASE("rbf kernel matrix symmetry and diagonal") {
  // Symmetry shows up as order-independence of a two-point system.
  const double eps0 = 2.5e-2;
  RbfSystem ab = build_rbf_system({{0, 0, 0}, {0.2, 0.1, 0}}, {0.05, -0.02}, eps0);
  RbfSystem ba = build_rbf_system({{0.2, 0.1, 0}, {0, 0, 0}}, {-0.02, 0.05}, eps0);
  CHECK(ab.coefficients[0] == doctest::Approx(ba.coefficients[1]).epsilon(1e-14));
  CHECK(ab.coefficients[1] == doctest::Approx(ba.coefficients[0]).epsilon(1e-14));
  CHECK(rbf_interpolate(ab, {0, 0, 0}).value ==
        doctest::Approx(rbf_interpolate(ba, {0, 0, 0}).value).epsilon(1e-14));
}

TEST_CASE("rbf gradient matches central finite differences") {
  Rng rng(23);
  std::vector<Vec3> pts(8);
  std::vector<double> delta(8);
  for (int i = 0; i < 8; ++i) {
    pts[i] = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    delta[i] = rng.uniform(-0.1, 0.1);
  }
  RbfSystem system = build_rbf_system(pts, delta, 1e-2);
  const double h = 1e-5;
  for (int q = 0; q < 100; ++q) {
    Vec3 query{rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)};
    RbfValue value = rbf_interpolate(system, query);
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 qp = query, qm = query;
      qp[axis] += h;
      qm[axis] -= h;
      double fd =
          (rbf_interpolate(system, qp).value - rbf_interpolate(system, qm).value) / (2.0 * h);
      double analytic = value.gradient[axis];
      double denom = std::max(std::abs(fd), std::abs(analytic));
      if (denom > 1e-8) CHECK(std::abs(fd - analytic) / denom < 1e-6);
    }
  }
}

TEST_CASE("rbf K=1 closed form") {
  const double eps0 = 1e-2;
  const double sigma1 = 0.07;
  RbfSystem system = build_rbf_system({{0.1, 0.2, 0.3}}, {sigma1}, eps0);
  const double d = 0.25;
  Vec3 query = Vec3{0.1, 0.2, 0.3} + Vec3{d, 0, 0};
  double expected = sigma1 * std::sqrt(eps0 + d * d) / std::sqrt(eps0);
  CHECK(rbf_interpolate(system, query).value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("estimator accuracy improves under refinement on a sphere band") {
  // Median |estimate - truth| over fixed queries is non-increasing in the
  // sample count.
  Rng qrng(31);
  std::vector<Vec3> queries(64);
  for (auto& q : queries) q = (0.5 + qrng.uniform(-0.05, 0.05)) * normalized(qrng.normal_vec3());

  std::vector<double> medians;
  for (int n : {100, 400, 1600}) {
    Rng rng(77);
    std::vector<Vec3> pts(n);
    std::vector<double> sdf(n);
    for (int i = 0; i < n; ++i) {
      double r = 0.5 + rng.uniform(-0.08, 0.08);
      pts[i] = r * normalized(rng.normal_vec3());
      sdf[i] = r - 0.5;
    }
    RbfEstimator estimator(pts, sdf, RbfConfig{});
    std::vector<double> errors;
    for (const auto& q : queries)
      errors.push_back(std::abs(estimator.estimate(q).value - (norm(q) - 0.5)));
    std::sort(errors.begin(), errors.end());
    medians.push_back(errors[errors.size() / 2]);
  }
  CHECK(medians[1] <= medians[0] + 1e-12);
  CHECK(medians[2] <= medians[1] + 1e-12);
}

TEST_CASE("estimator matches a fresh per-query system (cache transparency)") {
  Rng rng(41);
  std::vector<Vec3> pts(64);
  std::vector<double> sdf(64);
  for (int i = 0; i < 64; ++i) {
    pts[i] = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    sdf[i] = rng.uniform(-0.1, 0.1);
  }
  RbfConfig config;
  RbfEstimator estimator(pts, sdf, config);
  for (int q = 0; q < 50; ++q) {
    Vec3 query{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    RbfValue cached = estimator.estimate(query);
    std::vector<int> nn = brute_force_knn(pts, query, config.k);
    std::vector<Vec3> npts;
    std::vector<double> nsdf;
    for (int idx : nn) {
      npts.push_back(pts[idx]);
      nsdf.push_back(sdf[idx]);
    }
    RbfValue fresh = rbf_interpolate(build_rbf_system(npts, nsdf, config.epsilon0), query);
    CHECK(cached.value == doctest::Approx(fresh.value).epsilon(1e-14));
    CHECK(dist(cached.gradient, fresh.gradient) < 1e-12);
  }
}
