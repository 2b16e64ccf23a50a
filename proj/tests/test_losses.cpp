#include <doctest.h>

#include <cmath>

#include "support/synthetic.hpp"
#include "tvc/energy.hpp"
#include "tvc/errors.hpp"
#include "tvc/gradcheck.hpp"
#include "tvc/losses.hpp"

using namespace tvc;
using namespace tvc::testsupport;

namespace {

Matrix matrix3(std::initializer_list<double> values) {
  Matrix m(3, 3);
  std::copy(values.begin(), values.end(), m.a.begin());
  return m;
}

RbfEstimator sphere_field(int n, std::uint64_t seed, double radius = 0.5) {
  Rng rng(seed);
  std::vector<Vec3> pts(n);
  std::vector<double> sdf(n);
  for (int i = 0; i < n; ++i) {
    double r = radius + rng.uniform(-0.08, 0.08);
    pts[i] = r * normalized(rng.normal_vec3());
    sdf[i] = r - radius;
  }
  return RbfEstimator(std::move(pts), std::move(sdf), RbfConfig{});
}

}  // namespace

TEST_CASE("surface loss annihilator and single-pair value") {
  std::vector<Vec3> pts = {{0.1, 0.2, 0.3}, {-0.4, 0.5, 0.0}};
  CHECK(surface_loss(pts, pts) == 0.0);

  std::vector<Vec3> deformed = {{0.3, 0.0, 0.0}};
  std::vector<Vec3> target = {{0.0, 0.0, 0.0}};
  CHECK(surface_loss(deformed, target) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("surface loss adjoint matches finite differences") {
  Rng rng(2);
  std::vector<Vec3> deformed(5), target(5);
  for (int i = 0; i < 5; ++i) {
    deformed[i] = rng.normal_vec3();
    target[i] = rng.normal_vec3();
  }
  std::vector<Vec3> adjoints;
  surface_loss(deformed, target, &adjoints);
  const double h = 1e-6;
  for (int i = 0; i < 5; ++i)
    for (int axis = 0; axis < 3; ++axis) {
      auto plus = deformed, minus = deformed;
      plus[i][axis] += h;
      minus[i][axis] -= h;
      double fd = (surface_loss(plus, target) - surface_loss(minus, target)) / (2 * h);
      CHECK(std::abs(fd - adjoints[i][axis]) /
                std::max({std::abs(fd), std::abs(adjoints[i][axis]), 1e-12}) <
            1e-6);
    }
}

TEST_CASE("clamp definition") {
  CHECK(clamp_sym(0.25, 0.1) == doctest::Approx(0.1));
  CHECK(clamp_sym(-0.25, 0.1) == doctest::Approx(-0.1));
  CHECK(clamp_sym(0.05, 0.1) == doctest::Approx(0.05));
}

TEST_CASE("sdr loss vanishes at collocation points") {
  RbfEstimator field = sphere_field(128, 4);
  // Query exactly at sample points: interpolation reproduces their sdf.
  std::vector<Vec3> deformed(field.index().points().begin(),
                             field.index().points().begin() + 16);
  std::vector<double> template_sdf;
  for (int i = 0; i < 16; ++i) template_sdf.push_back(norm(deformed[i]) - 0.5);
  double loss = sdr_loss(template_sdf, deformed, field, 0.1);
  CHECK(loss < 1e-6);
}

TEST_CASE("sdr loss saturated clamp contributes zero with zero adjoint") {
  // All sample sdf values beyond +eta on both sides.
  std::vector<Vec3> pts;
  std::vector<double> sdf;
  Rng rng(6);
  for (int i = 0; i < 32; ++i) {
    pts.push_back(rng.normal_vec3());
    sdf.push_back(0.5 + rng.uniform(0.0, 0.1));  // far outside eta = 0.1
  }
  RbfEstimator field(pts, sdf, RbfConfig{});
  std::vector<Vec3> deformed = {pts[0], pts[5]};
  std::vector<double> template_sdf = {0.4, 0.6};  // also beyond eta
  std::vector<Vec3> adjoints;
  double loss = sdr_loss(template_sdf, deformed, field, 0.1, &adjoints);
  CHECK(loss == doctest::Approx(0.0));
  for (const auto& a : adjoints) CHECK(norm(a) == 0.0);
}

TEST_CASE("smoothness loss values and adjoints") {
  std::vector<Matrix> zero = {matrix3({0, 0, 0, 0, 0, 0, 0, 0, 0})};
  CHECK(smoothness_loss(zero) == 0.0);

  std::vector<Matrix> identity = {matrix3({1, 0, 0, 0, 1, 0, 0, 0, 1})};
  CHECK(smoothness_loss(identity) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));

  Rng rng(8);
  std::vector<Matrix> js = {matrix3({0.3, -0.1, 0.2, 0.05, -0.4, 0.1, 0.2, 0.3, -0.2})};
  std::vector<Matrix> adjoints;
  smoothness_loss(js, &adjoints);
  const double h = 1e-6;
  for (int k = 0; k < 9; ++k) {
    auto plus = js, minus = js;
    plus[0].a[k] += h;
    minus[0].a[k] -= h;
    double fd = (smoothness_loss(plus) - smoothness_loss(minus)) / (2 * h);
    CHECK(std::abs(fd - adjoints[0].a[k]) < 1e-6);
  }
}

TEST_CASE("volume loss annihilators and analytic scale case") {
  // Zero displacement: J = 0, det(I) - 1 = 0.
  std::vector<Matrix> zero = {matrix3({0, 0, 0, 0, 0, 0, 0, 0, 0})};
  CHECK(volume_loss(zero) == 0.0);

  // Uniform scale s=2: D(t) = (s-1) t, J = diag(1), det(I+J) = 8.
  std::vector<Matrix> scale = {matrix3({1, 0, 0, 0, 1, 0, 0, 0, 1})};
  CHECK(volume_loss(scale) == doctest::Approx(7.0).epsilon(1e-15));

  // Rigid rotation: I + J is a rotation matrix, det = 1.
  double c = std::cos(0.7), s = std::sin(0.7);
  std::vector<Matrix> rot = {matrix3({c - 1, -s, 0, s, c - 1, 0, 0, 0, 0})};
  CHECK(volume_loss(rot) == doctest::Approx(0.0).epsilon(1e-14));

  // Literal reading penalizes the zero field.
  CHECK(volume_loss(zero, false) == doctest::Approx(1.0));
}

TEST_CASE("sdf field loss annihilators") {
  SdfLossTerms terms;
  // Oracle f(x) = u . x with unit u: gradient norm exactly 1 and value = sdf.
  Vec3 u = normalized(Vec3{1.0, 2.0, -0.5});
  Rng rng(12);
  for (int i = 0; i < 8; ++i) {
    Vec3 x = rng.normal_vec3();
    terms.volume_values.push_back(dot(u, x));
    terms.volume_gradients.push_back(u);
    terms.volume_sdf.push_back(dot(u, x));
  }
  // Surface gradient aligned with the normal.
  terms.surface_gradients.push_back(u);
  terms.surface_normals.push_back(u);
  CHECK(sdf_field_loss(terms, 100.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("off-surface exponential penalty values") {
  SdfLossTerms terms;
  terms.off_surface_values.push_back(0.0);
  CHECK(sdf_field_loss(terms, 100.0) == doctest::Approx(1.0).epsilon(1e-15));
  terms.off_surface_values[0] = 0.1;
  CHECK(sdf_field_loss(terms, 100.0) ==
        doctest::Approx(std::exp(-10.0)).epsilon(1e-12));
}

TEST_CASE("sdr loss is invariant to permuting the sample order") {
  RbfEstimator field = sphere_field(96, 21);
  Rng rng(22);
  std::vector<Vec3> deformed(24);
  std::vector<double> template_sdf(24);
  for (int i = 0; i < 24; ++i) {
    double r = 0.5 + rng.uniform(-0.05, 0.05);
    deformed[i] = r * normalized(rng.normal_vec3());
    template_sdf[i] = rng.uniform(-0.05, 0.05);
  }
  double base = sdr_loss(template_sdf, deformed, field, 0.1);

  std::vector<int> perm(24);
  std::iota(perm.begin(), perm.end(), 0);
  Rng prng(23);
  prng.shuffle(perm);
  std::vector<Vec3> pd(24);
  std::vector<double> ps(24);
  for (int i = 0; i < 24; ++i) {
    pd[i] = deformed[perm[i]];
    ps[i] = template_sdf[perm[i]];
  }
  CHECK(std::abs(sdr_loss(ps, pd, field, 0.1) - base) < 1e-12);
}

TEST_CASE("smoothness and volume losses are rotation invariant") {
  // Conjugating a synthetic linear field by a rotation leaves both losses
  // unchanged: J' = R J R^T.
  Matrix j = matrix3({0.2, -0.1, 0.05, 0.3, 0.1, -0.2, 0.0, 0.15, -0.05});
  double c = std::cos(0.4), s = std::sin(0.4);
  Matrix r = matrix3({c, -s, 0, s, c, 0, 0, 0, 1});
  auto mul = [](const Matrix& a, const Matrix& b) {
    Matrix out(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k)
        for (int jj = 0; jj < 3; ++jj) out(i, jj) += a(i, k) * b(k, jj);
    return out;
  };
  Matrix rt(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int jj = 0; jj < 3; ++jj) rt(i, jj) = r(jj, i);
  Matrix conj = mul(mul(r, j), rt);

  CHECK(std::abs(smoothness_loss({j}) - smoothness_loss({conj})) < 1e-10);
  CHECK(std::abs(volume_loss({j}) - volume_loss({conj})) < 1e-10);
}

TEST_CASE("energy combination honors weights and masks") {
  TinyProblem p = make_tiny_problem(3);
  LossWeights weights;  // defaults: 1, 500, 50, 5, 20

  EnergyTerms all = evaluate_shape_energy(p.hyper_s, p.hyper_d, p.alpha, p.batch, p.field.get(),
                                          weights, p.loss, nullptr, nullptr, nullptr, nullptr,
                                          nullptr);
  double combined = 1.0 * all.sdf + 500.0 * all.surf + 50.0 * all.sdr + 5.0 * all.smooth +
                    20.0 * all.vol;
  CHECK(all.total == doctest::Approx(combined).epsilon(1e-12));

  LossWeights surf_only;
  surf_only.mask = AblationMask{false, true, false, false, false};
  EnergyTerms surf = evaluate_shape_energy(p.hyper_s, p.hyper_d, p.alpha, p.batch, p.field.get(),
                                           surf_only, p.loss, nullptr, nullptr, nullptr, nullptr,
                                           nullptr);
  CHECK(surf.total == doctest::Approx(500.0 * surf.surf).epsilon(1e-12));
  CHECK(surf.surf == doctest::Approx(all.surf).epsilon(1e-12));
  CHECK(surf.sdf == 0.0);
}

TEST_CASE("full-pipeline gradients on a two-shape toy problem") {
  // Two latents share the hypernets; finite differences over the summed
  // energy for every hypernet parameter and both latents.
  TinyProblem a = make_tiny_problem(101);
  TinyProblem b = make_tiny_problem(202);
  LossWeights weights;

  auto total = [&]() {
    double s = 0.0;
    s += evaluate_shape_energy(a.hyper_s, a.hyper_d, a.alpha, a.batch, a.field.get(), weights,
                               a.loss, nullptr, nullptr, nullptr, nullptr, nullptr)
             .total;
    s += evaluate_shape_energy(a.hyper_s, a.hyper_d, b.alpha, b.batch, b.field.get(), weights,
                               b.loss, nullptr, nullptr, nullptr, nullptr, nullptr)
             .total;
    return s;
  };

  HyperNetGrads gs = zero_grads(a.hyper_s);
  HyperNetGrads gd = zero_grads(a.hyper_d);
  Vector ga(a.alpha.size(), 0.0), gb(b.alpha.size(), 0.0);
  evaluate_shape_energy(a.hyper_s, a.hyper_d, a.alpha, a.batch, a.field.get(), weights, a.loss,
                        nullptr, nullptr, &gs, &gd, &ga);
  evaluate_shape_energy(a.hyper_s, a.hyper_d, b.alpha, b.batch, b.field.get(), weights, b.loss,
                        nullptr, nullptr, &gs, &gd, &gb);

  const double h = 1e-5;
  auto rel = [](double x, double y) {
    double denom = std::max(std::abs(x), std::abs(y));
    return denom < 1e-8 ? 0.0 : std::abs(x - y) / denom;
  };

  double worst = 0.0;
  Vector flat = flatten_hypernet(a.hyper_s);
  Vector gflat = flatten_hypernet_grads(gs);
  for (std::size_t i = 0; i < flat.size(); i += 7) {  // strided subset
    double keep = flat[i];
    flat[i] = keep + h;
    unflatten_hypernet(flat, a.hyper_s);
    double plus = total();
    flat[i] = keep - h;
    unflatten_hypernet(flat, a.hyper_s);
    double minus = total();
    flat[i] = keep;
    unflatten_hypernet(flat, a.hyper_s);
    worst = std::max(worst, rel(gflat[i], (plus - minus) / (2 * h)));
  }
  flat = flatten_hypernet(a.hyper_d);
  gflat = flatten_hypernet_grads(gd);
  for (std::size_t i = 0; i < flat.size(); i += 7) {
    double keep = flat[i];
    flat[i] = keep + h;
    unflatten_hypernet(flat, a.hyper_d);
    double plus = total();
    flat[i] = keep - h;
    unflatten_hypernet(flat, a.hyper_d);
    double minus = total();
    flat[i] = keep;
    unflatten_hypernet(flat, a.hyper_d);
    worst = std::max(worst, rel(gflat[i], (plus - minus) / (2 * h)));
  }
  for (std::size_t i = 0; i < a.alpha.size(); ++i) {
    double keep = a.alpha[i];
    a.alpha[i] = keep + h;
    double plus = total();
    a.alpha[i] = keep - h;
    double minus = total();
    a.alpha[i] = keep;
    worst = std::max(worst, rel(ga[i], (plus - minus) / (2 * h)));
  }
  for (std::size_t i = 0; i < b.alpha.size(); ++i) {
    double keep = b.alpha[i];
    b.alpha[i] = keep + h;
    double plus = total();
    b.alpha[i] = keep - h;
    double minus = total();
    b.alpha[i] = keep;
    worst = std::max(worst, rel(gb[i], (plus - minus) / (2 * h)));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("empty batches are rejected") {
  CHECK_THROWS_AS(surface_loss({}, {}), ValidationError);
  CHECK_THROWS_AS(smoothness_loss({}), ValidationError);
  CHECK_THROWS_AS(volume_loss({}), ValidationError);
}
