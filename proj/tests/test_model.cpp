#include <doctest.h>

#include <cmath>

#include "biaspot/io.hpp"
#include "biaspot/measures.hpp"
#include "biaspot/model.hpp"
#include "biaspot/rng.hpp"
#include "test_support.hpp"

using namespace biaspot;

TEST_SUITE_BEGIN("model");

TEST_CASE("sampled features sit on the l1 sphere and repeat under the same seed") {
  FeatureSet fs = sample_features(1, 10, 7);
  for (std::size_t j = 0; j < fs.m; ++j) {
    auto row = fs.row(j);
    double l1 = 0.0;
    for (double w : row) l1 += std::abs(w);
    CHECK(l1 == doctest::Approx(1.0).epsilon(1e-12));
  }
  FeatureSet again = sample_features(1, 10, 7);
  CHECK(fs.weights == again.weights);
  FeatureSet other = sample_features(1, 10, 8);
  CHECK(fs.weights != other.weights);
}

TEST_CASE("feature sampler matches the symmetry of the uniform l1-sphere law") {
  // Monte-Carlo check: each coordinate of w has mean 0 by sign symmetry.
  const int d = 3;
  const std::size_t m = 100000;
  FeatureSet fs = sample_features(d, m, 1);
  for (int k = 0; k <= d; ++k) {
    std::vector<double> coord(m);
    for (std::size_t j = 0; j < m; ++j) coord[j] = fs.weights[j * (d + 1) + k];
    double se = testsupport::stderr_of_mean(coord);
    CHECK(std::abs(testsupport::mean(coord)) < 3.0 * se);
  }
  for (std::size_t j = 0; j < m; ++j) {
    double l1 = 0.0;
    for (double w : fs.row(j)) l1 += std::abs(w);
    CHECK(std::abs(l1 - 1.0) < 1e-12);
  }
}

TEST_CASE("sample_features rejects empty shapes") {
  CHECK_THROWS_AS(sample_features(0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_features(1, 0, 1), std::invalid_argument);
}

TEST_CASE("potential evaluation: zero coefficients, hand value, sup bound") {
  FeatureSet fs = sample_features(2, 32, 3);
  Potential zero = zero_potential(fs);
  double x0[] = {0.3, -0.7};
  CHECK(eval_potential(zero, x0) == 0.0);

  // single feature w = 0.5, b = 0.5, a = 2 at x = 1
  Potential single;
  single.features.d = 1;
  single.features.m = 1;
  single.features.weights = {0.5, 0.5};
  single.coeffs = {2.0};
  double x1[] = {1.0};
  CHECK(eval_potential(single, x1) == doctest::Approx(2.0));

  Rng rng(11);
  Potential pot;
  pot.features = sample_features(2, 64, 5);
  pot.coeffs.resize(64);
  double max_abs = 0.0;
  for (double& a : pot.coeffs) {
    a = rng.uniform(-30.0, 30.0);
    max_abs = std::max(max_abs, std::abs(a));
  }
  for (int trial = 0; trial < 50; ++trial) {
    double x[] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    CHECK(std::abs(eval_potential(pot, x)) <= max_abs + 1e-12);
  }

  double bad[] = {0.0};
  CHECK_THROWS_AS(eval_potential(pot, bad), std::invalid_argument);
}

TEST_CASE("relu positive homogeneity in the coefficients") {
  Rng rng(21);
  Potential pot;
  pot.features = sample_features(1, 40, 9);
  pot.coeffs.resize(40);
  for (double& a : pot.coeffs) a = rng.uniform(-5.0, 5.0);
  Potential scaled = pot;
  const double lambda = 3.25;
  for (double& a : scaled.coeffs) a *= lambda;
  for (int trial = 0; trial < 20; ++trial) {
    double x[] = {rng.uniform(-1.0, 1.0)};
    double v = eval_potential(pot, x);
    CHECK(eval_potential(scaled, x) == doctest::Approx(lambda * v).epsilon(1e-14));
  }
}

TEST_CASE("rkhs norm values") {
  FeatureSet fs = sample_features(1, 2, 4);
  Potential pot{fs, {0.0, 0.0}};
  CHECK(rkhs_norm(pot) == 0.0);
  pot.coeffs = {3.0, 4.0};
  CHECK(rkhs_norm(pot) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));

  FeatureSet fs50 = sample_features(3, 500, 4);
  CHECK(rkhs_norm(constant_coeff_potential(fs50, 50.0)) == doctest::Approx(50.0));
}

TEST_CASE("empirical kernel is symmetric with a psd Gram matrix") {
  FeatureSet fs = sample_features(2, 80, 17);
  Rng rng(33);
  const std::size_t n = 20;
  std::vector<double> pts(n * 2);
  for (double& c : pts) c = rng.uniform(-1.0, 1.0);

  std::vector<double> gram(n * n);
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::span<const double> xi(pts.data() + 2 * i, 2);
      std::span<const double> xj(pts.data() + 2 * j, 2);
      gram[i * n + j] = empirical_kernel(fs, xi, xj);
    }
    std::span<const double> xi(pts.data() + 2 * i, 2);
    CHECK(gram[i * n + i] >= 0.0);
    trace += gram[i * n + i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(gram[i * n + j] == doctest::Approx(gram[j * n + i]).epsilon(1e-14));
    }
  }
  auto eig = testsupport::symmetric_eigenvalues(gram, n);
  CHECK(eig.front() >= -1e-10 * trace);
}

TEST_CASE("feature determinism carries through serialization") {
  Potential a{sample_features(2, 25, 99), std::vector<double>(25, 1.5)};
  Potential b{sample_features(2, 25, 99), std::vector<double>(25, 1.5)};
  CHECK(io::potential_to_json(a) == io::potential_to_json(b));

  Potential back = io::potential_from_json(io::potential_to_json(a));
  CHECK(back.features.weights == a.features.weights);
  CHECK(back.coeffs == a.coeffs);
  CHECK(back.features.seed == a.features.seed);
  CHECK(back.features.activation == a.features.activation);
}

TEST_CASE("constant potential shift leaves the density unchanged") {
  Grid grid = make_grid(1, 128);
  FeatureSet fs = sample_features(1, 30, 2);
  Rng rng(5);
  Potential pot{fs, {}};
  pot.coeffs.resize(30);
  for (double& a : pot.coeffs) a = rng.uniform(-3.0, 3.0);

  GridDensity q = density_from_potential(pot, grid);
  std::vector<double> v = values_on_grid(pot, grid);
  for (double& vi : v) vi += 17.3;
  GridDensity q_shift = density_from_values(grid, v);
  for (std::size_t i = 0; i < q.mass.size(); ++i) {
    CHECK(q_shift.mass[i] == doctest::Approx(q.mass[i]).epsilon(1e-12));
  }
}

TEST_CASE("smoothed relu approaches relu and has a bounded derivative") {
  for (double z : {-0.8, -0.1, 0.0, 0.05, 0.9}) {
    CHECK(std::abs(activate(Activation::smoothed_relu, 50.0, z) -
                   activate(Activation::relu, 0.0, z)) < 0.02);
    double dv = activate_deriv(Activation::smoothed_relu, 50.0, z);
    CHECK(dv >= 0.0);
    CHECK(dv <= 1.0);
  }
  CHECK(activate_deriv(Activation::relu, 0.0, 0.0) == 0.0);
}

TEST_SUITE_END();
