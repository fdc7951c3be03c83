#include <doctest.h>

#include <cmath>
#include <functional>

#include "biaspot/objectives.hpp"
#include "biaspot/rng.hpp"
#include "biaspot/sampling.hpp"
#include "test_support.hpp"

using namespace biaspot;

namespace {

Potential random_potential(int d, std::size_t m, std::uint64_t seed, double scale) {
  Potential pot;
  pot.features = sample_features(d, m, seed);
  pot.coeffs.resize(m);
  Rng rng(seed * 13 + 5);
  for (double& a : pot.coeffs) a = rng.uniform(-scale, scale);
  return pot;
}

// potential whose value is identically c: single always-on bias feature
Potential constant_potential(double c) {
  Potential pot;
  pot.features.d = 1;
  pot.features.m = 1;
  pot.features.weights = {0.0, 1.0};
  pot.coeffs = {c};
  return pot;
}

Target random_population(int d, const Grid& grid, std::uint64_t seed) {
  return Target::population(density_from_potential(random_potential(d, 15, seed, 2.0), grid));
}

Target random_empirical(int d, const Grid& grid, std::uint64_t seed, std::size_t n = 40) {
  GridDensity q = density_from_potential(random_potential(d, 15, seed, 2.0), grid);
  return Target::empirical(sample_grid_oracle(q, n, seed + 1));
}

double fd_partial(const std::function<double(const std::vector<double>&)>& f,
                  std::vector<double> a, std::size_t j, double h) {
  a[j] += h;
  double up = f(a);
  a[j] -= 2.0 * h;
  double down = f(a);
  return (up - down) / (2.0 * h);
}

// worst |fd - analytic| over all coordinates, relative to the gradient scale
double fd_vector_error(const std::function<double(const std::vector<double>&)>& f,
                       const std::vector<double>& at, std::span<const double> analytic,
                       double h) {
  double scale = 0.0;
  for (double g : analytic) scale = std::max(scale, std::abs(g));
  double worst = 0.0;
  for (std::size_t j = 0; j < at.size(); ++j) {
    worst = std::max(worst, std::abs(fd_partial(f, at, j, h) - analytic[j]));
  }
  return worst / std::max(scale, 1e-12);
}

}  // namespace

TEST_SUITE_BEGIN("objectives");

TEST_CASE("backward loss: zero and constant potentials score zero") {
  Grid grid = make_grid(1, 64);
  Target pop = random_population(1, grid, 3);
  Target emp = random_empirical(1, grid, 4);
  Potential zero = zero_potential(sample_features(1, 10, 7));
  CHECK(loss_backward(zero, pop, grid) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(loss_backward(zero, emp, grid) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(loss_backward(constant_potential(3.7), pop, grid) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(loss_backward(constant_potential(-1.2), emp, grid) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("backward loss excess equals the kl divergence to the target") {
  Grid grid = make_grid(1, 256);
  Potential star = random_potential(1, 20, 11, 3.0);
  Target pop = Target::population(density_from_potential(star, grid));
  for (int trial = 0; trial < 5; ++trial) {
    Potential pot = star;
    Rng rng(500 + trial);
    for (double& a : pot.coeffs) a += rng.uniform(-2.0, 2.0);
    double excess = loss_backward(pot, pop, grid) - loss_backward(star, pop, grid);
    double kl = kl_divergence(pop.density, density_from_potential(pot, grid));
    CHECK(excess == doctest::Approx(kl).epsilon(1e-8));
  }
}

TEST_CASE("backward gradient vanishes at the target and ignores constant shifts") {
  Grid grid = make_grid(1, 128);
  Potential pot = random_potential(1, 18, 21, 2.0);
  Target self = Target::population(density_from_potential(pot, grid));
  GradientVector g = grad_backward(pot, self, grid);
  for (double gj : g.g) CHECK(std::abs(gj) < 1e-12);

  // appending a bias feature shifts V by a constant and leaves g unchanged
  Target pop = random_population(1, grid, 23);
  GradientVector g1 = grad_backward(pot, pop, grid);
  Potential shifted = pot;
  double scale = static_cast<double>(pot.features.m + 1) / pot.features.m;
  shifted.features.m += 1;
  shifted.features.weights.insert(shifted.features.weights.end(), {0.0, 1.0});
  for (double& a : shifted.coeffs) a *= scale;
  shifted.coeffs.push_back(5.0 * static_cast<double>(shifted.features.m));
  GradientVector g2 = grad_backward(shifted, pop, grid);
  for (std::size_t j = 0; j < g1.g.size(); ++j) {
    CHECK(g2.g[j] == doctest::Approx(g1.g[j]).epsilon(1e-10));
  }
}

TEST_CASE("backward gradient matches central differences on both target kinds") {
  Grid grid = make_grid(1, 64);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    Potential pot = random_potential(1, 12, 300 + trial, 2.0);
    Target target = (trial % 2 == 0) ? random_population(1, grid, 400 + trial)
                                     : random_empirical(1, grid, 400 + trial);
    GradientVector g = grad_backward(pot, target, grid);
    std::vector<double> analytic(g.g.size());
    for (std::size_t j = 0; j < g.g.size(); ++j) {
      analytic[j] = g.g[j] / static_cast<double>(pot.features.m);
    }
    auto loss = [&](const std::vector<double>& a) {
      Potential p = pot;
      p.coeffs = a;
      return loss_backward(p, target, grid);
    };
    CHECK(fd_vector_error(loss, pot.coeffs, analytic, h) < 1e-5);
  }
}

TEST_CASE("forward loss: zero and constant potentials score zero") {
  Grid grid = make_grid(1, 64);
  Target pop = random_population(1, grid, 31);
  Target emp = random_empirical(1, grid, 32);
  Potential zero = zero_potential(sample_features(1, 10, 7));
  CHECK(loss_forward(zero, pop, grid) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(loss_forward(zero, emp, grid) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(loss_forward(constant_potential(2.9), pop, grid) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(loss_forward(constant_potential(-4.0), emp, grid) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("forward gradient: unit weights at V = 0 and stationarity at uniform") {
  Grid grid = make_grid(1, 128);
  FeatureSet fs = sample_features(1, 16, 41);
  Potential zero = zero_potential(fs);

  Target pop = random_population(1, grid, 42);
  GradientVector g = grad_forward(zero, pop, grid);
  // P_* = target at V = 0
  std::vector<double> te = mean_embedding(pop.density, fs);
  std::vector<double> pe = mean_embedding(uniform_density(grid), fs);
  for (std::size_t j = 0; j < g.g.size(); ++j) {
    CHECK(g.g[j] == doctest::Approx(te[j] - pe[j]).epsilon(1e-12));
  }

  Target uniform = Target::population(uniform_density(grid));
  GradientVector g0 = grad_forward(zero, uniform, grid);
  for (double gj : g0.g) CHECK(std::abs(gj) < 1e-13);
}

TEST_CASE("forward gradient matches central differences") {
  Grid grid = make_grid(1, 64);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    Potential pot = random_potential(1, 12, 600 + trial, 1.5);
    Target target = (trial % 2 == 0) ? random_population(1, grid, 700 + trial)
                                     : random_empirical(1, grid, 700 + trial);
    GradientVector g = grad_forward(pot, target, grid);
    std::vector<double> analytic(g.g.size());
    for (std::size_t j = 0; j < g.g.size(); ++j) {
      analytic[j] = g.g[j] / static_cast<double>(pot.features.m);
    }
    auto loss = [&](const std::vector<double>& a) {
      Potential p = pot;
      p.coeffs = a;
      return loss_forward(p, target, grid);
    };
    CHECK(fd_vector_error(loss, pot.coeffs, analytic, h) < 1e-5);
  }
}

TEST_CASE("both objectives are convex in the coefficients") {
  Grid grid = make_grid(1, 64);
  Target pop = random_population(1, grid, 51);
  Target emp = random_empirical(1, grid, 52);
  FeatureSet fs = sample_features(1, 14, 53);
  Rng rng(54);
  for (int trial = 0; trial < 20; ++trial) {
    Potential a1{fs, {}}, a2{fs, {}};
    a1.coeffs.resize(fs.m);
    a2.coeffs.resize(fs.m);
    for (double& a : a1.coeffs) a = rng.uniform(-4.0, 4.0);
    for (double& a : a2.coeffs) a = rng.uniform(-4.0, 4.0);
    const Target& target = (trial % 2 == 0) ? pop : emp;
    for (double lambda : {0.25, 0.5, 0.75}) {
      Potential mix{fs, {}};
      mix.coeffs.resize(fs.m);
      for (std::size_t j = 0; j < fs.m; ++j) {
        mix.coeffs[j] = lambda * a1.coeffs[j] + (1.0 - lambda) * a2.coeffs[j];
      }
      CHECK(loss_backward(mix, target, grid) <=
            lambda * loss_backward(a1, target, grid) +
                (1.0 - lambda) * loss_backward(a2, target, grid) + 1e-10);
      CHECK(loss_forward(mix, target, grid) <=
            lambda * loss_forward(a1, target, grid) +
                (1.0 - lambda) * loss_forward(a2, target, grid) + 1e-10);
    }
  }
}

TEST_CASE("backward gradient norm stays under the Lipschitz constant 2") {
  Grid grid = make_grid(1, 64);
  for (int trial = 0; trial < 10; ++trial) {
    Potential pot = random_potential(1, 25, 800 + trial, 10.0);
    Target target = (trial % 2 == 0) ? random_population(1, grid, 900 + trial)
                                     : random_empirical(1, grid, 900 + trial);
    GradientVector g = grad_backward(pot, target, grid);
    CHECK(rkhs_norm(g.g) <= 2.0);
    for (double gj : g.g) CHECK(std::abs(gj) <= 2.0);
  }
}

TEST_CASE("population and empirical losses agree at large n") {
  Grid grid = make_grid(1, 512);
  Potential star = random_potential(1, 20, 61, 2.0);
  GridDensity q_star = density_from_potential(star, grid);
  Target pop = Target::population(q_star);
  SampleSet samples = sample_grid_oracle(q_star, 100000, 62);
  Target emp = Target::empirical(samples);

  Potential pot = random_potential(1, 20, 63, 2.0);
  double l_pop = loss_backward(pot, pop, grid);
  double l_emp = loss_backward(pot, emp, grid);

  std::vector<double> v(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) v[k] = eval_potential(pot, samples.point(k));
  double se = testsupport::stderr_of_mean(v);
  CHECK(std::abs(l_pop - l_emp) <= 5.0 * se);
}

TEST_CASE("forward reweighting flags a degenerate effective sample size") {
  Grid grid = make_grid(1, 64);
  GridDensity uniform = uniform_density(grid);
  SampleSet samples = sample_grid_oracle(uniform, 20, 71);
  Target emp = Target::empirical(samples);

  // steep monotone V concentrates e^V on the rightmost sample
  Potential spiky;
  spiky.features.d = 1;
  spiky.features.m = 1;
  spiky.features.weights = {1.0, 0.0};
  spiky.coeffs = {2000.0};
  GradientVector g = grad_forward(spiky, emp, grid);
  CHECK(g.degenerate_weights);

  Potential flat = zero_potential(sample_features(1, 30, 72));
  CHECK_FALSE(grad_forward(flat, emp, grid).degenerate_weights);
}

TEST_CASE("two-layer gradient matches central differences on every coordinate block") {
  Grid grid = make_grid(1, 48);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    TwoLayerNet net = init_two_layer(1, 8, 1000 + trial, 16.0);
    Rng rng(1100 + trial);
    for (double& p : net.particles) p += rng.uniform(-0.5, 0.5);
    Target target = (trial % 2 == 0)
                        ? random_population(1, grid, 1200 + trial)
                        : random_empirical(1, grid, 1200 + trial, 12);
    std::vector<double> g = two_layer_gradient(net, target, grid);
    std::vector<double> analytic(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      analytic[i] = g[i] / static_cast<double>(net.m);
    }
    auto loss = [&](const std::vector<double>& p) {
      TwoLayerNet n = net;
      n.particles = p;
      return loss_backward(n, target, grid);
    };
    CHECK(fd_vector_error(loss, net.particles, analytic, h) < 1e-4);
  }
}

TEST_SUITE_END();
