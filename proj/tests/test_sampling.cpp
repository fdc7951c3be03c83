#include <doctest.h>

#include <cmath>

#include "biaspot/measures.hpp"
#include "biaspot/rng.hpp"
#include "biaspot/sampling.hpp"
#include "test_support.hpp"

using namespace biaspot;

namespace {

Potential confined_potential(std::size_t m, std::uint64_t seed, double value) {
  return constant_coeff_potential(sample_features(1, m, seed), value);
}

// equal-probability bin edges from the grid density (quantile binning keeps
// every expected count at n / bins, which the chi-square reference law needs)
std::vector<double> quantile_edges(const GridDensity& q, std::size_t bins) {
  const Grid& g = q.grid;
  double width = 2.0 / g.points_per_dim;
  std::vector<double> edges{-1.0};
  double acc = 0.0;
  std::size_t next = 1;
  for (std::size_t i = 0; i < q.mass.size() && next < bins; ++i) {
    double lo = -1.0 + width * static_cast<double>(i);
    while (next < bins && acc + q.mass[i] >= static_cast<double>(next) / bins) {
      double frac = (static_cast<double>(next) / bins - acc) / q.mass[i];
      edges.push_back(lo + frac * width);
      ++next;
    }
    acc += q.mass[i];
  }
  edges.push_back(1.0);
  return edges;
}

double chi_square_statistic(const SampleSet& s, const std::vector<double>& edges) {
  std::size_t bins = edges.size() - 1;
  std::vector<double> counts(bins, 0.0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    double x = s.point(k)[0];
    std::size_t b = std::upper_bound(edges.begin(), edges.end(), x) - edges.begin();
    b = std::min(std::max<std::size_t>(b, 1), bins) - 1;
    counts[b] += 1.0;
  }
  double expected = static_cast<double>(s.size()) / bins;
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  return stat;
}

// worst per-axis marginal histogram distance, 32 bins per axis
double histogram_tv(const SampleSet& a, const SampleSet& b, int bins_per_axis) {
  double worst = 0.0;
  for (int axis = 0; axis < a.d; ++axis) {
    std::vector<double> ha(bins_per_axis, 0.0), hb(bins_per_axis, 0.0);
    auto bin_of = [&](double x) {
      int bin = static_cast<int>((x + 1.0) / 2.0 * bins_per_axis);
      return std::min(std::max(bin, 0), bins_per_axis - 1);
    };
    for (std::size_t k = 0; k < a.size(); ++k) ha[bin_of(a.point(k)[axis])] += 1.0 / a.size();
    for (std::size_t k = 0; k < b.size(); ++k) hb[bin_of(b.point(k)[axis])] += 1.0 / b.size();
    double tv = 0.0;
    for (int i = 0; i < bins_per_axis; ++i) tv += std::abs(ha[i] - hb[i]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

}  // namespace

TEST_SUITE_BEGIN("sampling");

TEST_CASE("potential gradient matches finite differences away from kinks") {
  Potential pot;
  pot.features = sample_features(2, 30, 5);
  pot.coeffs.resize(30);
  Rng rng(6);
  for (double& a : pot.coeffs) a = rng.uniform(-5.0, 5.0);
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x{rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9)};
    std::vector<double> g = grad_potential(pot, x);
    for (int k = 0; k < 2; ++k) {
      std::vector<double> up = x, down = x;
      up[k] += h;
      down[k] -= h;
      double fd = (eval_potential(pot, up) - eval_potential(pot, down)) / (2.0 * h);
      CHECK(g[k] == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("langevin with a flat potential recovers uniform moments") {
  Potential flat = zero_potential(sample_features(1, 4, 7));
  // small eta keeps the clamp's boundary bias well under the tolerance;
  // spacing of 0.8 time units decorrelates kept states
  LangevinConfig cfg;
  cfg.eta = 5e-5;
  cfg.burn_in = 2000;
  cfg.thinning = 16000;
  cfg.chains = 8;
  cfg.seed = 11;
  const std::size_t n = 10000;
  SampleSet s = sample_langevin(flat, n, cfg);
  REQUIRE(s.size() == n);

  std::vector<double> xs(n), sq(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = s.point(k)[0];
    sq[k] = xs[k] * xs[k];
    CHECK(std::abs(xs[k]) <= 1.0);
  }
  CHECK(std::abs(testsupport::mean(xs)) <= 4.0 * testsupport::stderr_of_mean(xs));
  CHECK(std::abs(testsupport::mean(sq) - 1.0 / 3.0) <= 4.0 * testsupport::stderr_of_mean(sq));
}

TEST_CASE("langevin outputs stay inside the box under a steep potential") {
  Potential pot = confined_potential(50, 13, 50.0);
  LangevinConfig cfg;
  cfg.seed = 17;
  cfg.burn_in = 100;
  cfg.thinning = 1;
  SampleSet s = sample_langevin(pot, 2000, cfg);
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(s.point(k)[0] >= -1.0);
    CHECK(s.point(k)[0] <= 1.0);
  }
}

TEST_CASE("langevin histogram passes a chi-square test against the grid density") {
  Potential pot = confined_potential(100, 19, 50.0);
  Grid grid = make_grid(1, 1024);
  GridDensity q = density_from_potential(pot, grid);

  LangevinConfig cfg;
  cfg.eta = 1e-3;
  cfg.burn_in = 4000;
  cfg.thinning = 200;
  cfg.chains = 8;
  cfg.seed = 23;
  SampleSet s = sample_langevin(pot, 10000, cfg);

  std::vector<double> edges = quantile_edges(q, 64);
  REQUIRE(edges.size() == 65);
  double stat = chi_square_statistic(s, edges);
  CHECK(stat < testsupport::kChiSq63Pct99);
}

TEST_CASE("langevin and oracle sampling agree in total variation") {
  for (int d : {1, 2}) {
    Potential pot = constant_coeff_potential(sample_features(d, 100, 29 + d), 50.0);
    Grid grid = make_grid(d, d == 1 ? 1024 : 128);
    GridDensity q = density_from_potential(pot, grid);
    SampleSet oracle = sample_grid_oracle(q, 10000, 31);

    LangevinConfig cfg;
    cfg.eta = 1e-3;
    cfg.burn_in = 4000;
    cfg.thinning = 100;
    cfg.chains = 8;
    cfg.seed = 37;
    SampleSet langevin = sample_langevin(pot, 10000, cfg);

    CHECK(histogram_tv(oracle, langevin, 32) <= 0.08);
  }
}

TEST_CASE("langevin is deterministic with a prefix property across n") {
  Potential pot = confined_potential(20, 41, 10.0);
  LangevinConfig cfg;
  cfg.seed = 43;
  cfg.burn_in = 50;
  cfg.thinning = 5;
  cfg.chains = 4;
  SampleSet a = sample_langevin(pot, 40, cfg);
  SampleSet b = sample_langevin(pot, 40, cfg);
  CHECK(a.points == b.points);

  // chain streams depend only on (seed, chain), so shorter runs are prefixes
  SampleSet c = sample_langevin(pot, 20, cfg);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    CHECK(c.points[i] == a.points[i]);
  }

  cfg.seed = 44;
  SampleSet d = sample_langevin(pot, 40, cfg);
  CHECK(a.points != d.points);

  // scheduling must not matter
  SampleSet e = sample_langevin(pot, 40, cfg, 4);
  cfg.seed = 44;
  SampleSet f = sample_langevin(pot, 40, cfg, 1);
  CHECK(e.points == f.points);
}

TEST_CASE("grid oracle: point mass stays in its cell, uniform is centered") {
  Grid grid = make_grid(1, 64);
  GridDensity point{grid, std::vector<double>(64, 0.0)};
  point.mass[10] = 1.0;
  SampleSet s = sample_grid_oracle(point, 500, 47);
  double lo = -1.0 + 2.0 * 10 / 64.0;
  double hi = lo + 2.0 / 64.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(s.point(k)[0] >= lo);
    CHECK(s.point(k)[0] <= hi);
  }

  SampleSet u = sample_grid_oracle(uniform_density(grid), 10000, 53);
  std::vector<double> xs(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) xs[k] = u.point(k)[0];
  CHECK(std::abs(testsupport::mean(xs)) <= 4.0 * testsupport::stderr_of_mean(xs));

  CHECK_THROWS_AS(sample_grid_oracle(point, 0, 1), std::invalid_argument);
}

TEST_CASE("grid oracle passes the Kolmogorov-Smirnov band in 18 of 20 seeds") {
  Grid grid = make_grid(1, 256);
  Potential pot = confined_potential(40, 59, 20.0);
  GridDensity q = density_from_potential(pot, grid);

  // cdf at cell edges
  std::vector<double> edges(q.mass.size() + 1), cdf(q.mass.size() + 1, 0.0);
  for (std::size_t i = 0; i <= q.mass.size(); ++i) {
    edges[i] = -1.0 + 2.0 * static_cast<double>(i) / q.mass.size();
  }
  for (std::size_t i = 0; i < q.mass.size(); ++i) cdf[i + 1] = cdf[i] + q.mass[i];

  const std::size_t n = 10000;
  int pass = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SampleSet s = sample_grid_oracle(q, n, 100 + seed);
    std::vector<double> xs(n);
    for (std::size_t k = 0; k < n; ++k) xs[k] = s.point(k)[0];
    double ks = testsupport::ks_distance(xs, edges, cdf);
    if (ks <= 1.63 / std::sqrt(static_cast<double>(n))) ++pass;
  }
  CHECK(pass >= 18);
}

TEST_SUITE_END();
