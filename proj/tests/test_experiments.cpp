#include <doctest.h>

#include <cmath>

#include "biaspot/experiments.hpp"
#include "biaspot/rng.hpp"
#include "test_support.hpp"

using namespace biaspot;

TEST_SUITE_BEGIN("experiments");

TEST_CASE("power-law fit recovers exact and noisy generators") {
  std::vector<double> xs{1.0, 2.0, 4.0, 8.0, 16.0};
  PowerLawFit same = fit_power_law(xs, xs);
  CHECK(same.slope == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> ys;
  for (double x : xs) ys.push_back(7.0 * std::pow(x, -2.0));
  PowerLawFit decay = fit_power_law(xs, ys);
  CHECK(decay.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(decay.intercept == doctest::Approx(std::log(7.0)).epsilon(1e-12));

  Rng rng(3);
  std::vector<double> nx, ny;
  const double true_slope = -1.3, true_intercept = 0.8;
  for (int i = 0; i < 1000; ++i) {
    double x = std::exp(rng.uniform(0.0, 4.0));
    nx.push_back(x);
    ny.push_back(std::exp(true_intercept + true_slope * std::log(x) +
                          0.3 * rng.normal()));
  }
  PowerLawFit noisy = fit_power_law(nx, ny);
  CHECK(std::abs(noisy.slope - true_slope) <= 3.0 * noisy.slope_stderr);

  CHECK_THROWS_AS(fit_power_law(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      fit_power_law(std::vector<double>{1.0, -2.0, 3.0}, std::vector<double>{1.0, 2.0, 3.0}),
      std::invalid_argument);
}

TEST_CASE("rate regression on synthetic exact power-law rows") {
  std::vector<RateResultRow> rows;
  std::vector<std::size_t> ns{25, 50, 100, 200};
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t n : ns) {
      RateResultRow row;
      row.d = 1;
      row.n = n;
      row.trial = t;
      row.L_o = 2.0 * std::pow(static_cast<double>(n), -0.8);
      row.T_o = static_cast<std::size_t>(std::lround(4.0 * std::pow(n, 0.5)));
      rows.push_back(row);
    }
  }
  auto regs = regress_rate_rows(rows, {1}, ns, false);
  REQUIRE(regs.size() == 1);
  CHECK(regs[0].alpha == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(regs[0].excluded_trials == 0);

  // diverged rows are dropped and counted
  rows[0].status = RunStatus::diverged;
  auto regs2 = regress_rate_rows(rows, {1}, ns, false);
  CHECK(regs2[0].excluded_trials == 1);
  CHECK(std::isfinite(regs2[0].alpha));
}

TEST_CASE("sampling gap: quantization, concentration, Lemma-style bound") {
  Grid grid = make_grid(1, 128);
  GridDensity uniform = uniform_density(grid);
  FeatureSet fs = sample_features(1, 50, 5);

  // one sample per cell center reproduces the quadrature exactly
  SampleSet centers;
  centers.d = 1;
  std::vector<double> x(1);
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    grid.node(i, x);
    centers.points.push_back(x[0]);
  }
  CHECK(estimate_sampling_gap(centers, uniform, fs) <= 2.0 / grid.points_per_dim);

  SampleSet big = sample_grid_oracle(uniform, 1000000, 7);
  CHECK(estimate_sampling_gap(big, uniform, fs) <= 0.01);

  int pass = 0;
  const std::size_t n = 100;
  double bound = sampling_gap_bound(1, n, 0.1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SampleSet s = sample_grid_oracle(uniform, n, 50 + seed);
    if (estimate_sampling_gap(s, uniform, fs) <= bound) ++pass;
  }
  CHECK(pass >= 18);
}

TEST_CASE("sampling gap bound reproduces the explicit constants") {
  // 4 sqrt(2 log 2 / 100) + sqrt(2 log 20 / 100)
  double expect = 4.0 * std::sqrt(2.0 * std::log(2.0) / 100.0) +
                  std::sqrt(2.0 * std::log(20.0) / 100.0);
  CHECK(sampling_gap_bound(1, 100, 0.1) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("approximation experiment: zero at m_ref, bound columns, fit present") {
  ApproximationConfig cfg;
  cfg.d = 1;
  cfg.m_ref = 512;
  cfg.a_value = 20.0;
  cfg.ms = {16, 64, 256, 512};
  cfg.resamples = 3;
  cfg.master_seed = 9;
  cfg.points_per_dim_override = 256;
  ApproximationResult result = run_approximation_experiment(cfg);
  REQUIRE(result.rows.size() == cfg.ms.size() * cfg.resamples);
  CHECK(result.reference_norm == doctest::Approx(20.0));
  for (const ApproximationRow& row : result.rows) {
    CHECK(row.kl >= -1e-12);  // permuted summation order can round below zero
    CHECK(row.bound == doctest::Approx(20.0 / std::sqrt(static_cast<double>(row.m)) * 2.0 *
                                       std::sqrt(3.0) * std::sqrt(2.0)));
    if (row.m == cfg.m_ref) CHECK(std::abs(row.kl) <= 1e-12);
  }
  CHECK(result.fit.slope < 0.0);
}

TEST_CASE("generalization bound: early checkpoints are trivially inside") {
  Trajectory traj;
  for (std::size_t step : {1, 2, 5, 10, 100}) {
    Checkpoint cp;
    cp.step = step;
    cp.test_kl = 5.0;
    traj.checkpoints.push_back(cp);
  }
  BoundCheckReport report = check_generalization_bound(traj, 50.0, 1, 50, 0.1, 0.5);
  // v^2 / (2 t) alone is 2500 at t = 0.5
  CHECK(report.bound_curve.front() > 2000.0);
  CHECK(report.trials[0].satisfied_everywhere);
}

TEST_CASE("bound curve minimizer matches the closed form") {
  Trajectory traj;
  for (std::size_t step = 1; step <= 400; ++step) {
    Checkpoint cp;
    cp.step = step;
    cp.test_kl = 0.0;
    traj.checkpoints.push_back(cp);
  }
  BoundCheckReport report = check_generalization_bound(traj, 50.0, 1, 50, 0.1, 0.5);
  CHECK(report.closed_form_t ==
        doctest::Approx(50.0 / (2.0 * std::sqrt(report.epsilon))).epsilon(1e-15));
  CHECK(std::abs(report.numeric_minimizer_t - report.closed_form_t) /
            report.closed_form_t <=
        0.05);
}

TEST_CASE("rate experiment smoke run: row layout, determinism, thread independence") {
  RateExperimentConfig cfg;
  cfg.dims = {1};
  cfg.ns = {25, 50, 100};
  cfg.trials = 2;
  cfg.m = 100;
  cfg.a_star_value = 50.0;
  cfg.train.steps = 300;
  cfg.master_seed = 1;
  cfg.points_per_dim_override = 256;
  cfg.jobs = 1;
  RateExperimentResult a = run_rate_experiment(cfg);
  REQUIRE(a.rows.size() == 6);
  for (const RateResultRow& row : a.rows) {
    CHECK(row.status == RunStatus::ok);
    CHECK(row.L_o >= 0.0);
    CHECK(row.T_o >= 1);
  }
  REQUIRE(a.regressions.size() == 1);
  CHECK(a.regressions[0].excluded_trials == 0);

  cfg.jobs = 2;
  RateExperimentResult b = run_rate_experiment(cfg);
  REQUIRE(b.rows.size() == a.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].L_o == b.rows[i].L_o);
    CHECK(a.rows[i].T_o == b.rows[i].T_o);
    CHECK(a.rows[i].seed == b.rows[i].seed);
  }
  CHECK(a.regressions[0].alpha == b.regressions[0].alpha);

  // trial seeds depend only on (master, d, n, trial)
  RateExperimentConfig wider = cfg;
  wider.ns = {25, 50, 100, 200};
  RateExperimentResult c = run_rate_experiment(wider);
  for (const RateResultRow& row : a.rows) {
    for (const RateResultRow& other : c.rows) {
      if (other.d == row.d && other.n == row.n && other.trial == row.trial) {
        CHECK(other.L_o == row.L_o);
        CHECK(other.T_o == row.T_o);
      }
    }
  }
}

TEST_CASE("memorization experiment smoke run shows the descent-ascent shape") {
  MemorizationConfig cfg;
  cfg.d = 1;
  cfg.n = 25;
  cfg.m = 100;
  cfg.master_seed = 2;
  cfg.train.steps = 4000;
  cfg.control_steps = 1500;
  cfg.points_per_dim_override = 256;
  cfg.snapshot_steps = {160, 1000};
  MemorizationResult result = run_memorization_experiment(cfg);
  REQUIRE(result.trajectory.status == RunStatus::ok);
  REQUIRE(!result.trajectory.checkpoints.empty());

  double final_kl = *result.trajectory.checkpoints.back().test_kl;
  CHECK(result.early.kl < final_kl);
  CHECK(result.trajectory.snapshots.count(160) == 1);
  CHECK(result.trajectory.snapshots.count(1000) == 1);
  CHECK(result.samples.size() == 25);

  // control run: population target, monotone test KL
  REQUIRE(!result.control.checkpoints.empty());
  for (std::size_t i = 1; i < result.control.checkpoints.size(); ++i) {
    CHECK(*result.control.checkpoints[i].test_kl <=
          *result.control.checkpoints[i - 1].test_kl + 1e-12);
  }
}

TEST_SUITE_END();
