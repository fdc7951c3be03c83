#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biaspot/sampling.hpp"
#include "biaspot/training.hpp"

namespace biaspot {

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

// OLS on (log x, log y); inputs must be positive.
PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys);

// Lower bound on sup_{||w||_1 <= 1} E_{pop - emp}[sigma(w . x~)]: maximum over
// the realized features, the signed coordinate directions and 5000 fresh
// l1-sphere probes.
double estimate_sampling_gap(const SampleSet& samples, const GridDensity& population,
                             const FeatureSet& features);

// 4 sqrt(2 log 2d / n) + sqrt(2 log(2/delta) / n)
double sampling_gap_bound(int d, std::size_t n, double delta);

enum class SamplerKind { oracle, langevin };

// ---------------------------------------------------------------------------
// Sample-complexity exponents over (d, n) with per-trial resampling.

struct RateExperimentConfig {
  std::vector<int> dims{1, 2};
  std::vector<std::size_t> ns{25, 50, 100, 200};
  std::size_t trials = 20;
  std::size_t m = 500;
  double a_star_value = 50.0;
  TrainConfig train;  // optimizer/step_size/steps; checkpoint schedule is set internally
  std::uint64_t master_seed = 0;
  SamplerKind sampler = SamplerKind::oracle;
  LangevinConfig langevin;
  std::size_t jobs = 0;  // 0 = hardware
  bool pooled_regression = false;  // default: regress trial-averaged logs
  int points_per_dim_override = 0;

  RateExperimentConfig() {
    train.optimizer = OptimizerKind::gd;
    train.step_size = 0.5;
    train.steps = 1500;
  }
};

struct RateResultRow {
  int d = 0;
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t T_o = 0;
  double L_o = 0.0;
  RunStatus status = RunStatus::ok;
};

struct RateRegression {
  int d = 0;
  double alpha = 0.0;  // L_o ~ n^{-alpha}
  double alpha_stderr = 0.0;
  double t_exponent = 0.0;  // T_o ~ n^{t_exponent}
  double t_exponent_stderr = 0.0;
  std::size_t excluded_trials = 0;
};

struct RateExperimentResult {
  std::vector<RateResultRow> rows;
  std::vector<RateRegression> regressions;
};

// log L_o and log T_o against log n per dimension, diverged rows excluded.
std::vector<RateRegression> regress_rate_rows(const std::vector<RateResultRow>& rows,
                                              const std::vector<int>& dims,
                                              const std::vector<std::size_t>& ns,
                                              bool pooled);

RateExperimentResult run_rate_experiment(const RateExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Long-horizon training on a fixed sample set, plus a population control run.

struct MemorizationConfig {
  int d = 1;
  std::size_t n = 25;
  std::size_t m = 500;
  double a_star_value = 50.0;
  TrainConfig train;  // Adam by default
  std::vector<std::size_t> snapshot_steps{160, 1000, 10000, 100000};
  std::uint64_t master_seed = 0;
  SamplerKind sampler = SamplerKind::oracle;
  LangevinConfig langevin;
  bool control_run = true;             // gd on the population target
  std::size_t control_steps = 10000;   // descent shape needs no long horizon
  int points_per_dim_override = 0;

  MemorizationConfig() {
    train.optimizer = OptimizerKind::adam;
    train.step_size = 0.1;
    train.steps = 100000;
  }
};

struct MemorizationResult {
  Trajectory trajectory;
  Trajectory control;  // empty when control_run is false
  EarlyStop early;
  FeatureSet features;
  GridDensity target_density;
  SampleSet samples;
};

MemorizationResult run_memorization_experiment(const MemorizationConfig& cfg);

// ---------------------------------------------------------------------------
// Monte-Carlo approximation rate: KL(Q || Q_m) for feature subsets of a large
// reference set, with the explicit rate bound alongside.

struct ApproximationConfig {
  int d = 1;
  std::size_t m_ref = 10000;
  double a_value = 50.0;
  std::vector<std::size_t> ms{16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  std::size_t resamples = 10;
  std::uint64_t master_seed = 0;
  int points_per_dim_override = 0;
  std::size_t jobs = 0;
};

struct ApproximationRow {
  std::size_t m = 0;
  std::size_t resample = 0;
  double kl = 0.0;
  double bound = 0.0;  // (||V||_H / sqrt(m)) * 2 sqrt(3) * sqrt(d + 1)
};

struct ApproximationResult {
  std::vector<ApproximationRow> rows;
  PowerLawFit fit;  // log mean-KL against log m
  double reference_norm = 0.0;
};

ApproximationResult run_approximation_experiment(const ApproximationConfig& cfg);

// ---------------------------------------------------------------------------
// Generalization bound: both sides at every checkpoint of empirical runs.

struct BoundCheckConfig {
  int d = 1;
  std::size_t n = 50;
  double delta = 0.1;
  std::size_t trials = 50;
  std::size_t m = 500;
  double a_star_value = 50.0;
  TrainConfig train;
  std::uint64_t master_seed = 0;
  SamplerKind sampler = SamplerKind::oracle;
  std::size_t jobs = 0;
  int points_per_dim_override = 0;

  BoundCheckConfig() {
    train.optimizer = OptimizerKind::gd;
    train.step_size = 0.5;
    train.steps = 1000;
  }
};

struct BoundCheckTrial {
  std::uint64_t seed = 0;
  bool satisfied_everywhere = false;
  double worst_margin = 0.0;  // min over checkpoints of bound - kl
};

struct BoundCheckReport {
  std::vector<BoundCheckTrial> trials;
  double satisfied_fraction = 0.0;
  double epsilon = 0.0;            // sampling-gap term of the bound
  double numeric_minimizer_t = 0.0;  // argmin of the bound over checkpoint times
  double closed_form_t = 0.0;        // ||a_*|| / (2 sqrt(eps))
  std::vector<double> ts;            // checkpoint times of the first trial
  std::vector<double> bound_curve;
};

BoundCheckReport check_generalization_bound(const Trajectory& traj, double v_star_norm,
                                            int d, std::size_t n, double delta,
                                            double step_size);
BoundCheckReport run_generalization_bound_experiment(const BoundCheckConfig& cfg);

}  // namespace biaspot
