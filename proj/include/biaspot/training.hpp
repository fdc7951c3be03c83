#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "biaspot/common.hpp"
#include "biaspot/objectives.hpp"

namespace biaspot {

enum class OptimizerKind { gd, sgd, adam };

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::gd;
  double step_size = 0.5;  // applied to the functional gradient
  std::size_t steps = 1000;
  std::size_t eval_every = 1;
  std::size_t batch = 32;  // sgd minibatch, with replacement
  AdamParams adam;
  std::uint64_t seed = 0;
  std::optional<double> projection_radius;     // clip rkhs_norm back to R
  std::optional<Target> reference;             // population target for test KL
  std::vector<std::size_t> checkpoint_steps;   // overrides eval_every if set
  std::vector<std::size_t> snapshot_steps;     // coefficient snapshots
};

struct Checkpoint {
  std::size_t step = 0;
  double train_loss = 0.0;
  std::optional<double> test_kl;
  double rkhs_norm = 0.0;
  double wall_time = 0.0;  // seconds since run start
};

struct Trajectory {
  std::vector<Checkpoint> checkpoints;
  std::vector<double> final_coeffs;  // particle layout for two-layer runs
  std::map<std::size_t, std::vector<double>> snapshots;
  RunStatus status = RunStatus::ok;
  bool train_loss_increased = false;  // population gd should be monotone
};

// Euler steps on the coefficient flow da/dt = -g. Never mutates `init`.
Trajectory train(const Potential& init, const Target& target, const Grid& grid,
                 const TrainConfig& cfg);

// Same with the rkhs-ball projection after each step; cfg.projection_radius
// is required here.
Trajectory train_projected(const Potential& init, const Target& target,
                           const Grid& grid, const TrainConfig& cfg);

// Conservative flow on all particle coordinates (smoothed-relu only).
Trajectory train_two_layer(const TwoLayerNet& init, const Target& target,
                           const Grid& grid, const TrainConfig& cfg);

struct EarlyStop {
  std::size_t step = 0;
  double kl = 0.0;
};

// Checkpoint with minimal test KL; earliest step wins ties.
EarlyStop early_stop_select(const Trajectory& traj);

// Scale coefficients back onto the rkhs ball of the given radius (no-op inside).
void project_to_ball(std::vector<double>& coeffs, double radius);

struct DeviationReport {
  std::vector<std::size_t> steps;
  std::vector<double> deviation;  // ||a_t - a_t^{(n)}||, empirical L2(rho0)
  std::vector<double> bound;      // eps_hat * t, t = step * step_size
  double eps_hat = 0.0;           // max_j |E_{pop - emp}[sigma_j]|
};

// Twin gd runs on the population and empirical targets from the same
// initialization; measures how fast the trajectories separate.
DeviationReport trajectory_deviation_check(const Potential& init, const Target& population,
                                           const Target& empirical, const Grid& grid,
                                           const TrainConfig& cfg);

// Shared by experiments: dense unit steps up to 100, then geometric * 1.1,
// always ending at `total_steps`.
std::vector<std::size_t> log_checkpoint_schedule(std::size_t total_steps);

}  // namespace biaspot
