#include "biaspot/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "biaspot/rng.hpp"

namespace biaspot {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::set<std::size_t> checkpoint_set(const TrainConfig& cfg) {
  std::set<std::size_t> s;
  if (!cfg.checkpoint_steps.empty()) {
    for (std::size_t step : cfg.checkpoint_steps) {
      if (step >= 1 && step <= cfg.steps) s.insert(step);
    }
  } else {
    for (std::size_t step = cfg.eval_every; step <= cfg.steps; step += cfg.eval_every) {
      s.insert(step);
    }
  }
  s.insert(cfg.steps);
  return s;
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.step_size <= 0.0) throw std::invalid_argument("train: step_size must be > 0");
  if (cfg.steps < 1) throw std::invalid_argument("train: steps must be >= 1");
  if (cfg.eval_every < 1) throw std::invalid_argument("train: eval_every must be >= 1");
  if (cfg.projection_radius && *cfg.projection_radius <= 0.0) {
    throw std::invalid_argument("train: projection radius must be > 0");
  }
  if (cfg.reference && cfg.reference->kind != Target::Kind::population) {
    throw std::invalid_argument("train: reference target must be a population density");
  }
}

bool finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

struct AdamState {
  std::vector<double> m1, m2;
  std::size_t t = 0;
};

void apply_update(std::vector<double>& a, std::span<const double> g, const TrainConfig& cfg,
                  AdamState& adam) {
  switch (cfg.optimizer) {
    case OptimizerKind::gd:
    case OptimizerKind::sgd:
      for (std::size_t j = 0; j < a.size(); ++j) a[j] -= cfg.step_size * g[j];
      break;
    case OptimizerKind::adam: {
      if (adam.m1.empty()) {
        adam.m1.assign(a.size(), 0.0);
        adam.m2.assign(a.size(), 0.0);
      }
      ++adam.t;
      const AdamParams& p = cfg.adam;
      double c1 = 1.0 - std::pow(p.beta1, static_cast<double>(adam.t));
      double c2 = 1.0 - std::pow(p.beta2, static_cast<double>(adam.t));
      for (std::size_t j = 0; j < a.size(); ++j) {
        adam.m1[j] = p.beta1 * adam.m1[j] + (1.0 - p.beta1) * g[j];
        adam.m2[j] = p.beta2 * adam.m2[j] + (1.0 - p.beta2) * g[j] * g[j];
        double mhat = adam.m1[j] / c1;
        double vhat = adam.m2[j] / c2;
        a[j] -= cfg.step_size * mhat / (std::sqrt(vhat) + p.eps);
      }
      break;
    }
  }
}

}  // namespace

void project_to_ball(std::vector<double>& coeffs, double radius) {
  double norm = rkhs_norm(coeffs);
  if (norm > radius) {
    double scale = radius / norm;
    for (double& a : coeffs) a *= scale;
  }
}

std::vector<std::size_t> log_checkpoint_schedule(std::size_t total_steps) {
  std::vector<std::size_t> steps;
  for (std::size_t s = 1; s <= std::min<std::size_t>(100, total_steps); ++s) steps.push_back(s);
  std::size_t s = steps.empty() ? 1 : steps.back();
  while (s < total_steps) {
    s = std::max(s + 1, static_cast<std::size_t>(std::ceil(static_cast<double>(s) * 1.1)));
    steps.push_back(std::min(s, total_steps));
  }
  if (steps.empty() || steps.back() != total_steps) steps.push_back(total_steps);
  return steps;
}

Trajectory train(const Potential& init, const Target& target, const Grid& grid,
                 const TrainConfig& cfg) {
  validate_config(cfg);
  if (cfg.optimizer == OptimizerKind::sgd && target.kind != Target::Kind::empirical) {
    throw std::invalid_argument("train: sgd requires an empirical target");
  }
  auto t0 = Clock::now();
  auto ws = detail::ObjectiveWorkspace::build(init.features, grid, target);
  const GridDensity* ref = cfg.reference ? &cfg.reference->density : nullptr;
  if (ref && ref->mass.size() != grid.cell_count()) {
    throw std::invalid_argument("train: reference density grid mismatch");
  }

  std::set<std::size_t> checkpoints = checkpoint_set(cfg);
  std::set<std::size_t> snapshots(cfg.snapshot_steps.begin(), cfg.snapshot_steps.end());

  Trajectory traj;
  std::vector<double> a = init.coeffs;
  AdamState adam;
  Rng rng(derive_seed(cfg.seed, 0x736764ull));  // sgd batch stream
  std::vector<double> batch_embedding;
  double last_loss = std::numeric_limits<double>::infinity();

  for (std::size_t step = 0; step <= cfg.steps; ++step) {
    if (!finite(a)) {
      traj.status = RunStatus::diverged;
      break;
    }
    std::vector<double> v = ws.fg.potential_values(a);
    GridDensity q;
    try {
      q = density_from_values(grid, v);
    } catch (const numeric_error&) {
      traj.status = RunStatus::diverged;
      break;
    }

    if (step >= 1 && checkpoints.count(step)) {
      Checkpoint cp;
      cp.step = step;
      cp.train_loss = detail::loss_backward_ws(ws, a, v, q);
      if (!std::isfinite(cp.train_loss)) {
        traj.status = RunStatus::diverged;
        break;
      }
      if (cp.train_loss > last_loss + 1e-12) traj.train_loss_increased = true;
      last_loss = cp.train_loss;
      if (ref) cp.test_kl = kl_divergence(*ref, q);
      cp.rkhs_norm = rkhs_norm(a);
      cp.wall_time = seconds_since(t0);
      traj.checkpoints.push_back(cp);
    }
    if (snapshots.count(step)) traj.snapshots[step] = a;
    if (step == cfg.steps) break;

    std::vector<double> g;
    if (cfg.optimizer == OptimizerKind::sgd) {
      std::size_t n = target.samples.size();
      std::size_t batch = std::max<std::size_t>(1, cfg.batch);
      batch_embedding.assign(ws.fg.m, 0.0);
      for (std::size_t b = 0; b < batch; ++b) {
        std::size_t k = rng.uniform_index(n);
        const double* row = ws.atoms.phi.data() + k * ws.atoms.m;
        for (std::size_t j = 0; j < ws.fg.m; ++j) batch_embedding[j] += row[j];
      }
      for (double& e : batch_embedding) e /= static_cast<double>(batch);
      g = detail::grad_backward_ws(ws, q, batch_embedding);
    } else {
      g = detail::grad_backward_ws(ws, q);
    }
    apply_update(a, g, cfg, adam);
    if (cfg.projection_radius) project_to_ball(a, *cfg.projection_radius);
  }

  traj.final_coeffs = std::move(a);
  return traj;
}

Trajectory train_projected(const Potential& init, const Target& target, const Grid& grid,
                           const TrainConfig& cfg) {
  if (!cfg.projection_radius) {
    throw std::invalid_argument("train_projected: projection_radius is required");
  }
  return train(init, target, grid, cfg);
}

Trajectory train_two_layer(const TwoLayerNet& init, const Target& target, const Grid& grid,
                           const TrainConfig& cfg) {
  validate_config(cfg);
  if (cfg.optimizer == OptimizerKind::sgd) {
    throw std::invalid_argument("train_two_layer: sgd is not supported");
  }
  auto t0 = Clock::now();
  const GridDensity* ref = cfg.reference ? &cfg.reference->density : nullptr;
  std::set<std::size_t> checkpoints = checkpoint_set(cfg);
  std::set<std::size_t> snapshots(cfg.snapshot_steps.begin(), cfg.snapshot_steps.end());

  Trajectory traj;
  TwoLayerNet net = init;
  AdamState adam;
  const std::size_t stride = static_cast<std::size_t>(net.d) + 2;
  double last_loss = std::numeric_limits<double>::infinity();

  for (std::size_t step = 0; step <= cfg.steps; ++step) {
    bool blown_up = false;
    for (double p : net.particles) {
      if (!std::isfinite(p) || std::abs(p) > 1e6) {
        blown_up = true;
        break;
      }
    }
    if (blown_up) {
      traj.status = RunStatus::diverged;
      break;
    }

    if (step >= 1 && checkpoints.count(step)) {
      Checkpoint cp;
      cp.step = step;
      cp.train_loss = loss_backward(net, target, grid);
      if (!std::isfinite(cp.train_loss)) {
        traj.status = RunStatus::diverged;
        break;
      }
      if (cp.train_loss > last_loss + 1e-12) traj.train_loss_increased = true;
      last_loss = cp.train_loss;
      if (ref) cp.test_kl = kl_divergence(*ref, density_from_potential(net, grid));
      double acc = 0.0;
      for (std::size_t j = 0; j < net.m; ++j) {
        double aj = net.particles[j * stride];
        acc += aj * aj;
      }
      cp.rkhs_norm = std::sqrt(acc / static_cast<double>(net.m));
      cp.wall_time = seconds_since(t0);
      traj.checkpoints.push_back(cp);
    }
    if (snapshots.count(step)) traj.snapshots[step] = net.particles;
    if (step == cfg.steps) break;

    std::vector<double> g = two_layer_gradient(net, target, grid);
    apply_update(net.particles, g, cfg, adam);
  }

  traj.final_coeffs = std::move(net.particles);
  return traj;
}

EarlyStop early_stop_select(const Trajectory& traj) {
  const Checkpoint* best = nullptr;
  for (const Checkpoint& cp : traj.checkpoints) {
    if (!cp.test_kl) continue;
    if (!best || *cp.test_kl < *best->test_kl) best = &cp;
  }
  if (!best) throw std::invalid_argument("early_stop_select: no test_kl recorded");
  return {best->step, *best->test_kl};
}

DeviationReport trajectory_deviation_check(const Potential& init, const Target& population,
                                           const Target& empirical, const Grid& grid,
                                           const TrainConfig& cfg) {
  validate_config(cfg);
  if (cfg.optimizer != OptimizerKind::gd) {
    throw std::invalid_argument("trajectory_deviation_check: gd only");
  }
  if (population.kind != Target::Kind::population ||
      empirical.kind != Target::Kind::empirical) {
    throw std::invalid_argument("trajectory_deviation_check: needs (population, empirical)");
  }
  auto ws_pop = detail::ObjectiveWorkspace::build(init.features, grid, population);
  auto ws_emp = detail::ObjectiveWorkspace::build(init.features, grid, empirical);

  DeviationReport report;
  for (std::size_t j = 0; j < ws_pop.target_embedding.size(); ++j) {
    report.eps_hat = std::max(
        report.eps_hat, std::abs(ws_pop.target_embedding[j] - ws_emp.target_embedding[j]));
  }

  std::set<std::size_t> checkpoints = checkpoint_set(cfg);
  std::vector<double> a_pop = init.coeffs;
  std::vector<double> a_emp = init.coeffs;
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    GridDensity q_pop = density_from_values(grid, ws_pop.fg.potential_values(a_pop));
    GridDensity q_emp = density_from_values(grid, ws_emp.fg.potential_values(a_emp));
    std::vector<double> g_pop = detail::grad_backward_ws(ws_pop, q_pop);
    std::vector<double> g_emp = detail::grad_backward_ws(ws_emp, q_emp);
    for (std::size_t j = 0; j < a_pop.size(); ++j) {
      a_pop[j] -= cfg.step_size * g_pop[j];
      a_emp[j] -= cfg.step_size * g_emp[j];
    }
    if (checkpoints.count(step)) {
      double acc = 0.0;
      for (std::size_t j = 0; j < a_pop.size(); ++j) {
        double dj = a_pop[j] - a_emp[j];
        acc += dj * dj;
      }
      report.steps.push_back(step);
      report.deviation.push_back(std::sqrt(acc / static_cast<double>(a_pop.size())));
      report.bound.push_back(report.eps_hat * static_cast<double>(step) * cfg.step_size);
    }
  }
  return report;
}

}  // namespace biaspot
