#include "biaspot/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "biaspot/rng.hpp"
#include "biaspot/threads.hpp"

namespace biaspot {

namespace {

constexpr std::uint64_t kFeatureTag = 0x6665617475726573ull;
constexpr std::uint64_t kSampleTag = 0x73616d706c65ull;
constexpr std::uint64_t kProbeTag = 0x70726f6265ull;

struct Ols {
  double slope, intercept, slope_stderr;
};

Ols ols(std::span<const double> xs, std::span<const double> ys) {
  std::size_t n = xs.size();
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols: degenerate x values");
  double slope = sxy / sxx;
  double intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = ys[i] - (intercept + slope * xs[i]);
    rss += r * r;
  }
  double se = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2) / sxx) : 0.0;
  return {slope, intercept, se};
}

SampleSet draw_target_samples(const GridDensity& target_density, const Potential& pot_star,
                              std::size_t n, std::uint64_t seed, SamplerKind sampler,
                              LangevinConfig langevin) {
  if (sampler == SamplerKind::oracle) return sample_grid_oracle(target_density, n, seed);
  langevin.seed = seed;
  return sample_langevin(pot_star, n, langevin);
}

}  // namespace

PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 3) {
    throw std::invalid_argument("fit_power_law: need >= 3 paired points");
  }
  std::vector<double> lx(xs.size()), ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw std::invalid_argument("fit_power_law: inputs must be positive");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  Ols f = ols(lx, ly);
  return {f.slope, f.intercept, f.slope_stderr};
}

double sampling_gap_bound(int d, std::size_t n, double delta) {
  double nn = static_cast<double>(n);
  return 4.0 * std::sqrt(2.0 * std::log(2.0 * d) / nn) +
         std::sqrt(2.0 * std::log(2.0 / delta) / nn);
}

double estimate_sampling_gap(const SampleSet& samples, const GridDensity& population,
                             const FeatureSet& features) {
  if (samples.d != features.d || population.grid.d != features.d) {
    throw std::invalid_argument("estimate_sampling_gap: dimension mismatch");
  }
  const int d = features.d;
  const int k = d + 1;

  // probe directions: realized features, signed coordinate axes, fresh draws
  std::vector<double> dirs(features.weights);
  for (int i = 0; i < k; ++i) {
    for (int s : {1, -1}) {
      std::vector<double> e(k, 0.0);
      e[i] = s;
      dirs.insert(dirs.end(), e.begin(), e.end());
    }
  }
  constexpr std::size_t kFresh = 5000;
  {
    Rng rng(derive_seed(features.seed, kProbeTag));
    std::vector<double> w(k);
    for (std::size_t j = 0; j < kFresh; ++j) {
      double total = 0.0;
      for (int i = 0; i < k; ++i) {
        w[i] = rng.exponential();
        total += w[i];
      }
      for (int i = 0; i < k; ++i) w[i] = rng.sign() * w[i] / total;
      dirs.insert(dirs.end(), w.begin(), w.end());
    }
  }
  std::size_t n_dirs = dirs.size() / k;

  auto relu = [](double z) { return z > 0.0 ? z : 0.0; };
  std::vector<double> pop_mean(n_dirs, 0.0), emp_mean(n_dirs, 0.0);
  std::vector<double> x(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < population.mass.size(); ++i) {
    double mi = population.mass[i];
    if (mi == 0.0) continue;
    population.grid.node(i, x);
    for (std::size_t j = 0; j < n_dirs; ++j) {
      const double* w = dirs.data() + j * k;
      double z = w[d];
      for (int c = 0; c < d; ++c) z += w[c] * x[c];
      pop_mean[j] += mi * relu(z);
    }
  }
  double inv_n = 1.0 / static_cast<double>(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    auto pt = samples.point(s);
    for (std::size_t j = 0; j < n_dirs; ++j) {
      const double* w = dirs.data() + j * k;
      double z = w[d];
      for (int c = 0; c < d; ++c) z += w[c] * pt[c];
      emp_mean[j] += inv_n * relu(z);
    }
  }
  double gap = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n_dirs; ++j) gap = std::max(gap, pop_mean[j] - emp_mean[j]);
  return gap;
}

// ---------------------------------------------------------------------------

RateExperimentResult run_rate_experiment(const RateExperimentConfig& cfg) {
  if (cfg.trials < 2) throw std::invalid_argument("run_rate_experiment: trials must be >= 2");
  {
    std::set<std::size_t> distinct(cfg.ns.begin(), cfg.ns.end());
    if (distinct.size() < 3) {
      throw std::invalid_argument("run_rate_experiment: need >= 3 distinct sample sizes");
    }
  }

  struct DimSetup {
    FeatureSet features;
    GridDensity target_density;
    Potential pot_star;
    Grid grid;
  };
  std::vector<DimSetup> setups;
  setups.reserve(cfg.dims.size());
  for (int d : cfg.dims) {
    DimSetup s;
    s.grid = cfg.points_per_dim_override > 0 ? make_grid(d, cfg.points_per_dim_override)
                                             : make_grid(d);
    s.features = sample_features(d, cfg.m, derive_seed(cfg.master_seed, kFeatureTag,
                                                       static_cast<std::uint64_t>(d)));
    s.pot_star = constant_coeff_potential(s.features, cfg.a_star_value);
    s.target_density = density_from_potential(s.pot_star, s.grid);
    setups.push_back(std::move(s));
  }

  std::size_t per_d = cfg.ns.size() * cfg.trials;
  std::size_t total = cfg.dims.size() * per_d;
  RateExperimentResult result;
  result.rows.resize(total);

  run_indexed_tasks(total, cfg.jobs, [&](std::size_t task) {
    std::size_t d_idx = task / per_d;
    std::size_t rest = task % per_d;
    std::size_t n_idx = rest / cfg.trials;
    std::size_t trial = rest % cfg.trials;
    const DimSetup& setup = setups[d_idx];
    int d = cfg.dims[d_idx];
    std::size_t n = cfg.ns[n_idx];

    RateResultRow row;
    row.d = d;
    row.n = n;
    row.trial = trial;
    row.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(d), n, trial);

    SampleSet samples = draw_target_samples(setup.target_density, setup.pot_star, n,
                                            derive_seed(row.seed, kSampleTag), cfg.sampler,
                                            cfg.langevin);
    TrainConfig tc = cfg.train;
    tc.seed = row.seed;
    tc.checkpoint_steps = log_checkpoint_schedule(tc.steps);
    tc.reference = Target::population(setup.target_density);

    Trajectory traj = train(zero_potential(setup.features), Target::empirical(samples),
                            setup.grid, tc);
    row.status = traj.status;
    if (traj.status == RunStatus::ok) {
      EarlyStop stop = early_stop_select(traj);
      row.T_o = stop.step;
      row.L_o = stop.kl;
    }
    result.rows[task] = row;
  });

  result.regressions = regress_rate_rows(result.rows, cfg.dims, cfg.ns,
                                         cfg.pooled_regression);
  return result;
}

std::vector<RateRegression> regress_rate_rows(const std::vector<RateResultRow>& rows,
                                              const std::vector<int>& dims,
                                              const std::vector<std::size_t>& ns,
                                              bool pooled) {
  std::vector<RateRegression> out;
  for (int d : dims) {
    RateRegression reg;
    reg.d = d;
    std::vector<double> lx_avg, ly_loss, ly_step;    // trial-averaged logs per n
    std::vector<double> px, py_loss, py_step;        // pooled points
    for (std::size_t n : ns) {
      double acc_loss = 0.0, acc_step = 0.0;
      std::size_t ok = 0;
      for (const RateResultRow& row : rows) {
        if (row.d != d || row.n != n) continue;
        if (row.status != RunStatus::ok) {
          ++reg.excluded_trials;
          continue;
        }
        acc_loss += std::log(row.L_o);
        acc_step += std::log(static_cast<double>(row.T_o));
        px.push_back(std::log(static_cast<double>(row.n)));
        py_loss.push_back(std::log(row.L_o));
        py_step.push_back(std::log(static_cast<double>(row.T_o)));
        ++ok;
      }
      if (ok > 0) {
        lx_avg.push_back(std::log(static_cast<double>(n)));
        ly_loss.push_back(acc_loss / ok);
        ly_step.push_back(acc_step / ok);
      }
    }
    const auto& xs = pooled ? px : lx_avg;
    Ols floss = ols(xs, pooled ? py_loss : ly_loss);
    Ols fstep = ols(xs, pooled ? py_step : ly_step);
    reg.alpha = -floss.slope;
    reg.alpha_stderr = floss.slope_stderr;
    reg.t_exponent = fstep.slope;
    reg.t_exponent_stderr = fstep.slope_stderr;
    out.push_back(reg);
  }
  return out;
}

// ---------------------------------------------------------------------------

MemorizationResult run_memorization_experiment(const MemorizationConfig& cfg) {
  MemorizationResult out;
  Grid grid = cfg.points_per_dim_override > 0 ? make_grid(cfg.d, cfg.points_per_dim_override)
                                              : make_grid(cfg.d);
  out.features = sample_features(cfg.d, cfg.m,
                                 derive_seed(cfg.master_seed, kFeatureTag,
                                             static_cast<std::uint64_t>(cfg.d)));
  Potential pot_star = constant_coeff_potential(out.features, cfg.a_star_value);
  out.target_density = density_from_potential(pot_star, grid);
  out.samples = draw_target_samples(out.target_density, pot_star, cfg.n,
                                    derive_seed(cfg.master_seed, kSampleTag), cfg.sampler,
                                    cfg.langevin);

  TrainConfig tc = cfg.train;
  tc.seed = cfg.master_seed;
  tc.checkpoint_steps = log_checkpoint_schedule(tc.steps);
  tc.snapshot_steps = cfg.snapshot_steps;
  tc.reference = Target::population(out.target_density);
  out.trajectory = train(zero_potential(out.features), Target::empirical(out.samples), grid, tc);
  out.early = early_stop_select(out.trajectory);

  if (cfg.control_run) {
    // no sampling error: plain gd on the population target stays monotone
    TrainConfig control = tc;
    control.optimizer = OptimizerKind::gd;
    control.step_size = 0.5;
    control.steps = std::min<std::size_t>(tc.steps, cfg.control_steps);
    control.checkpoint_steps = log_checkpoint_schedule(control.steps);
    control.snapshot_steps.clear();
    out.control = train(zero_potential(out.features), Target::population(out.target_density),
                        grid, control);
  }
  return out;
}

// ---------------------------------------------------------------------------

ApproximationResult run_approximation_experiment(const ApproximationConfig& cfg) {
  if (cfg.m_ref < 1) throw std::invalid_argument("run_approximation_experiment: m_ref >= 1");
  for (std::size_t m : cfg.ms) {
    if (m < 1 || m > cfg.m_ref) {
      throw std::invalid_argument("run_approximation_experiment: each m must be in [1, m_ref]");
    }
  }
  Grid grid = cfg.points_per_dim_override > 0 ? make_grid(cfg.d, cfg.points_per_dim_override)
                                              : make_grid(cfg.d);
  FeatureSet ref = sample_features(cfg.d, cfg.m_ref,
                                   derive_seed(cfg.master_seed, kFeatureTag,
                                               static_cast<std::uint64_t>(cfg.d)));
  Potential pot_ref = constant_coeff_potential(ref, cfg.a_value);
  GridDensity q_ref = density_from_potential(pot_ref, grid);

  ApproximationResult out;
  out.reference_norm = rkhs_norm(pot_ref);
  out.rows.resize(cfg.ms.size() * cfg.resamples);

  const double bound_const = 2.0 * std::sqrt(3.0) * std::sqrt(static_cast<double>(cfg.d) + 1.0);

  run_indexed_tasks(out.rows.size(), cfg.jobs, [&](std::size_t task) {
    std::size_t m_idx = task / cfg.resamples;
    std::size_t resample = task % cfg.resamples;
    std::size_t m = cfg.ms[m_idx];

    // take a uniform m-subset of the reference features, coefficients as-is
    std::vector<std::size_t> idx(cfg.m_ref);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(cfg.master_seed, m, resample));
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t j = i + rng.uniform_index(cfg.m_ref - i);
      std::swap(idx[i], idx[j]);
    }
    FeatureSet sub;
    sub.d = ref.d;
    sub.m = m;
    sub.activation = ref.activation;
    sub.beta = ref.beta;
    sub.seed = derive_seed(ref.seed, m, resample);
    sub.weights.resize(m * static_cast<std::size_t>(ref.d + 1));
    for (std::size_t i = 0; i < m; ++i) {
      auto row = ref.row(idx[i]);
      std::copy(row.begin(), row.end(), sub.weights.begin() + i * (ref.d + 1));
    }
    Potential pot_m = constant_coeff_potential(std::move(sub), cfg.a_value);

    ApproximationRow row;
    row.m = m;
    row.resample = resample;
    row.kl = kl_divergence(q_ref, density_from_potential(pot_m, grid));
    row.bound = out.reference_norm / std::sqrt(static_cast<double>(m)) * bound_const;
    out.rows[task] = row;
  });

  // exact-recovery points (kl = 0, e.g. m = m_ref) cannot enter the log fit
  std::vector<double> xs, ys;
  for (std::size_t m_idx = 0; m_idx < cfg.ms.size(); ++m_idx) {
    double acc = 0.0;
    for (std::size_t r = 0; r < cfg.resamples; ++r) {
      acc += out.rows[m_idx * cfg.resamples + r].kl;
    }
    double mean_kl = acc / static_cast<double>(cfg.resamples);
    if (mean_kl > 0.0) {
      xs.push_back(static_cast<double>(cfg.ms[m_idx]));
      ys.push_back(mean_kl);
    }
  }
  out.fit = fit_power_law(xs, ys);
  return out;
}

// ---------------------------------------------------------------------------

BoundCheckReport check_generalization_bound(const Trajectory& traj, double v_star_norm,
                                            int d, std::size_t n, double delta,
                                            double step_size) {
  BoundCheckReport report;
  report.epsilon = sampling_gap_bound(d, n, delta);
  report.closed_form_t = v_star_norm / (2.0 * std::sqrt(report.epsilon));

  BoundCheckTrial trial;
  trial.satisfied_everywhere = true;
  trial.worst_margin = std::numeric_limits<double>::infinity();
  double best_bound = std::numeric_limits<double>::infinity();
  for (const Checkpoint& cp : traj.checkpoints) {
    if (!cp.test_kl) continue;
    double t = static_cast<double>(cp.step) * step_size;
    double bound = v_star_norm * v_star_norm / (2.0 * t) + 2.0 * report.epsilon * t;
    double margin = bound - *cp.test_kl;
    trial.worst_margin = std::min(trial.worst_margin, margin);
    if (margin < 0.0) trial.satisfied_everywhere = false;
    report.ts.push_back(t);
    report.bound_curve.push_back(bound);
    if (bound < best_bound) {
      best_bound = bound;
      report.numeric_minimizer_t = t;
    }
  }
  report.trials.push_back(trial);
  report.satisfied_fraction = trial.satisfied_everywhere ? 1.0 : 0.0;
  return report;
}

BoundCheckReport run_generalization_bound_experiment(const BoundCheckConfig& cfg) {
  Grid grid = cfg.points_per_dim_override > 0 ? make_grid(cfg.d, cfg.points_per_dim_override)
                                              : make_grid(cfg.d);
  FeatureSet features = sample_features(cfg.d, cfg.m,
                                        derive_seed(cfg.master_seed, kFeatureTag,
                                                    static_cast<std::uint64_t>(cfg.d)));
  Potential pot_star = constant_coeff_potential(features, cfg.a_star_value);
  GridDensity target_density = density_from_potential(pot_star, grid);
  double v_star_norm = rkhs_norm(pot_star);  // a_0 = 0, so ||a_* - a_0|| = ||a_*||

  BoundCheckReport report;
  report.epsilon = sampling_gap_bound(cfg.d, cfg.n, cfg.delta);
  report.closed_form_t = v_star_norm / (2.0 * std::sqrt(report.epsilon));
  report.trials.resize(cfg.trials);

  std::vector<BoundCheckReport> firsts(cfg.trials);
  run_indexed_tasks(cfg.trials, cfg.jobs, [&](std::size_t trial) {
    std::uint64_t seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(cfg.d),
                                     cfg.n, trial);
    SampleSet samples = sample_grid_oracle(target_density, cfg.n, derive_seed(seed, kSampleTag));
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    tc.checkpoint_steps = log_checkpoint_schedule(tc.steps);
    tc.reference = Target::population(target_density);
    Trajectory traj = train(zero_potential(features), Target::empirical(samples), grid, tc);
    BoundCheckReport one = check_generalization_bound(traj, v_star_norm, cfg.d, cfg.n,
                                                      cfg.delta, tc.step_size);
    one.trials[0].seed = seed;
    report.trials[trial] = one.trials[0];
    firsts[trial] = std::move(one);
  });

  report.ts = firsts[0].ts;
  report.bound_curve = firsts[0].bound_curve;
  report.numeric_minimizer_t = firsts[0].numeric_minimizer_t;
  std::size_t satisfied = 0;
  for (const BoundCheckTrial& t : report.trials) satisfied += t.satisfied_everywhere ? 1 : 0;
  report.satisfied_fraction = static_cast<double>(satisfied) / cfg.trials;
  return report;
}

}  // namespace biaspot
