#include "biaspot/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "biaspot/io.hpp"
#include "biaspot/rng.hpp"
#include "biaspot/threads.hpp"

namespace biaspot::cli {

namespace {

namespace fs = std::filesystem;

struct ManifestScope {
  io::Manifest manifest;
  fs::path out_dir;

  explicit ManifestScope(const std::vector<std::string>& args, fs::path dir)
      : out_dir(std::move(dir)) {
    std::ostringstream cmd;
    for (std::size_t i = 0; i < args.size(); ++i) cmd << (i ? " " : "") << args[i];
    manifest.command_line = cmd.str();
    manifest.code_version = kVersion;
    manifest.started_at = io::manifest_timestamp();
    fs::create_directories(out_dir);
  }

  void config(const std::string& key, const std::string& value) {
    manifest.config.emplace_back(key, value);
  }
  template <typename T>
  void config_num(const std::string& key, T value) {
    if constexpr (std::is_floating_point_v<T>) {
      config(key, io::format_double(value));
    } else {
      config(key, std::to_string(value));
    }
  }
  fs::path emit(const std::string& name) {
    fs::path p = out_dir / name;
    manifest.outputs.push_back(p);
    return p;
  }
  void close() { io::write_manifest(std::move(manifest), out_dir / "manifest.json"); }
};

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::ostringstream ss;
  for (std::size_t i = 0; i < v.size(); ++i) ss << (i ? "," : "") << v[i];
  return ss.str();
}

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream ss;
  for (std::size_t i = 0; i < v.size(); ++i) ss << (i ? "," : "") << v[i];
  return ss.str();
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "gd") return OptimizerKind::gd;
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw CLI::ValidationError("--opt", "unknown optimizer '" + name + "'");
}

bool has_extension(const fs::path& p, const char* ext) {
  return p.extension() == ext;
}

// Potential JSON -> population target (plus reference density); CSV -> samples.
struct LoadedTarget {
  Target target;
  std::optional<Potential> potential;  // set when the target came from a potential file
};

LoadedTarget load_target(const fs::path& path, const Grid& grid) {
  LoadedTarget out;
  if (has_extension(path, ".json")) {
    Potential pot = io::load_potential(path);
    out.target = Target::population(density_from_potential(pot, grid));
    out.potential = std::move(pot);
  } else {
    out.target = Target::empirical(io::load_samples(path));
  }
  return out;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  int d = 1;
  std::size_t m = 500;
  std::string target_path;
  std::string ref_path;
  std::string opt = "gd";
  double lr = 0.5;
  std::size_t steps = 1000;
  std::size_t eval_every = 1;
  std::size_t batch = 32;
  double project = 0.0;
  std::uint64_t seed = 0;
  int grid_p = 0;
  bool share_features = false;
  std::string activation = "relu";
  double beta = kDefaultSmoothing;
  std::vector<std::size_t> snapshot_steps;
  std::string out = "run";
};

int cmd_train(const TrainArgs& a, const std::vector<std::string>& argv) {
  Grid grid = a.grid_p > 0 ? make_grid(a.d, a.grid_p) : make_grid(a.d);
  LoadedTarget loaded = load_target(a.target_path, grid);
  if (loaded.target.dim() != a.d) {
    throw std::invalid_argument("target dimension does not match --d");
  }

  FeatureSet features;
  if (a.share_features) {
    if (!loaded.potential) {
      throw std::invalid_argument("--share-features needs a potential-file target");
    }
    features = loaded.potential->features;
  } else {
    Activation act = a.activation == "smoothed-relu" ? Activation::smoothed_relu
                                                     : Activation::relu;
    features = sample_features(a.d, a.m, derive_seed(a.seed, 0x6d6f64656cull), act, a.beta);
  }

  TrainConfig cfg;
  cfg.optimizer = parse_optimizer(a.opt);
  cfg.step_size = a.lr;
  cfg.steps = a.steps;
  cfg.eval_every = a.eval_every;
  cfg.batch = a.batch;
  cfg.seed = a.seed;
  if (a.project > 0.0) cfg.projection_radius = a.project;
  cfg.snapshot_steps = a.snapshot_steps;
  if (!a.ref_path.empty()) {
    Potential ref = io::load_potential(a.ref_path);
    cfg.reference = Target::population(density_from_potential(ref, grid));
  } else if (loaded.potential) {
    cfg.reference = loaded.target;  // already a population density
  }

  ManifestScope ms(argv, a.out);
  ms.manifest.master_seed = a.seed;
  ms.config_num("d", a.d);
  ms.config_num("m", a.m);
  ms.config("target", a.target_path);
  ms.config("opt", a.opt);
  ms.config_num("lr", a.lr);
  ms.config_num("steps", a.steps);
  ms.config_num("seed", a.seed);
  ms.config_num("grid_p", grid.points_per_dim);

  Trajectory traj = train(zero_potential(features), loaded.target, grid, cfg);

  io::save_trajectory(traj, ms.emit("trajectory.csv"));
  Potential final_pot{features, traj.final_coeffs};
  io::save_potential(final_pot, ms.emit("potential.json"));
  for (const auto& [step, coeffs] : traj.snapshots) {
    io::save_potential(Potential{features, coeffs}, ms.emit("snap_" + std::to_string(step) + ".json"));
  }
  ms.close();
  return traj.status == RunStatus::diverged ? kExitDiverged : kExitOk;
}

// ---------------------------------------------------------------------------

struct SampleArgs {
  std::string potential_path;
  std::size_t n = 100;
  std::string sampler = "oracle";
  std::uint64_t seed = 0;
  int grid_p = 0;
  LangevinConfig langevin;
  std::string out = "run";
};

int cmd_sample(const SampleArgs& a, const std::vector<std::string>& argv) {
  Potential pot = io::load_potential(a.potential_path);
  ManifestScope ms(argv, a.out);
  ms.manifest.master_seed = a.seed;
  ms.config("potential", a.potential_path);
  ms.config_num("n", a.n);
  ms.config("sampler", a.sampler);
  ms.config_num("seed", a.seed);

  SampleSet samples;
  if (a.sampler == "oracle") {
    Grid grid = a.grid_p > 0 ? make_grid(pot.features.d, a.grid_p) : make_grid(pot.features.d);
    samples = sample_grid_oracle(density_from_potential(pot, grid), a.n, a.seed);
  } else if (a.sampler == "langevin") {
    LangevinConfig cfg = a.langevin;
    cfg.seed = a.seed;
    samples = sample_langevin(pot, a.n, cfg, default_jobs());
  } else {
    throw std::invalid_argument("unknown sampler '" + a.sampler + "'");
  }
  io::save_samples(samples, ms.emit("samples.csv"));
  ms.close();
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string metric = "kl";
  std::string a_path;
  std::string b_path;
  int grid_p = 0;
  std::string out = ".";
};

GridDensity density_of_artifact(const fs::path& path, int grid_p) {
  if (has_extension(path, ".json")) {
    Potential pot = io::load_potential(path);
    Grid grid = grid_p > 0 ? make_grid(pot.features.d, grid_p) : make_grid(pot.features.d);
    return density_from_potential(pot, grid);
  }
  return io::load_density(path);
}

int cmd_eval(const EvalArgs& a, const std::vector<std::string>& argv) {
  double value = 0.0;
  if (a.metric == "rkhs-norm") {
    value = rkhs_norm(io::load_potential(a.a_path));
  } else if (a.metric == "kl") {
    if (a.b_path.empty()) throw std::invalid_argument("eval kl: --b is required");
    value = kl_divergence(density_of_artifact(a.a_path, a.grid_p),
                          density_of_artifact(a.b_path, a.grid_p));
  } else if (a.metric == "loss-backward" || a.metric == "loss-forward") {
    if (a.b_path.empty()) throw std::invalid_argument("eval loss: --b is required");
    Potential pot = io::load_potential(a.a_path);
    Grid grid = a.grid_p > 0 ? make_grid(pot.features.d, a.grid_p)
                             : make_grid(pot.features.d);
    LoadedTarget loaded = load_target(a.b_path, grid);
    value = a.metric == "loss-backward" ? loss_backward(pot, loaded.target, grid)
                                        : loss_forward(pot, loaded.target, grid);
  } else {
    throw std::invalid_argument("unknown metric '" + a.metric + "'");
  }

  std::string line = a.metric + "=" + io::format_double(value);
  std::cout << line << "\n";
  ManifestScope ms(argv, a.out);
  ms.config("metric", a.metric);
  ms.config("a", a.a_path);
  if (!a.b_path.empty()) ms.config("b", a.b_path);
  ms.manifest.results.push_back(line);
  ms.close();
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct RateArgs {
  RateExperimentConfig cfg;
  std::string out = "rate";
  bool plot = false;
};

int cmd_experiment_rate(RateArgs& a, const std::vector<std::string>& argv) {
  ManifestScope ms(argv, a.out);
  ms.manifest.master_seed = a.cfg.master_seed;
  ms.config("dims", join_ints(a.cfg.dims));
  ms.config("ns", join_sizes(a.cfg.ns));
  ms.config_num("trials", a.cfg.trials);
  ms.config_num("m", a.cfg.m);
  ms.config_num("a_star", a.cfg.a_star_value);
  ms.config_num("steps", a.cfg.train.steps);
  ms.config_num("lr", a.cfg.train.step_size);
  ms.config("sampler", a.cfg.sampler == SamplerKind::oracle ? "oracle" : "langevin");
  ms.config_num("seed", a.cfg.master_seed);
  ms.config_num("jobs", a.cfg.jobs == 0 ? default_jobs() : a.cfg.jobs);

  RateExperimentResult result = run_rate_experiment(a.cfg);
  io::save_rate_rows(result.rows, ms.emit("rate_results.csv"));
  io::save_rate_regressions(result.regressions, ms.emit("rate_regression.csv"));

  if (a.plot) {
    std::vector<io::PlotSeries> series;
    for (int d : a.cfg.dims) {
      io::PlotSeries s;
      s.name = "d=" + std::to_string(d);
      for (std::size_t n : a.cfg.ns) {
        double acc = 0.0;
        std::size_t ok = 0;
        for (const RateResultRow& row : result.rows) {
          if (row.d == d && row.n == n && row.status == RunStatus::ok) {
            acc += std::log(row.L_o);
            ++ok;
          }
        }
        if (ok) {
          s.xs.push_back(static_cast<double>(n));
          s.ys.push_back(std::exp(acc / ok));
        }
      }
      series.push_back(std::move(s));
    }
    io::write_svg_plot(ms.emit("rate_plot.svg"), "optimal KL vs sample size", "n", "L_o",
                       series, true);
  }
  ms.close();

  std::size_t diverged = 0;
  for (const RateResultRow& row : result.rows) {
    if (row.status != RunStatus::ok) ++diverged;
  }
  for (const RateRegression& reg : result.regressions) {
    std::cout << "d=" << reg.d << " alpha=" << io::format_double(reg.alpha)
              << " t_exponent=" << io::format_double(reg.t_exponent) << "\n";
  }
  return diverged * 10 > result.rows.size() ? kExitDiverged : kExitOk;
}

struct MemorizeArgs {
  MemorizationConfig cfg;
  std::string out = "memorize";
  bool plot = false;
};

int cmd_experiment_memorize(MemorizeArgs& a, const std::vector<std::string>& argv) {
  ManifestScope ms(argv, a.out);
  ms.manifest.master_seed = a.cfg.master_seed;
  ms.config_num("d", a.cfg.d);
  ms.config_num("n", a.cfg.n);
  ms.config_num("m", a.cfg.m);
  ms.config_num("a_star", a.cfg.a_star_value);
  ms.config_num("steps", a.cfg.train.steps);
  ms.config_num("lr", a.cfg.train.step_size);
  ms.config_num("seed", a.cfg.master_seed);
  ms.config("snapshots", join_sizes(a.cfg.snapshot_steps));

  MemorizationResult result = run_memorization_experiment(a.cfg);
  io::save_memorize_curve(result.trajectory, ms.emit("memorize_curve.csv"));
  io::save_samples(result.samples, ms.emit("samples.csv"));
  io::save_density(result.target_density, ms.emit("target_density.csv"));
  if (a.cfg.control_run) io::save_memorize_curve(result.control, ms.emit("control_curve.csv"));
  Grid grid = result.target_density.grid;
  for (const auto& [step, coeffs] : result.trajectory.snapshots) {
    Potential pot{result.features, coeffs};
    io::save_potential(pot, ms.emit("snap_" + std::to_string(step) + ".json"));
    io::save_density(density_from_potential(pot, grid),
                     ms.emit("density_" + std::to_string(step) + ".csv"));
  }
  if (a.plot) {
    io::PlotSeries kl{"test KL", {}, {}};
    io::PlotSeries norm{"rkhs norm", {}, {}};
    for (const Checkpoint& cp : result.trajectory.checkpoints) {
      if (cp.test_kl) {
        kl.xs.push_back(static_cast<double>(cp.step));
        kl.ys.push_back(*cp.test_kl);
      }
      norm.xs.push_back(static_cast<double>(cp.step));
      norm.ys.push_back(cp.rkhs_norm);
    }
    io::write_svg_plot(ms.emit("memorize_plot.svg"), "memorization", "step", "value",
                       {kl, norm}, true);
  }
  ms.close();
  std::cout << "T_o=" << result.early.step << " L_o=" << io::format_double(result.early.kl)
            << "\n";
  return result.trajectory.status == RunStatus::diverged ? kExitDiverged : kExitOk;
}

struct ApproxArgs {
  ApproximationConfig cfg;
  std::string out = "approx";
  bool plot = false;
};

int cmd_experiment_approx(ApproxArgs& a, const std::vector<std::string>& argv) {
  ManifestScope ms(argv, a.out);
  ms.manifest.master_seed = a.cfg.master_seed;
  ms.config_num("d", a.cfg.d);
  ms.config_num("m_ref", a.cfg.m_ref);
  ms.config_num("a_value", a.cfg.a_value);
  ms.config("ms", join_sizes(a.cfg.ms));
  ms.config_num("resamples", a.cfg.resamples);
  ms.config_num("seed", a.cfg.master_seed);

  ApproximationResult result = run_approximation_experiment(a.cfg);
  io::save_approx_rows(result.rows, ms.emit("approx_rate.csv"));
  if (a.plot) {
    io::PlotSeries s{"mean KL", {}, {}};
    for (std::size_t i = 0; i < a.cfg.ms.size(); ++i) {
      double acc = 0.0;
      for (std::size_t r = 0; r < a.cfg.resamples; ++r) {
        acc += result.rows[i * a.cfg.resamples + r].kl;
      }
      s.xs.push_back(static_cast<double>(a.cfg.ms[i]));
      s.ys.push_back(acc / a.cfg.resamples);
    }
    io::write_svg_plot(ms.emit("approx_plot.svg"), "approximation rate", "m", "KL", {s}, true);
  }
  ms.close();
  std::cout << "slope=" << io::format_double(result.fit.slope) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"bias-potential distribution learning"};
  app.require_subcommand(1);
  app.set_config("--config");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a potential on a target");
  train_cmd->add_option("--d", train_args.d, "input dimension")->check(CLI::PositiveNumber);
  train_cmd->add_option("--m", train_args.m, "feature count")->check(CLI::PositiveNumber);
  train_cmd->add_option("--target", train_args.target_path,
                        "target artifact: potential .json or samples .csv")
      ->required();
  train_cmd->add_option("--ref-potential", train_args.ref_path,
                        "population reference for test-KL logging");
  train_cmd->add_option("--opt", train_args.opt, "optimizer: gd, sgd, adam")
      ->check(CLI::IsMember({"gd", "sgd", "adam"}))
      ->capture_default_str();
  train_cmd->add_option("--lr", train_args.lr, "step size on the functional gradient")
      ->capture_default_str();
  train_cmd->add_option("--steps", train_args.steps, "training steps")->capture_default_str();
  train_cmd->add_option("--eval-every", train_args.eval_every, "checkpoint cadence")
      ->capture_default_str();
  train_cmd->add_option("--batch", train_args.batch, "sgd minibatch size")->capture_default_str();
  train_cmd->add_option("--project", train_args.project, "rkhs-ball radius (0 = off)");
  train_cmd->add_option("--seed", train_args.seed, "rng seed")->capture_default_str();
  train_cmd->add_option("--grid-p", train_args.grid_p, "grid points per dimension");
  train_cmd->add_flag("--share-features", train_args.share_features,
                      "reuse the target potential's features");
  train_cmd->add_option("--activation", train_args.activation, "relu or smoothed-relu")
      ->check(CLI::IsMember({"relu", "smoothed-relu"}))
      ->capture_default_str();
  train_cmd->add_option("--beta", train_args.beta, "smoothed-relu sharpness")
      ->capture_default_str();
  train_cmd->add_option("--snapshot-steps", train_args.snapshot_steps,
                        "steps at which to save coefficient snapshots")
      ->delimiter(',');
  train_cmd->add_option("--out", train_args.out, "output directory")->capture_default_str();

  SampleArgs sample_args;
  auto* sample_cmd = app.add_subcommand("sample", "draw samples from a potential");
  sample_cmd->add_option("--potential", sample_args.potential_path, "potential .json")
      ->required();
  sample_cmd->add_option("--n", sample_args.n, "sample count")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--sampler", sample_args.sampler, "oracle or langevin")
      ->check(CLI::IsMember({"oracle", "langevin"}))
      ->capture_default_str();
  sample_cmd->add_option("--seed", sample_args.seed, "rng seed")->capture_default_str();
  sample_cmd->add_option("--grid-p", sample_args.grid_p, "oracle grid resolution");
  sample_cmd->add_option("--eta", sample_args.langevin.eta, "langevin step")
      ->capture_default_str();
  sample_cmd->add_option("--burn-in", sample_args.langevin.burn_in, "langevin burn-in")
      ->capture_default_str();
  sample_cmd->add_option("--thinning", sample_args.langevin.thinning, "langevin thinning")
      ->capture_default_str();
  sample_cmd->add_option("--chains", sample_args.langevin.chains, "langevin chains")
      ->capture_default_str();
  sample_cmd->add_option("--out", sample_args.out, "output directory")->capture_default_str();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a metric between artifacts");
  eval_cmd->add_option("--metric", eval_args.metric,
                       "kl, rkhs-norm, loss-backward, loss-forward")
      ->check(CLI::IsMember({"kl", "rkhs-norm", "loss-backward", "loss-forward"}))
      ->capture_default_str();
  eval_cmd->add_option("--a", eval_args.a_path, "first artifact")->required();
  eval_cmd->add_option("--b", eval_args.b_path, "second artifact");
  eval_cmd->add_option("--grid-p", eval_args.grid_p, "grid points per dimension");
  eval_cmd->add_option("--out", eval_args.out, "manifest directory")->capture_default_str();

  auto* exp_cmd = app.add_subcommand("experiment", "paper-scale studies");
  exp_cmd->require_subcommand(1);

  RateArgs rate_args;
  bool rate_pooled = false;
  std::string rate_sampler = "oracle";
  auto* rate_cmd = exp_cmd->add_subcommand("rate", "sample-complexity exponents");
  rate_cmd->add_option("--dims", rate_args.cfg.dims, "dimensions")->delimiter(',');
  rate_cmd->add_option("--ns", rate_args.cfg.ns, "sample sizes")->delimiter(',');
  rate_cmd->add_option("--trials", rate_args.cfg.trials, "trials per (d, n)")
      ->capture_default_str();
  rate_cmd->add_option("--m", rate_args.cfg.m, "feature count")->capture_default_str();
  rate_cmd->add_option("--a-star", rate_args.cfg.a_star_value, "target coefficient value")
      ->capture_default_str();
  rate_cmd->add_option("--steps", rate_args.cfg.train.steps, "training steps")
      ->capture_default_str();
  rate_cmd->add_option("--lr", rate_args.cfg.train.step_size, "step size")
      ->capture_default_str();
  rate_cmd->add_option("--sampler", rate_sampler, "oracle or langevin")
      ->check(CLI::IsMember({"oracle", "langevin"}))
      ->capture_default_str();
  rate_cmd->add_option("--seed", rate_args.cfg.master_seed, "master seed")->required();
  rate_cmd->add_option("--jobs", rate_args.cfg.jobs, "worker threads (0 = cores)");
  rate_cmd->add_option("--grid-p", rate_args.cfg.points_per_dim_override,
                       "grid points per dimension");
  rate_cmd->add_flag("--pooled", rate_pooled, "regress pooled trials instead of averaged logs");
  rate_cmd->add_flag("--plot", rate_args.plot, "write an SVG plot");
  rate_cmd->add_option("--out", rate_args.out, "output directory")->capture_default_str();

  MemorizeArgs mem_args;
  bool mem_no_control = false;
  std::string mem_sampler = "oracle";
  auto* mem_cmd = exp_cmd->add_subcommand("memorize", "long-horizon memorization run");
  mem_cmd->add_option("--d", mem_args.cfg.d, "dimension")->capture_default_str();
  mem_cmd->add_option("--n", mem_args.cfg.n, "sample count")->capture_default_str();
  mem_cmd->add_option("--m", mem_args.cfg.m, "feature count")->capture_default_str();
  mem_cmd->add_option("--a-star", mem_args.cfg.a_star_value, "target coefficient value")
      ->capture_default_str();
  mem_cmd->add_option("--steps", mem_args.cfg.train.steps, "adam steps")->capture_default_str();
  mem_cmd->add_option("--lr", mem_args.cfg.train.step_size, "adam step size")
      ->capture_default_str();
  mem_cmd->add_option("--seed", mem_args.cfg.master_seed, "master seed")->required();
  mem_cmd->add_option("--snapshots", mem_args.cfg.snapshot_steps, "snapshot steps")
      ->delimiter(',');
  mem_cmd->add_option("--sampler", mem_sampler, "oracle or langevin")
      ->check(CLI::IsMember({"oracle", "langevin"}))
      ->capture_default_str();
  mem_cmd->add_option("--grid-p", mem_args.cfg.points_per_dim_override,
                      "grid points per dimension");
  mem_cmd->add_flag("--no-control", mem_no_control, "skip the population control run");
  mem_cmd->add_flag("--plot", mem_args.plot, "write an SVG plot");
  mem_cmd->add_option("--out", mem_args.out, "output directory")->capture_default_str();

  ApproxArgs approx_args;
  auto* approx_cmd = exp_cmd->add_subcommand("approx", "Monte-Carlo approximation rate");
  approx_cmd->add_option("--d", approx_args.cfg.d, "dimension")->capture_default_str();
  approx_cmd->add_option("--m-ref", approx_args.cfg.m_ref, "reference feature count")
      ->capture_default_str();
  approx_cmd->add_option("--a-value", approx_args.cfg.a_value, "reference coefficient value")
      ->capture_default_str();
  approx_cmd->add_option("--ms", approx_args.cfg.ms, "subset sizes")->delimiter(',');
  approx_cmd->add_option("--resamples", approx_args.cfg.resamples, "resamples per m")
      ->capture_default_str();
  approx_cmd->add_option("--seed", approx_args.cfg.master_seed, "master seed")->required();
  approx_cmd->add_option("--jobs", approx_args.cfg.jobs, "worker threads (0 = cores)");
  approx_cmd->add_option("--grid-p", approx_args.cfg.points_per_dim_override,
                         "grid points per dimension");
  approx_cmd->add_flag("--plot", approx_args.plot, "write an SVG plot");
  approx_cmd->add_option("--out", approx_args.out, "output directory")->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& s : args) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_args, args);
    if (*sample_cmd) return cmd_sample(sample_args, args);
    if (*eval_cmd) return cmd_eval(eval_args, args);
    if (*rate_cmd) {
      rate_args.cfg.pooled_regression = rate_pooled;
      rate_args.cfg.sampler =
          rate_sampler == "oracle" ? SamplerKind::oracle : SamplerKind::langevin;
      return cmd_experiment_rate(rate_args, args);
    }
    if (*mem_cmd) {
      mem_args.cfg.control_run = !mem_no_control;
      mem_args.cfg.sampler =
          mem_sampler == "oracle" ? SamplerKind::oracle : SamplerKind::langevin;
      return cmd_experiment_memorize(mem_args, args);
    }
    if (*approx_cmd) return cmd_experiment_approx(approx_args, args);
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args);
}

}  // namespace biaspot::cli
