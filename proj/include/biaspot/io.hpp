#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "biaspot/dynamics.hpp"
#include "biaspot/experiments.hpp"

namespace biaspot::io {

// shortest round-trip decimal form (17 significant digits when needed)
std::string format_double(double v);

std::string potential_to_json(const Potential& pot);
Potential potential_from_json(const std::string& text);
void save_potential(const Potential& pot, const std::filesystem::path& path);
Potential load_potential(const std::filesystem::path& path);

// CSV "x0,...,x{d-1}"
void save_samples(const SampleSet& s, const std::filesystem::path& path);
SampleSet load_samples(const std::filesystem::path& path);

// CSV "cell_index,x0,...,x{d-1},mass"
void save_density(const GridDensity& q, const std::filesystem::path& path);
GridDensity load_density(const std::filesystem::path& path);

// CSV "step,train_loss,test_kl,rkhs_norm,status" (test_kl blank when absent)
void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);

// CSV "step,mmd_sq,min_mass,max_vbar"
void save_flow(const FlowTrajectory& flow, const std::filesystem::path& path);

void save_rate_rows(const std::vector<RateResultRow>& rows, const std::filesystem::path& path);
void save_rate_regressions(const std::vector<RateRegression>& regs,
                           const std::filesystem::path& path);
// CSV "step,test_kl,rkhs_norm"
void save_memorize_curve(const Trajectory& traj, const std::filesystem::path& path);
void save_approx_rows(const std::vector<ApproximationRow>& rows,
                      const std::filesystem::path& path);

std::uint64_t fnv1a64_file(const std::filesystem::path& path);

// One manifest per CLI invocation: command line, resolved config, seed,
// version, timestamps and a digest of every emitted file.
struct Manifest {
  std::string command_line;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t master_seed = 0;
  std::string code_version;
  std::string started_at;
  std::string finished_at;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> results;  // "metric=value" lines from eval
};

void write_manifest(Manifest m, const std::filesystem::path& path);
std::string manifest_timestamp();

struct PlotSeries {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};

// Minimal SVG line plot; log-log when requested. Axis labels only, no styling
// promises.
void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<PlotSeries>& series, bool loglog);

}  // namespace biaspot::io
