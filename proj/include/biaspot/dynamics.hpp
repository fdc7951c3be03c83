#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "biaspot/objectives.hpp"

namespace biaspot {

struct MeasureFlowConfig {
  enum class DtPolicy { fixed, adaptive };
  double dt = 0.5;
  std::size_t steps = 1000;
  std::size_t record_every = 1;
  DtPolicy dt_policy = DtPolicy::adaptive;  // caps dt at 0.5 / max |vbar|
  std::vector<std::size_t> snapshot_steps;
};

// Centered kernel velocity of the measure dynamics dQ/dt = vbar(Q) Q:
//   v(x) = E_{(target - Q)(x')}[k(x, x')],  vbar = v - E_Q[v].
// Returned per grid cell; E_Q[vbar] = 0 up to rounding by construction.
std::vector<double> velocity_field(const GridDensity& q, const Target& target,
                                   const FeatureSet& features);

struct FlowRecord {
  std::size_t step = 0;
  double time = 0.0;      // cumulative flow time (adaptive dt makes it uneven)
  double mmd_sq = 0.0;    // ||Q_t - target||_k^2
  double min_mass = 0.0;
  double max_vbar = 0.0;
  double drift = 0.0;     // |sum mass - 1| before renormalization
};

struct FlowTrajectory {
  std::vector<FlowRecord> records;
  GridDensity final_density;
  std::map<std::size_t, GridDensity> snapshots;
  double total_time = 0.0;
  std::size_t rejected_steps = 0;    // fixed-dt steps redone with halved dt
  std::size_t renormalizations = 0;  // drift above 1e-12 absorbed
};

// Multiplicative Euler: mass_i <- mass_i (1 + dt vbar_i). Conserves total
// mass exactly up to float drift and keeps mass nonnegative whenever
// dt max|vbar| < 1, which the adaptive policy guarantees.
FlowTrajectory evolve_measure(const GridDensity& q0, const Target& target,
                              const FeatureSet& features, const MeasureFlowConfig& cfg);

struct EquivalenceReport {
  double max_deviation = 0.0;            // max over time and cells
  std::vector<double> per_step_deviation;
};

// Runs the coefficient gd flow and the direct potential-space Euler flow
// dV <- dt E_{Q_t - target}[k(x, .)] on matched time grids and compares the
// reconstructed potentials (each centered to P-mean zero).
EquivalenceReport potential_flow_equivalence_check(const Potential& init, const Target& target,
                                                   const Grid& grid, std::size_t steps,
                                                   double eta);

}  // namespace biaspot
