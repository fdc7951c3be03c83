#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "biaspot/grid.hpp"
#include "biaspot/model.hpp"

namespace biaspot {

struct LangevinConfig {
  double eta = 1e-3;
  std::size_t burn_in = 5000;
  std::size_t thinning = 10;
  std::size_t chains = 8;
  std::uint64_t seed = 0;
};

// grad V, with the relu subgradient fixed to 0 at the kink
std::vector<double> grad_potential(const Potential& pot, std::span<const double> x);

// Projected Langevin Monte Carlo:
//   x <- clamp_{[-1,1]^d}(x - eta grad V(x) + sqrt(2 eta) xi)
// Chains own RNG streams derived from (seed, chain); kept states are
// interleaved round-robin by chain index, so output is schedule-independent.
SampleSet sample_langevin(const Potential& pot, std::size_t n, const LangevinConfig& cfg);
SampleSet sample_langevin(const Potential& pot, std::size_t n, const LangevinConfig& cfg,
                          std::size_t jobs);

// Exact sampler for a grid density: categorical over cells, then uniform
// inside the chosen cell. Decouples experiments from MCMC error.
SampleSet sample_grid_oracle(const GridDensity& q, std::size_t n, std::uint64_t seed);

}  // namespace biaspot
