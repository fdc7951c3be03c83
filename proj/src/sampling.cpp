#include "biaspot/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "biaspot/common.hpp"
#include "biaspot/rng.hpp"
#include "biaspot/threads.hpp"

namespace biaspot {

std::vector<double> grad_potential(const Potential& pot, std::span<const double> x) {
  const FeatureSet& fs = pot.features;
  if (static_cast<int>(x.size()) != fs.d) {
    throw std::invalid_argument("grad_potential: point dimension mismatch");
  }
  std::vector<double> g(fs.d, 0.0);
  for (std::size_t j = 0; j < fs.m; ++j) {
    double z = fs.preactivation(j, x);
    double s = activate_deriv(fs.activation, fs.beta, z) * pot.coeffs[j];
    if (s == 0.0) continue;
    const double* w = fs.weights.data() + j * (fs.d + 1);
    for (int k = 0; k < fs.d; ++k) g[k] += s * w[k];
  }
  double inv_m = 1.0 / static_cast<double>(fs.m);
  for (double& gk : g) gk *= inv_m;
  return g;
}

SampleSet sample_langevin(const Potential& pot, std::size_t n, const LangevinConfig& cfg) {
  return sample_langevin(pot, n, cfg, 1);
}

SampleSet sample_langevin(const Potential& pot, std::size_t n, const LangevinConfig& cfg,
                          std::size_t jobs) {
  if (n < 1) throw std::invalid_argument("sample_langevin: n must be >= 1");
  if (cfg.eta <= 0.0) throw std::invalid_argument("sample_langevin: eta must be > 0");
  if (cfg.burn_in < 1 || cfg.thinning < 1 || cfg.chains < 1) {
    throw std::invalid_argument("sample_langevin: burn_in, thinning, chains must be >= 1");
  }
  const int d = pot.features.d;
  const std::size_t chains = cfg.chains;
  const double step_noise = std::sqrt(2.0 * cfg.eta);

  // chain c emits output slots c, c + chains, c + 2 chains, ...
  std::vector<std::vector<double>> per_chain(chains);
  auto run_chain = [&](std::size_t c) {
    std::size_t quota = n / chains + (c < n % chains ? 1 : 0);
    auto& out = per_chain[c];
    out.reserve(quota * d);
    Rng rng(derive_seed(cfg.seed, 0x6c616e67ull, c));
    std::vector<double> x(d);
    for (int k = 0; k < d; ++k) x[k] = rng.uniform(-1.0, 1.0);
    std::size_t kept = 0;
    std::size_t step = 0;
    while (kept < quota) {
      std::vector<double> g = grad_potential(pot, x);
      for (int k = 0; k < d; ++k) {
        x[k] += -cfg.eta * g[k] + step_noise * rng.normal();
        if (!std::isfinite(x[k])) throw numeric_error("sample_langevin: non-finite state");
        x[k] = std::clamp(x[k], -1.0, 1.0);
      }
      ++step;
      if (step > cfg.burn_in && (step - cfg.burn_in) % cfg.thinning == 0) {
        out.insert(out.end(), x.begin(), x.end());
        ++kept;
      }
    }
  };
  run_indexed_tasks(chains, jobs, run_chain);

  SampleSet s;
  s.d = d;
  s.seed = cfg.seed;
  s.provenance = "langevin";
  s.points.resize(n * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = i % chains;
    std::size_t r = i / chains;
    for (int k = 0; k < d; ++k) s.points[i * d + k] = per_chain[c][r * d + k];
  }
  return s;
}

SampleSet sample_grid_oracle(const GridDensity& q, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_grid_oracle: n must be >= 1");
  const Grid& grid = q.grid;
  std::vector<double> cdf(q.mass.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < q.mass.size(); ++i) {
    acc += q.mass[i];
    cdf[i] = acc;
  }
  double total = acc;
  double half_cell = 1.0 / grid.points_per_dim;

  SampleSet s;
  s.d = grid.d;
  s.seed = seed;
  s.provenance = "grid-oracle";
  s.points.resize(n * static_cast<std::size_t>(grid.d));
  Rng rng(derive_seed(seed, 0x6f7261636cull));
  std::vector<double> center(grid.d);
  for (std::size_t i = 0; i < n; ++i) {
    double u = rng.uniform01() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t cell = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
    grid.node(cell, center);
    for (int k = 0; k < grid.d; ++k) {
      s.points[i * grid.d + k] = center[k] + rng.uniform(-half_cell, half_cell);
    }
  }
  return s;
}

}  // namespace biaspot
