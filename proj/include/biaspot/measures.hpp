#pragma once

#include <functional>
#include <span>
#include <vector>

#include "biaspot/common.hpp"
#include "biaspot/grid.hpp"
#include "biaspot/model.hpp"

namespace biaspot {

using PointFn = std::function<double(std::span<const double>)>;

// Potential values at every grid node.
std::vector<double> values_on_grid(const Potential& pot, const Grid& grid);
std::vector<double> values_on_grid(const TwoLayerNet& net, const Grid& grid);

// mass_i = e^{-(V_i - min V)} / sum_j e^{-(V_j - min V)}
GridDensity density_from_values(const Grid& grid, std::span<const double> v);
GridDensity density_from_potential(const Potential& pot, const Grid& grid);
GridDensity density_from_potential(const TwoLayerNet& net, const Grid& grid);

// log E_P[e^{-V}] with P uniform on the grid, log-sum-exp stabilized
double log_partition_from_values(std::span<const double> v);
double log_partition(const Potential& pot, const Grid& grid);

// sum p_i log(p_i / q_i), 0 log 0 := 0; returns +inf when p charges a cell
// where q vanishes (legitimate late-memorization outcome, so not an error)
double kl_divergence(const GridDensity& p, const GridDensity& q);

double expectation_on_grid(const PointFn& f, const GridDensity& q);
double expectation_on_samples(const PointFn& f, const SampleSet& s);

// Mean embeddings E_mu[sigma_j], j = 1..m. MMD is computed through these:
// ||mu||_k^2 = (1/m) sum_j E_mu[sigma_j]^2, so grid cells and sample atoms
// combine exactly without snapping atoms to cells.
std::vector<double> mean_embedding(const GridDensity& q, const FeatureSet& features);
std::vector<double> mean_embedding(const SampleSet& s, const FeatureSet& features);
std::vector<double> mean_embedding(const SignedGridMeasure& mu, const FeatureSet& features);

double mmd_sq_from_embedding(std::span<const double> embedding);
double mmd_sq(const SignedGridMeasure& mu, const FeatureSet& features);
double mmd_sq(const GridDensity& a, const GridDensity& b, const FeatureSet& features);
double mmd_sq(const GridDensity& a, const SampleSet& b, const FeatureSet& features);
double mmd_sq(const SampleSet& a, const SampleSet& b, const FeatureSet& features);

struct LipschitzCheck {
  double gap;    // |log Z_1 - log Z_2|
  double bound;  // ||V_1 - V_2||_{Linf(P)} on the grid
};
LipschitzCheck log_partition_lipschitz_check(const Potential& v1, const Potential& v2,
                                             const Grid& grid);

// Feature values tabulated over a grid: phi[cell * m + j] = sigma_j(x_cell).
// Shared by the training loop, the objectives and the measure dynamics so the
// sigma evaluations happen once per (features, grid) pair.
struct FeatureGrid {
  Grid grid;
  std::size_t m = 0;
  std::vector<double> phi;

  static FeatureGrid build(const FeatureSet& features, const Grid& grid);

  // (1/m) Phi a
  std::vector<double> potential_values(std::span<const double> coeffs) const;
  // Phi^T mass, i.e. E_mass[sigma_j] for a mass vector over the cells
  std::vector<double> embedding(std::span<const double> mass) const;
};

// Same tabulation over sample atoms, rows are points.
struct FeatureAtoms {
  std::size_t m = 0;
  std::vector<double> phi;
  std::size_t n = 0;

  static FeatureAtoms build(const FeatureSet& features, const SampleSet& samples);

  std::vector<double> potential_values(std::span<const double> coeffs) const;
  std::vector<double> embedding() const;  // (1/n) Phi^T 1
};

}  // namespace biaspot
