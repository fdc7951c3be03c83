#pragma once

#include <optional>
#include <span>
#include <vector>

#include "biaspot/measures.hpp"

namespace biaspot {

// What the model is fitted against: either a grid density (population) or a
// finite sample set (empirical). The optional reference coefficients carry
// a_* for diagnostics such as Prop.-style bound checks.
struct Target {
  enum class Kind { population, empirical };
  Kind kind = Kind::population;
  GridDensity density;   // valid when population
  SampleSet samples;     // valid when empirical
  std::optional<std::vector<double>> reference_coeffs;

  static Target population(GridDensity q);
  static Target empirical(SampleSet s);
  int dim() const { return kind == Kind::population ? density.grid.d : samples.d; }
};

// Functional (L2(rho0)) gradient: g_j = E_target[sigma_j] - E_Q[sigma_j].
// This equals m times the per-coordinate partial of the loss, so trainers
// apply the paper-scale learning rate directly: a <- a - eta * g.
struct GradientVector {
  std::vector<double> g;
  bool degenerate_weights = false;  // forward objective: reweighting ESS < 2
};

// L^-(V) = E_target[V] + log E_P[e^{-V}]
double loss_backward(const Potential& pot, const Target& target, const Grid& grid);
GradientVector grad_backward(const Potential& pot, const Target& target, const Grid& grid);

// L^+(V) = -E_P[V] + log E_target[e^V]
double loss_forward(const Potential& pot, const Target& target, const Grid& grid);
GradientVector grad_forward(const Potential& pot, const Target& target, const Grid& grid);

// Two-layer versions (used by the particle mode and its derivative checks).
double loss_backward(const TwoLayerNet& net, const Target& target, const Grid& grid);
// Per particle (a_j, w_j, b_j): E_{target-Q}[sigma_j; a_j sigma'_j x; a_j sigma'_j],
// laid out like TwoLayerNet::particles. Equals m times the loss partials.
std::vector<double> two_layer_gradient(const TwoLayerNet& net, const Target& target,
                                       const Grid& grid);

namespace detail {

// Precomputed pieces for repeated loss/grad evaluation with fixed
// (features, grid, target); the training loop lives on this.
struct ObjectiveWorkspace {
  FeatureGrid fg;
  Target::Kind kind;
  std::vector<double> target_embedding;  // E_target[sigma_j]
  std::vector<double> target_mass;       // population only
  FeatureAtoms atoms;                    // empirical only

  static ObjectiveWorkspace build(const FeatureSet& features, const Grid& grid,
                                  const Target& target);

  // E_target[V] for the potential with the given grid values / coefficients
  double target_potential_mean(std::span<const double> coeffs,
                               std::span<const double> grid_values) const;
};

double loss_backward_ws(const ObjectiveWorkspace& ws, std::span<const double> coeffs,
                        std::span<const double> grid_values, const GridDensity& q);

// g = target_embedding - Phi^T q; optionally against a minibatch embedding
std::vector<double> grad_backward_ws(const ObjectiveWorkspace& ws, const GridDensity& q,
                                     std::span<const double> target_embedding_override = {});

}  // namespace detail

}  // namespace biaspot
