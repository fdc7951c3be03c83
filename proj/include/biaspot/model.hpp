#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "biaspot/activation.hpp"

namespace biaspot {

// m random features (w_j, b_j) drawn uniformly from the l1 unit sphere in
// R^{d+1}. The set is a deterministic function of (d, m, seed) and defines the
// model's kernel; only coefficients on top of it are ever trained.
struct FeatureSet {
  int d = 0;
  std::size_t m = 0;
  Activation activation = Activation::relu;
  double beta = kDefaultSmoothing;  // smoothed-relu sharpness, unused for relu
  std::uint64_t seed = 0;
  std::vector<double> weights;  // m rows of (w_0..w_{d-1}, b), row-major

  std::span<const double> row(std::size_t j) const {
    return {weights.data() + j * (d + 1), static_cast<std::size_t>(d + 1)};
  }

  // w_j . x~  with x~ = (x, 1)
  double preactivation(std::size_t j, std::span<const double> x) const {
    const double* r = weights.data() + j * (d + 1);
    double z = r[d];
    for (int k = 0; k < d; ++k) z += r[k] * x[k];
    return z;
  }

  double feature_value(std::size_t j, std::span<const double> x) const {
    return activate(activation, beta, preactivation(j, x));
  }
};

FeatureSet sample_features(int d, std::size_t m, std::uint64_t seed,
                           Activation activation = Activation::relu,
                           double beta = kDefaultSmoothing);

// V(x) = (1/m) sum_j a_j sigma(w_j . x~)
struct Potential {
  FeatureSet features;
  std::vector<double> coeffs;
};

Potential zero_potential(FeatureSet features);
Potential constant_coeff_potential(FeatureSet features, double value);

double eval_potential(const Potential& pot, std::span<const double> x);

// empirical L2(rho0) norm of the coefficient function: sqrt((1/m) sum a_j^2)
double rkhs_norm(std::span<const double> coeffs);
double rkhs_norm(const Potential& pot);

// Monte-Carlo kernel k(x, x') = (1/m) sum_j sigma(w_j . x~) sigma(w_j . x'~)
double empirical_kernel(const FeatureSet& features, std::span<const double> x,
                        std::span<const double> y);

// Finite scaled 2-layer network: all of (a_j, w_j, b_j) trainable.
// Restricted to smoothed-relu so the particle velocity field is Lipschitz.
struct TwoLayerNet {
  int d = 0;
  std::size_t m = 0;
  double beta = kDefaultSmoothing;
  std::vector<double> particles;  // m rows of (a, w_0..w_{d-1}, b), row-major

  std::span<const double> particle(std::size_t j) const {
    return {particles.data() + j * (d + 2), static_cast<std::size_t>(d + 2)};
  }
  std::span<double> particle(std::size_t j) {
    return {particles.data() + j * (d + 2), static_cast<std::size_t>(d + 2)};
  }

  double eval(std::span<const double> x) const;
};

// a = 0, (w, b) uniform on the l1 sphere
TwoLayerNet init_two_layer(int d, std::size_t m, std::uint64_t seed,
                           double beta = kDefaultSmoothing);

}  // namespace biaspot
