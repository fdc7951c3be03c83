#include "biaspot/model.hpp"

#include <cmath>
#include <stdexcept>

#include "biaspot/rng.hpp"

namespace biaspot {

namespace {

// Exact uniform draw from the l1 unit sphere in R^k: i.i.d. exponentials
// normalized to the simplex, then independent signs.
void draw_l1_sphere(Rng& rng, double* out, int k) {
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    out[i] = rng.exponential();
    total += out[i];
  }
  for (int i = 0; i < k; ++i) out[i] = rng.sign() * out[i] / total;
}

}  // namespace

FeatureSet sample_features(int d, std::size_t m, std::uint64_t seed,
                           Activation activation, double beta) {
  if (d < 1) throw std::invalid_argument("sample_features: d must be >= 1");
  if (m < 1) throw std::invalid_argument("sample_features: m must be >= 1");
  FeatureSet fs;
  fs.d = d;
  fs.m = m;
  fs.activation = activation;
  fs.beta = beta;
  fs.seed = seed;
  fs.weights.resize(m * static_cast<std::size_t>(d + 1));
  Rng rng(derive_seed(seed, 0x66656174ull));  // feature stream
  for (std::size_t j = 0; j < m; ++j) {
    draw_l1_sphere(rng, fs.weights.data() + j * (d + 1), d + 1);
  }
  return fs;
}

Potential zero_potential(FeatureSet features) {
  Potential pot;
  pot.coeffs.assign(features.m, 0.0);
  pot.features = std::move(features);
  return pot;
}

Potential constant_coeff_potential(FeatureSet features, double value) {
  Potential pot;
  pot.coeffs.assign(features.m, value);
  pot.features = std::move(features);
  return pot;
}

double eval_potential(const Potential& pot, std::span<const double> x) {
  const FeatureSet& fs = pot.features;
  if (static_cast<int>(x.size()) != fs.d) {
    throw std::invalid_argument("eval_potential: point dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < fs.m; ++j) {
    acc += pot.coeffs[j] * fs.feature_value(j, x);
  }
  return acc / static_cast<double>(fs.m);
}

double rkhs_norm(std::span<const double> coeffs) {
  double acc = 0.0;
  for (double a : coeffs) acc += a * a;
  return coeffs.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(coeffs.size()));
}

double rkhs_norm(const Potential& pot) { return rkhs_norm(pot.coeffs); }

double empirical_kernel(const FeatureSet& features, std::span<const double> x,
                        std::span<const double> y) {
  if (static_cast<int>(x.size()) != features.d || static_cast<int>(y.size()) != features.d) {
    throw std::invalid_argument("empirical_kernel: point dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < features.m; ++j) {
    acc += features.feature_value(j, x) * features.feature_value(j, y);
  }
  return acc / static_cast<double>(features.m);
}

double TwoLayerNet::eval(std::span<const double> x) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double* p = particles.data() + j * (d + 2);
    double z = p[d + 1];
    for (int k = 0; k < d; ++k) z += p[k + 1] * x[k];
    acc += p[0] * activate(Activation::smoothed_relu, beta, z);
  }
  return acc / static_cast<double>(m);
}

TwoLayerNet init_two_layer(int d, std::size_t m, std::uint64_t seed, double beta) {
  if (d < 1 || m < 1) throw std::invalid_argument("init_two_layer: d, m must be >= 1");
  TwoLayerNet net;
  net.d = d;
  net.m = m;
  net.beta = beta;
  net.particles.assign(m * static_cast<std::size_t>(d + 2), 0.0);
  Rng rng(derive_seed(seed, 0x326e6eull));
  for (std::size_t j = 0; j < m; ++j) {
    double* p = net.particles.data() + j * (d + 2);
    p[0] = 0.0;
    draw_l1_sphere(rng, p + 1, d + 1);
  }
  return net;
}

}  // namespace biaspot
