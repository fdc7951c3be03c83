#pragma once

#include <cmath>
#include <string>

namespace biaspot {

// relu: sigma(z) = max(z, 0), sigma'(0) := 0.
// smoothed_relu: softplus mollification sigma_beta(z) = log(1 + e^{beta z}) / beta,
// whose derivative is the logistic function and is Lipschitz; required by the
// two-layer particle mode.
enum class Activation { relu, smoothed_relu };

inline constexpr double kDefaultSmoothing = 20.0;

inline double activate(Activation act, double beta, double z) {
  if (act == Activation::relu) return z > 0.0 ? z : 0.0;
  // stable softplus
  if (z > 0.0) return z + std::log1p(std::exp(-beta * z)) / beta;
  return std::log1p(std::exp(beta * z)) / beta;
}

inline double activate_deriv(Activation act, double beta, double z) {
  if (act == Activation::relu) return z > 0.0 ? 1.0 : 0.0;
  return 1.0 / (1.0 + std::exp(-beta * z));
}

inline std::string to_string(Activation act) {
  return act == Activation::relu ? "relu" : "smoothed-relu";
}

}  // namespace biaspot
