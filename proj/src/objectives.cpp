#include "biaspot/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "biaspot/common.hpp"

namespace biaspot {

Target Target::population(GridDensity q) {
  Target t;
  t.kind = Kind::population;
  t.density = std::move(q);
  return t;
}

Target Target::empirical(SampleSet s) {
  Target t;
  t.kind = Kind::empirical;
  t.samples = std::move(s);
  return t;
}

namespace detail {

ObjectiveWorkspace ObjectiveWorkspace::build(const FeatureSet& features, const Grid& grid,
                                             const Target& target) {
  if (target.dim() != features.d || grid.d != features.d) {
    throw std::invalid_argument("ObjectiveWorkspace: dimension mismatch");
  }
  ObjectiveWorkspace ws;
  ws.fg = FeatureGrid::build(features, grid);
  ws.kind = target.kind;
  if (target.kind == Target::Kind::population) {
    if (target.density.grid.points_per_dim != grid.points_per_dim) {
      throw std::invalid_argument("ObjectiveWorkspace: population target on a different grid");
    }
    ws.target_mass = target.density.mass;
    ws.target_embedding = ws.fg.embedding(ws.target_mass);
  } else {
    ws.atoms = FeatureAtoms::build(features, target.samples);
    ws.target_embedding = ws.atoms.embedding();
  }
  return ws;
}

double ObjectiveWorkspace::target_potential_mean(std::span<const double> coeffs,
                                                 std::span<const double> grid_values) const {
  if (kind == Target::Kind::population) {
    double acc = 0.0;
    for (std::size_t i = 0; i < target_mass.size(); ++i) acc += target_mass[i] * grid_values[i];
    return acc;
  }
  std::vector<double> v = atoms.potential_values(coeffs);
  double acc = 0.0;
  for (double vk : v) acc += vk;
  return acc / static_cast<double>(v.size());
}

double loss_backward_ws(const ObjectiveWorkspace& ws, std::span<const double> coeffs,
                        std::span<const double> grid_values, const GridDensity&) {
  return ws.target_potential_mean(coeffs, grid_values) + log_partition_from_values(grid_values);
}

std::vector<double> grad_backward_ws(const ObjectiveWorkspace& ws, const GridDensity& q,
                                     std::span<const double> target_embedding_override) {
  std::vector<double> g = ws.fg.embedding(q.mass);
  std::span<const double> te = target_embedding_override.empty()
                                   ? std::span<const double>(ws.target_embedding)
                                   : target_embedding_override;
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = te[j] - g[j];
  return g;
}

}  // namespace detail

double loss_backward(const Potential& pot, const Target& target, const Grid& grid) {
  auto ws = detail::ObjectiveWorkspace::build(pot.features, grid, target);
  std::vector<double> v = ws.fg.potential_values(pot.coeffs);
  return detail::loss_backward_ws(ws, pot.coeffs, v, GridDensity{});
}

GradientVector grad_backward(const Potential& pot, const Target& target, const Grid& grid) {
  auto ws = detail::ObjectiveWorkspace::build(pot.features, grid, target);
  std::vector<double> v = ws.fg.potential_values(pot.coeffs);
  GridDensity q = density_from_values(grid, v);
  return {detail::grad_backward_ws(ws, q), false};
}

namespace {

// Self-normalized e^V weights over the target support, max-subtracted.
// Returns the weights and flags a degenerate effective sample size.
std::pair<std::vector<double>, bool> exp_reweight(std::span<const double> values,
                                                  std::span<const double> base_mass) {
  double vmax = -std::numeric_limits<double>::infinity();
  for (double v : values) vmax = std::max(vmax, v);
  std::vector<double> w(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double base = base_mass.empty() ? 1.0 : base_mass[i];
    w[i] = base * std::exp(values[i] - vmax);
    total += w[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw numeric_error("exp_reweight: degenerate normalization");
  }
  double sum_sq = 0.0;
  for (double& wi : w) {
    wi /= total;
    sum_sq += wi * wi;
  }
  bool degenerate = (1.0 / sum_sq) < 2.0;
  return {std::move(w), degenerate};
}

}  // namespace

double loss_forward(const Potential& pot, const Target& target, const Grid& grid) {
  auto ws = detail::ObjectiveWorkspace::build(pot.features, grid, target);
  std::vector<double> v = ws.fg.potential_values(pot.coeffs);
  double p_mean = 0.0;
  for (double vi : v) p_mean += vi;
  p_mean /= static_cast<double>(v.size());

  // log E_target[e^V], stabilized
  double vmax = -std::numeric_limits<double>::infinity();
  double log_mean;
  if (target.kind == Target::Kind::population) {
    for (double vi : v) vmax = std::max(vmax, vi);
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += ws.target_mass[i] * std::exp(v[i] - vmax);
    log_mean = vmax + std::log(acc);
  } else {
    std::vector<double> va = ws.atoms.potential_values(pot.coeffs);
    for (double vk : va) vmax = std::max(vmax, vk);
    double acc = 0.0;
    for (double vk : va) acc += std::exp(vk - vmax);
    log_mean = vmax + std::log(acc / static_cast<double>(va.size()));
  }
  return -p_mean + log_mean;
}

GradientVector grad_forward(const Potential& pot, const Target& target, const Grid& grid) {
  auto ws = detail::ObjectiveWorkspace::build(pot.features, grid, target);
  std::vector<double> v = ws.fg.potential_values(pot.coeffs);

  GradientVector out;
  bool degenerate = false;
  std::vector<double> pstar_embedding;
  if (target.kind == Target::Kind::population) {
    auto [w, degen] = exp_reweight(v, ws.target_mass);
    degenerate = degen;
    pstar_embedding = ws.fg.embedding(w);
  } else {
    std::vector<double> va = ws.atoms.potential_values(pot.coeffs);
    auto [w, degen] = exp_reweight(va, {});
    degenerate = degen;
    pstar_embedding.assign(ws.fg.m, 0.0);
    for (std::size_t k = 0; k < ws.atoms.n; ++k) {
      const double* row = ws.atoms.phi.data() + k * ws.atoms.m;
      for (std::size_t j = 0; j < ws.atoms.m; ++j) pstar_embedding[j] += w[k] * row[j];
    }
  }

  // E_P[sigma_j], P uniform on the grid
  std::size_t cells = grid.cell_count();
  std::vector<double> g(ws.fg.m, 0.0);
  for (std::size_t i = 0; i < cells; ++i) {
    const double* row = ws.fg.phi.data() + i * ws.fg.m;
    for (std::size_t j = 0; j < ws.fg.m; ++j) g[j] += row[j];
  }
  double inv_cells = 1.0 / static_cast<double>(cells);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = pstar_embedding[j] - g[j] * inv_cells;
  out.g = std::move(g);
  out.degenerate_weights = degenerate;
  return out;
}

namespace {

struct TwoLayerTables {
  // sigma and a * sigma' at every node, plus target-side expectations
  std::vector<double> sigma;        // cells x m
  std::vector<double> deriv;        // cells x m (sigma')
};

TwoLayerTables tabulate_two_layer(const TwoLayerNet& net, const Grid& grid) {
  TwoLayerTables t;
  std::size_t cells = grid.cell_count();
  t.sigma.resize(cells * net.m);
  t.deriv.resize(cells * net.m);
  std::vector<double> x(static_cast<std::size_t>(grid.d));
  for (std::size_t i = 0; i < cells; ++i) {
    grid.node(i, x);
    for (std::size_t j = 0; j < net.m; ++j) {
      const double* p = net.particles.data() + j * (net.d + 2);
      double z = p[net.d + 1];
      for (int k = 0; k < net.d; ++k) z += p[k + 1] * x[k];
      t.sigma[i * net.m + j] = activate(Activation::smoothed_relu, net.beta, z);
      t.deriv[i * net.m + j] = activate_deriv(Activation::smoothed_relu, net.beta, z);
    }
  }
  return t;
}

}  // namespace

double loss_backward(const TwoLayerNet& net, const Target& target, const Grid& grid) {
  if (target.dim() != net.d || grid.d != net.d) {
    throw std::invalid_argument("loss_backward: dimension mismatch");
  }
  std::vector<double> v = values_on_grid(net, grid);
  double e_target;
  if (target.kind == Target::Kind::population) {
    e_target = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) e_target += target.density.mass[i] * v[i];
  } else {
    e_target = 0.0;
    for (std::size_t k = 0; k < target.samples.size(); ++k) {
      e_target += net.eval(target.samples.point(k));
    }
    e_target /= static_cast<double>(target.samples.size());
  }
  return e_target + log_partition_from_values(v);
}

std::vector<double> two_layer_gradient(const TwoLayerNet& net, const Target& target,
                                       const Grid& grid) {
  if (target.dim() != net.d || grid.d != net.d) {
    throw std::invalid_argument("two_layer_gradient: dimension mismatch");
  }
  const int d = net.d;
  const std::size_t m = net.m;
  std::size_t cells = grid.cell_count();

  // E_{target - Q}[ sigma_j ; a_j sigma'_j x ; a_j sigma'_j ] per particle.
  // Accumulate the signed expectation weights cell by cell (grid part), then
  // add the atom part for empirical targets.
  std::vector<double> g(m * static_cast<std::size_t>(d + 2), 0.0);

  TwoLayerTables t = tabulate_two_layer(net, grid);
  std::vector<double> v(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double* srow = t.sigma.data() + i * m;
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double* p = net.particles.data() + j * (d + 2);
      acc += p[0] * srow[j];
    }
    v[i] = acc / static_cast<double>(m);
  }
  GridDensity q = density_from_values(grid, v);

  std::vector<double> x(static_cast<std::size_t>(d));
  auto accumulate = [&](std::span<const double> pt, const double* srow, const double* drow,
                        double weight) {
    for (std::size_t j = 0; j < m; ++j) {
      const double* p = net.particles.data() + j * (d + 2);
      double* gj = g.data() + j * (d + 2);
      double s = srow ? srow[j] : 0.0;
      double dv = drow ? drow[j] : 0.0;
      gj[0] += weight * s;
      double adv = p[0] * dv;
      for (int k = 0; k < d; ++k) gj[k + 1] += weight * adv * pt[k];
      gj[d + 1] += weight * adv;
    }
  };

  // -Q part
  for (std::size_t i = 0; i < cells; ++i) {
    grid.node(i, x);
    accumulate(x, t.sigma.data() + i * m, t.deriv.data() + i * m, -q.mass[i]);
  }
  // +target part
  if (target.kind == Target::Kind::population) {
    for (std::size_t i = 0; i < cells; ++i) {
      grid.node(i, x);
      accumulate(x, t.sigma.data() + i * m, t.deriv.data() + i * m, target.density.mass[i]);
    }
  } else {
    std::vector<double> srow(m), drow(m);
    double w = 1.0 / static_cast<double>(target.samples.size());
    for (std::size_t k = 0; k < target.samples.size(); ++k) {
      auto pt = target.samples.point(k);
      for (std::size_t j = 0; j < m; ++j) {
        const double* p = net.particles.data() + j * (d + 2);
        double z = p[d + 1];
        for (int kk = 0; kk < d; ++kk) z += p[kk + 1] * pt[kk];
        srow[j] = activate(Activation::smoothed_relu, net.beta, z);
        drow[j] = activate_deriv(Activation::smoothed_relu, net.beta, z);
      }
      accumulate(pt, srow.data(), drow.data(), w);
    }
  }
  return g;
}

}  // namespace biaspot
