#include "biaspot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "biaspot/common.hpp"

namespace biaspot {

namespace {

std::vector<double> node_buffer(const Grid& grid) {
  return std::vector<double>(static_cast<std::size_t>(grid.d), 0.0);
}

void check_dims(int a, int b, const char* who) {
  if (a != b) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

}  // namespace

std::vector<double> values_on_grid(const Potential& pot, const Grid& grid) {
  check_dims(pot.features.d, grid.d, "values_on_grid");
  std::vector<double> v(grid.cell_count());
  std::vector<double> x = node_buffer(grid);
  for (std::size_t i = 0; i < v.size(); ++i) {
    grid.node(i, x);
    v[i] = eval_potential(pot, x);
  }
  return v;
}

std::vector<double> values_on_grid(const TwoLayerNet& net, const Grid& grid) {
  check_dims(net.d, grid.d, "values_on_grid");
  std::vector<double> v(grid.cell_count());
  std::vector<double> x = node_buffer(grid);
  for (std::size_t i = 0; i < v.size(); ++i) {
    grid.node(i, x);
    v[i] = net.eval(x);
  }
  return v;
}

GridDensity density_from_values(const Grid& grid, std::span<const double> v) {
  GridDensity q;
  q.grid = grid;
  q.mass.resize(v.size());
  double vmin = std::numeric_limits<double>::infinity();
  for (double vi : v) {
    if (!std::isfinite(vi)) throw numeric_error("density_from_values: non-finite potential");
    vmin = std::min(vmin, vi);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    q.mass[i] = std::exp(-(v[i] - vmin));
    total += q.mass[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw numeric_error("density_from_values: partition sum not positive finite");
  }
  for (double& mi : q.mass) mi /= total;
  return q;
}

GridDensity density_from_potential(const Potential& pot, const Grid& grid) {
  return density_from_values(grid, values_on_grid(pot, grid));
}

GridDensity density_from_potential(const TwoLayerNet& net, const Grid& grid) {
  return density_from_values(grid, values_on_grid(net, grid));
}

double log_partition_from_values(std::span<const double> v) {
  // log (1/N) sum e^{-v_i}
  double vmin = std::numeric_limits<double>::infinity();
  for (double vi : v) {
    if (!std::isfinite(vi)) throw numeric_error("log_partition: non-finite potential");
    vmin = std::min(vmin, vi);
  }
  double acc = 0.0;
  for (double vi : v) acc += std::exp(-(vi - vmin));
  double out = -vmin + std::log(acc / static_cast<double>(v.size()));
  if (!std::isfinite(out)) throw numeric_error("log_partition: overflow");
  return out;
}

double log_partition(const Potential& pot, const Grid& grid) {
  return log_partition_from_values(values_on_grid(pot, grid));
}

double kl_divergence(const GridDensity& p, const GridDensity& q) {
  if (p.grid.d != q.grid.d || p.grid.points_per_dim != q.grid.points_per_dim) {
    throw std::invalid_argument("kl_divergence: grids differ");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.mass.size(); ++i) {
    double pi = p.mass[i];
    if (pi <= 0.0) continue;
    double qi = q.mass[i];
    if (qi <= 0.0) return std::numeric_limits<double>::infinity();
    acc += pi * std::log(pi / qi);
  }
  return acc;
}

double expectation_on_grid(const PointFn& f, const GridDensity& q) {
  std::vector<double> x = node_buffer(q.grid);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.mass.size(); ++i) {
    q.grid.node(i, x);
    double fi = f(x);
    if (!std::isfinite(fi)) throw numeric_error("expectation_on_grid: non-finite integrand");
    acc += q.mass[i] * fi;
  }
  return acc;
}

double expectation_on_samples(const PointFn& f, const SampleSet& s) {
  if (s.size() == 0) throw std::invalid_argument("expectation_on_samples: empty sample set");
  double acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) acc += f(s.point(k));
  return acc / static_cast<double>(s.size());
}

std::vector<double> mean_embedding(const GridDensity& q, const FeatureSet& features) {
  check_dims(q.grid.d, features.d, "mean_embedding");
  std::vector<double> e(features.m, 0.0);
  std::vector<double> x = node_buffer(q.grid);
  for (std::size_t i = 0; i < q.mass.size(); ++i) {
    double mi = q.mass[i];
    if (mi == 0.0) continue;
    q.grid.node(i, x);
    for (std::size_t j = 0; j < features.m; ++j) e[j] += mi * features.feature_value(j, x);
  }
  return e;
}

std::vector<double> mean_embedding(const SampleSet& s, const FeatureSet& features) {
  check_dims(s.d, features.d, "mean_embedding");
  std::vector<double> e(features.m, 0.0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    auto x = s.point(k);
    for (std::size_t j = 0; j < features.m; ++j) e[j] += features.feature_value(j, x);
  }
  double inv = 1.0 / static_cast<double>(s.size());
  for (double& ej : e) ej *= inv;
  return e;
}

std::vector<double> mean_embedding(const SignedGridMeasure& mu, const FeatureSet& features) {
  check_dims(mu.grid.d, features.d, "mean_embedding");
  std::vector<double> e(features.m, 0.0);
  std::vector<double> x = node_buffer(mu.grid);
  for (std::size_t i = 0; i < mu.mass.size(); ++i) {
    double mi = mu.mass[i];
    if (mi == 0.0) continue;
    mu.grid.node(i, x);
    for (std::size_t j = 0; j < features.m; ++j) e[j] += mi * features.feature_value(j, x);
  }
  return e;
}

double mmd_sq_from_embedding(std::span<const double> embedding) {
  double acc = 0.0;
  for (double ej : embedding) acc += ej * ej;
  return embedding.empty() ? 0.0 : acc / static_cast<double>(embedding.size());
}

namespace {

double mmd_sq_diff(std::vector<double> ea, const std::vector<double>& eb) {
  for (std::size_t j = 0; j < ea.size(); ++j) ea[j] -= eb[j];
  return mmd_sq_from_embedding(ea);
}

}  // namespace

double mmd_sq(const SignedGridMeasure& mu, const FeatureSet& features) {
  return mmd_sq_from_embedding(mean_embedding(mu, features));
}

double mmd_sq(const GridDensity& a, const GridDensity& b, const FeatureSet& features) {
  return mmd_sq_diff(mean_embedding(a, features), mean_embedding(b, features));
}

double mmd_sq(const GridDensity& a, const SampleSet& b, const FeatureSet& features) {
  return mmd_sq_diff(mean_embedding(a, features), mean_embedding(b, features));
}

double mmd_sq(const SampleSet& a, const SampleSet& b, const FeatureSet& features) {
  return mmd_sq_diff(mean_embedding(a, features), mean_embedding(b, features));
}

LipschitzCheck log_partition_lipschitz_check(const Potential& v1, const Potential& v2,
                                             const Grid& grid) {
  check_dims(v1.features.d, v2.features.d, "log_partition_lipschitz_check");
  std::vector<double> a = values_on_grid(v1, grid);
  std::vector<double> b = values_on_grid(v2, grid);
  double gap = std::abs(log_partition_from_values(a) - log_partition_from_values(b));
  double bound = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) bound = std::max(bound, std::abs(a[i] - b[i]));
  return {gap, bound};
}

FeatureGrid FeatureGrid::build(const FeatureSet& features, const Grid& grid) {
  check_dims(features.d, grid.d, "FeatureGrid::build");
  FeatureGrid fg;
  fg.grid = grid;
  fg.m = features.m;
  std::size_t cells = grid.cell_count();
  fg.phi.resize(cells * features.m);
  std::vector<double> x(static_cast<std::size_t>(grid.d));
  for (std::size_t i = 0; i < cells; ++i) {
    grid.node(i, x);
    double* row = fg.phi.data() + i * features.m;
    for (std::size_t j = 0; j < features.m; ++j) row[j] = features.feature_value(j, x);
  }
  return fg;
}

std::vector<double> FeatureGrid::potential_values(std::span<const double> coeffs) const {
  std::size_t cells = grid.cell_count();
  std::vector<double> v(cells);
  double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < cells; ++i) {
    const double* row = phi.data() + i * m;
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += row[j] * coeffs[j];
    v[i] = acc * inv_m;
  }
  return v;
}

std::vector<double> FeatureGrid::embedding(std::span<const double> mass) const {
  std::size_t cells = grid.cell_count();
  std::vector<double> e(m, 0.0);
  for (std::size_t i = 0; i < cells; ++i) {
    double mi = mass[i];
    if (mi == 0.0) continue;
    const double* row = phi.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) e[j] += mi * row[j];
  }
  return e;
}

FeatureAtoms FeatureAtoms::build(const FeatureSet& features, const SampleSet& samples) {
  check_dims(features.d, samples.d, "FeatureAtoms::build");
  FeatureAtoms fa;
  fa.m = features.m;
  fa.n = samples.size();
  fa.phi.resize(fa.n * fa.m);
  for (std::size_t k = 0; k < fa.n; ++k) {
    auto x = samples.point(k);
    double* row = fa.phi.data() + k * fa.m;
    for (std::size_t j = 0; j < fa.m; ++j) row[j] = features.feature_value(j, x);
  }
  return fa;
}

std::vector<double> FeatureAtoms::potential_values(std::span<const double> coeffs) const {
  std::vector<double> v(n);
  double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) {
    const double* row = phi.data() + k * m;
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += row[j] * coeffs[j];
    v[k] = acc * inv_m;
  }
  return v;
}

std::vector<double> FeatureAtoms::embedding() const {
  std::vector<double> e(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double* row = phi.data() + k * m;
    for (std::size_t j = 0; j < m; ++j) e[j] += row[j];
  }
  double inv = n == 0 ? 0.0 : 1.0 / static_cast<double>(n);
  for (double& ej : e) ej *= inv;
  return e;
}

}  // namespace biaspot
