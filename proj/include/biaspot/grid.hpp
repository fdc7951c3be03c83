#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace biaspot {

// Uniform tensor grid of cell centers on [-1,1]^d, midpoint quadrature.
// Cell index runs with axis 0 fastest: idx = i0 + p*(i1 + p*(i2 + ...)).
struct Grid {
  int d = 1;
  int points_per_dim = 0;

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (int k = 0; k < d; ++k) n *= static_cast<std::size_t>(points_per_dim);
    return n;
  }
  double cell_volume() const {
    double v = 1.0;
    for (int k = 0; k < d; ++k) v *= 2.0 / points_per_dim;
    return v;
  }
  double axis_node(int i) const {
    return -1.0 + (2.0 * i + 1.0) / points_per_dim;
  }
  void node(std::size_t cell, std::span<double> out) const {
    for (int k = 0; k < d; ++k) {
      out[k] = axis_node(static_cast<int>(cell % points_per_dim));
      cell /= points_per_dim;
    }
  }
};

// Grid KL evaluation limits usable resolution in higher dimension.
int default_points_per_dim(int d);
Grid make_grid(int d);
Grid make_grid(int d, int points_per_dim);

// Probability mass vector over the cells of a Grid.
struct GridDensity {
  Grid grid;
  std::vector<double> mass;
};

GridDensity uniform_density(const Grid& grid);

// Unconstrained mass vector (finite signed measure on the grid).
struct SignedGridMeasure {
  Grid grid;
  std::vector<double> mass;
};

// n points in [-1,1]^d, the empirical distribution.
struct SampleSet {
  int d = 1;
  std::vector<double> points;  // n rows of d coordinates, row-major
  std::uint64_t seed = 0;
  std::string provenance;

  std::size_t size() const {
    return points.size() / static_cast<std::size_t>(d);
  }
  std::span<const double> point(std::size_t k) const {
    return {points.data() + k * d, static_cast<std::size_t>(d)};
  }
};

}  // namespace biaspot
