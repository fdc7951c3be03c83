#include "biaspot/grid.hpp"

#include <stdexcept>

namespace biaspot {

int default_points_per_dim(int d) {
  switch (d) {
    case 1: return 1024;
    case 2: return 128;
    case 3: return 48;
    case 4: return 20;
    case 5: return 12;
    default: throw std::invalid_argument("default_points_per_dim: d must be in 1..5");
  }
}

Grid make_grid(int d) { return make_grid(d, default_points_per_dim(d)); }

Grid make_grid(int d, int points_per_dim) {
  if (d < 1) throw std::invalid_argument("make_grid: d must be >= 1");
  if (points_per_dim < 1) throw std::invalid_argument("make_grid: points_per_dim must be >= 1");
  return Grid{d, points_per_dim};
}

GridDensity uniform_density(const Grid& grid) {
  GridDensity q;
  q.grid = grid;
  q.mass.assign(grid.cell_count(), 1.0 / static_cast<double>(grid.cell_count()));
  return q;
}

}  // namespace biaspot
