#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hjnav {

constexpr int kMaxDim = 4;

using GridIndex = std::array<int, kMaxDim>;

/// Rectangular state-space grid. Row-major storage, last dimension fastest.
/// Periodic dimensions exclude the duplicate endpoint node; the position
/// dimensions form a contiguous prefix of the state dimensions.
struct StateGrid {
  int dim_count = 0;
  int position_dims = 0;
  std::array<double, kMaxDim> lower{};
  std::array<double, kMaxDim> upper{};
  std::array<double, kMaxDim> spacing{};
  std::array<int, kMaxDim> node_counts{};
  std::array<bool, kMaxDim> periodic{};
  std::array<std::size_t, kMaxDim> stride{};
  std::size_t node_total = 0;

  std::size_t flat(const GridIndex& idx) const {
    std::size_t f = 0;
    for (int d = 0; d < dim_count; ++d) f += stride[d] * static_cast<std::size_t>(idx[d]);
    return f;
  }

  GridIndex unflatten(std::size_t f) const {
    GridIndex idx{};
    for (int d = 0; d < dim_count; ++d) {
      idx[d] = static_cast<int>(f / stride[d]);
      f %= stride[d];
    }
    return idx;
  }

  double coord(int dim, int i) const { return lower[dim] + spacing[dim] * i; }

  /// Coordinate index shifted by `off` along `dim`: wraps on periodic
  /// dimensions, clamps to the edge node otherwise.
  int shift(int dim, int i, int off) const {
    int j = i + off;
    const int n = node_counts[dim];
    if (periodic[dim]) {
      j %= n;
      if (j < 0) j += n;
    } else {
      if (j < 0) j = 0;
      if (j >= n) j = n - 1;
    }
    return j;
  }

  /// Number of nodes in the position-dimension sub-grid.
  std::size_t position_total() const {
    std::size_t t = 1;
    for (int d = 0; d < position_dims; ++d) t *= static_cast<std::size_t>(node_counts[d]);
    return t;
  }

  /// Euclidean diameter of the position box.
  double position_diameter() const;
};

StateGrid build_grid(std::span<const double> lower, std::span<const double> upper,
                     std::span<const int> counts, std::span<const char> periodic,
                     int position_dims = -1);

using GridPtr = std::shared_ptr<const StateGrid>;

GridPtr build_grid_ptr(std::span<const double> lower, std::span<const double> upper,
                       std::span<const int> counts, std::span<const char> periodic,
                       int position_dims = -1);

/// Node-indexed scalar values over a StateGrid.
struct ScalarField {
  GridPtr grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(GridPtr g, double fill = 0.0)
      : grid(std::move(g)), values(grid->node_total, fill) {}

  double& at(const GridIndex& idx) { return values[grid->flat(idx)]; }
  double at(const GridIndex& idx) const { return values[grid->flat(idx)]; }
};

/// Multilinear interpolation of node values at an off-grid state.
/// Periodic dimensions are wrapped first; throws std::out_of_range if x lies
/// outside the grid on a non-periodic dimension.
double interpolate(const ScalarField& field, std::span<const double> x);

/// True when x is inside the grid bounds on every non-periodic dimension.
bool in_bounds(const StateGrid& grid, std::span<const double> x);

/// Signed distance over the position sub-grid: positive at nodes where
/// `inside` holds, negative elsewhere, magnitude the Euclidean distance to
/// the nearest opposite node. The field is extruded unchanged along
/// non-position dimensions. A predicate with no boundary yields the uniform
/// +/- position-diameter sentinel.
ScalarField signed_distance(const GridPtr& grid,
                            const std::function<bool(std::size_t)>& inside);

/// Same, with the inside set given as one byte per position node.
ScalarField signed_distance(const GridPtr& grid, std::span<const std::uint8_t> inside);

/// Brute-force O(N^2) nearest-opposite-node oracle over the position
/// sub-grid, used to cross-check the sweep-based transform in tests.
std::vector<double> signed_distance_brute_force(const StateGrid& grid,
                                                std::span<const std::uint8_t> inside);

void write_field(const ScalarField& field, const std::string& path);
ScalarField read_field(const std::string& path);

}  // namespace hjnav
