#pragma once

#include "cogis/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cogis {

/// Regular 2D or 3D binary grid, x index varying fastest. `true` = occupied.
struct OccupancyGrid {
  Vec origin;
  double resolution = 0.0;
  std::vector<int> shape;
  std::vector<std::uint8_t> cells;

  /// Grid whose cells cover `bounds` at `resolution`, all cells free.
  static OccupancyGrid covering(const Box& bounds, double resolution);

  [[nodiscard]] int dim() const { return static_cast<int>(shape.size()); }
  [[nodiscard]] std::size_t cell_count() const { return cells.size(); }
  [[nodiscard]] bool occupied(std::size_t index) const { return cells[index] != 0; }

  [[nodiscard]] std::size_t linear_index(const std::vector<int>& idx) const;
  [[nodiscard]] std::vector<int> unravel(std::size_t index) const;
  [[nodiscard]] Vec cell_center(std::size_t index) const;
  /// All cell centers as columns, in linear-index order.
  [[nodiscard]] Mat cell_centers() const;
  /// Cell containing `point`, or nullopt when it lies outside the grid.
  [[nodiscard]] std::optional<std::size_t> cell_of(const Eigen::Ref<const Vec>& point) const;

  bool operator==(const OccupancyGrid& other) const = default;
};

/// Plain-text grid: header `d resolution origin... shape...`, then one row of
/// 0/1 characters per y index; in 3D one such block per z slice, blocks
/// separated by a blank line.
void write_grid(std::ostream& out, const OccupancyGrid& grid);
OccupancyGrid read_grid(std::istream& in);
void save_grid(const std::string& path, const OccupancyGrid& grid);
OccupancyGrid load_grid(const std::string& path);

}  // namespace cogis
