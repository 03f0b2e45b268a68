#include "cogis/grid.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace cogis {

OccupancyGrid OccupancyGrid::covering(const Box& bounds, double resolution) {
  require(resolution > 0.0, "grid resolution must be positive");
  require(bounds.dim() == 2 || bounds.dim() == 3, "grids support 2D and 3D only");
  OccupancyGrid g;
  g.origin = bounds.lo;
  g.resolution = resolution;
  std::size_t total = 1;
  for (Eigen::Index k = 0; k < bounds.dim(); ++k) {
    const double extent = bounds.hi[k] - bounds.lo[k];
    require(extent >= 0.0, "grid bounds are inverted");
    const int n = std::max(1, static_cast<int>(std::ceil(extent / resolution - 1e-9)));
    g.shape.push_back(n);
    total *= static_cast<std::size_t>(n);
  }
  g.cells.assign(total, 0);
  return g;
}

std::size_t OccupancyGrid::linear_index(const std::vector<int>& idx) const {
  std::size_t index = 0;
  for (int k = dim() - 1; k >= 0; --k) index = index * shape[k] + idx[k];
  return index;
}

std::vector<int> OccupancyGrid::unravel(std::size_t index) const {
  std::vector<int> idx(shape.size());
  for (std::size_t k = 0; k < shape.size(); ++k) {
    idx[k] = static_cast<int>(index % shape[k]);
    index /= shape[k];
  }
  return idx;
}

Vec OccupancyGrid::cell_center(std::size_t index) const {
  const auto idx = unravel(index);
  Vec c(dim());
  for (int k = 0; k < dim(); ++k) c[k] = origin[k] + (idx[k] + 0.5) * resolution;
  return c;
}

Mat OccupancyGrid::cell_centers() const {
  Mat centers(dim(), static_cast<Eigen::Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) centers.col(static_cast<Eigen::Index>(i)) = cell_center(i);
  return centers;
}

std::optional<std::size_t> OccupancyGrid::cell_of(const Eigen::Ref<const Vec>& point) const {
  if (point.size() != dim()) return std::nullopt;
  std::vector<int> idx(shape.size());
  for (int k = 0; k < dim(); ++k) {
    const double f = (point[k] - origin[k]) / resolution;
    if (f < 0.0) return std::nullopt;
    const int i = static_cast<int>(std::floor(f));
    if (i >= shape[k]) {
      // The far boundary belongs to the last cell.
      if (f <= shape[k] + 1e-9) {
        idx[k] = shape[k] - 1;
        continue;
      }
      return std::nullopt;
    }
    idx[k] = i;
  }
  return linear_index(idx);
}

void write_grid(std::ostream& out, const OccupancyGrid& grid) {
  out << grid.dim() << ' ' << std::setprecision(std::numeric_limits<double>::max_digits10)
      << grid.resolution;
  for (int k = 0; k < grid.dim(); ++k) out << ' ' << grid.origin[k];
  for (int n : grid.shape) out << ' ' << n;
  out << '\n';
  const int nx = grid.shape[0];
  const int ny = grid.shape[1];
  const int nz = grid.dim() == 3 ? grid.shape[2] : 1;
  for (int z = 0; z < nz; ++z) {
    if (z > 0) out << '\n';
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        const std::size_t i = (static_cast<std::size_t>(z) * ny + y) * nx + x;
        out << (grid.cells[i] ? '1' : '0');
      }
      out << '\n';
    }
  }
}

OccupancyGrid read_grid(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("grid: missing header");
  std::istringstream hs(header);
  OccupancyGrid g;
  int d = 0;
  if (!(hs >> d >> g.resolution) || (d != 2 && d != 3)) throw IoError("grid: malformed header");
  g.origin.resize(d);
  for (int k = 0; k < d; ++k)
    if (!(hs >> g.origin[k])) throw IoError("grid: malformed origin");
  g.shape.resize(d);
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) {
    if (!(hs >> g.shape[k]) || g.shape[k] <= 0) throw IoError("grid: malformed shape");
    total *= g.shape[k];
  }
  g.cells.assign(total, 0);
  const int nx = g.shape[0];
  const int ny = g.shape[1];
  const int nz = d == 3 ? g.shape[2] : 1;
  std::string line;
  for (int z = 0; z < nz; ++z) {
    for (int y = 0; y < ny; ++y) {
      do {
        if (!std::getline(in, line)) throw IoError("grid: truncated body");
      } while (line.empty());
      if (static_cast<int>(line.size()) != nx) throw IoError("grid: row width mismatch");
      for (int x = 0; x < nx; ++x) {
        if (line[x] != '0' && line[x] != '1') throw IoError("grid: invalid cell character");
        g.cells[(static_cast<std::size_t>(z) * ny + y) * nx + x] = line[x] == '1';
      }
    }
  }
  return g;
}

void save_grid(const std::string& path, const OccupancyGrid& grid) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_grid(out, grid);
  if (!out) throw IoError("write failed for " + path);
}

OccupancyGrid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  return read_grid(in);
}

}  // namespace cogis
