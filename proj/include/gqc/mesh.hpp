#pragma once

#include <array>
#include <memory>
#include <vector>

#include "gqc/linalg.hpp"

namespace gqc {

// Simplicial decomposition of the unit cube (0,1)^n or the unit ball
// (Kuhn triangulation of a structured grid; the ball keeps cells whose
// vertices all lie inside, so its volume is exact only up to O(1/R)).
struct MeshedDomain {
  enum class Shape { unit_cube, unit_ball };

  Shape shape = Shape::unit_cube;
  int n = 2;
  int resolution = 8;

  std::vector<Vec> vertices;
  std::vector<std::array<int, 5>> cells;  // n+1 vertex indices per simplex
  std::vector<double> volumes;
  std::vector<std::uint8_t> boundary_layer;   // cells touching the boundary band
  std::vector<std::uint8_t> boundary_vertex;  // vertices on (or outside) the boundary

  double total_volume() const;
  int cell_count() const { return static_cast<int>(cells.size()); }

  // Distance to the domain boundary (cube: min over faces; ball: 1 - |x|).
  double boundary_distance(const Vec& x) const;

  static std::shared_ptr<const MeshedDomain> unit_cube(int n, int resolution);
  static std::shared_ptr<const MeshedDomain> unit_ball(int n, int resolution);
};

// Gradient of the P1 interpolant of vertex data on one simplex; exact for
// data that is affine over the cell.
Mat cell_gradient(const MeshedDomain& mesh, int cell, const std::vector<Vec>& vertex_values);
Vec cell_offset(const MeshedDomain& mesh, int cell, const std::vector<Vec>& vertex_values,
                const Mat& gradient);

}  // namespace gqc
