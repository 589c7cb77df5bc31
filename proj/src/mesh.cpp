#include "gqc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gqc {

namespace {

// factorials for n <= 4
constexpr double kFact[5] = {1.0, 1.0, 2.0, 6.0, 24.0};

int grid_index(int n, int res, const std::array<int, 4>& idx) {
  int s = 0;
  for (int d = 0; d < n; ++d) s = s * (res + 1) + idx[static_cast<std::size_t>(d)];
  return s;
}

void permutations(int n, std::vector<std::array<int, 4>>& out) {
  std::array<int, 4> p{0, 1, 2, 3};
  out.clear();
  std::sort(p.begin(), p.begin() + n);
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.begin() + n));
}

std::shared_ptr<MeshedDomain> build_grid(MeshedDomain::Shape shape, int n, int res) {
  if (n < 2 || n > 4) throw std::invalid_argument("mesh dimension must be in 2..4");
  if (res < 1) throw std::invalid_argument("mesh resolution must be >= 1");
  auto mesh = std::make_shared<MeshedDomain>();
  mesh->shape = shape;
  mesh->n = n;
  mesh->resolution = res;

  const bool ball = (shape == MeshedDomain::Shape::unit_ball);
  const double lo = ball ? -1.0 : 0.0;
  const double hi = 1.0;
  const double hcell = (hi - lo) / res;

  // vertices on the structured grid
  const int nv_axis = res + 1;
  int nv = 1;
  for (int d = 0; d < n; ++d) nv *= nv_axis;
  mesh->vertices.resize(static_cast<std::size_t>(nv), Vec(n));
  mesh->boundary_vertex.assign(static_cast<std::size_t>(nv), 0);
  for (int v = 0; v < nv; ++v) {
    int rem = v;
    std::array<int, 4> idx{};
    for (int d = n - 1; d >= 0; --d) {
      idx[static_cast<std::size_t>(d)] = rem % nv_axis;
      rem /= nv_axis;
    }
    Vec x(n);
    for (int d = 0; d < n; ++d) x[d] = lo + hcell * idx[static_cast<std::size_t>(d)];
    mesh->vertices[static_cast<std::size_t>(v)] = x;
    if (ball) {
      if (norm(x) >= 1.0 - 1e-12) mesh->boundary_vertex[static_cast<std::size_t>(v)] = 1;
    } else {
      for (int d = 0; d < n; ++d)
        if (idx[static_cast<std::size_t>(d)] == 0 || idx[static_cast<std::size_t>(d)] == res)
          mesh->boundary_vertex[static_cast<std::size_t>(v)] = 1;
    }
  }

  // Kuhn triangulation: each grid cell splits into n! simplices, one per
  // coordinate order; vertex k of simplex pi is corner + sum of e_{pi(j)},
  // j < k. Simplex volumes are all hcell^n / n!.
  std::vector<std::array<int, 4>> perms;
  permutations(n, perms);
  const double simplex_vol = std::pow(hcell, n) / kFact[n];

  std::array<int, 4> cell_idx{};
  const int ncell_axis = res;
  int ncells = 1;
  for (int d = 0; d < n; ++d) ncells *= ncell_axis;

  for (int c = 0; c < ncells; ++c) {
    int rem = c;
    for (int d = n - 1; d >= 0; --d) {
      cell_idx[static_cast<std::size_t>(d)] = rem % ncell_axis;
      rem /= ncell_axis;
    }
    for (const auto& p : perms) {
      std::array<int, 5> verts{-1, -1, -1, -1, -1};
      std::array<int, 4> cur = cell_idx;
      verts[0] = grid_index(n, res, cur);
      for (int k = 0; k < n; ++k) {
        cur[static_cast<std::size_t>(p[static_cast<std::size_t>(k)])] += 1;
        verts[static_cast<std::size_t>(k + 1)] = grid_index(n, res, cur);
      }
      if (ball) {
        bool inside = true;
        for (int k = 0; k <= n; ++k)
          if (norm(mesh->vertices[static_cast<std::size_t>(verts[static_cast<std::size_t>(k)])]) >
              1.0 + 1e-12)
            inside = false;
        if (!inside) continue;
      }
      mesh->cells.push_back(verts);
      mesh->volumes.push_back(simplex_vol);
    }
  }

  // boundary-layer flags
  mesh->boundary_layer.assign(mesh->cells.size(), 0);
  const double band = ball ? 2.0 * hcell : hcell;
  for (std::size_t c = 0; c < mesh->cells.size(); ++c) {
    for (int k = 0; k <= n; ++k) {
      const Vec& x = mesh->vertices[static_cast<std::size_t>(mesh->cells[c][static_cast<std::size_t>(k)])];
      if (mesh->boundary_distance(x) <= band + 1e-12) {
        mesh->boundary_layer[c] = 1;
        break;
      }
    }
  }
  return mesh;
}

}  // namespace

double MeshedDomain::total_volume() const {
  double s = 0.0, comp = 0.0;
  for (double v : volumes) {  // Kahan
    const double y = v - comp;
    const double t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  return s;
}

double MeshedDomain::boundary_distance(const Vec& x) const {
  if (shape == Shape::unit_ball) return 1.0 - norm(x);
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) d = std::min({d, x[i], 1.0 - x[i]});
  return d;
}

std::shared_ptr<const MeshedDomain> MeshedDomain::unit_cube(int n, int resolution) {
  return build_grid(Shape::unit_cube, n, resolution);
}

std::shared_ptr<const MeshedDomain> MeshedDomain::unit_ball(int n, int resolution) {
  return build_grid(Shape::unit_ball, n, resolution);
}

Mat cell_gradient(const MeshedDomain& mesh, int cell, const std::vector<Vec>& vertex_values) {
  const int n = mesh.n;
  const auto& vs = mesh.cells[static_cast<std::size_t>(cell)];
  const Vec& x0 = mesh.vertices[static_cast<std::size_t>(vs[0])];
  const Vec& f0 = vertex_values[static_cast<std::size_t>(vs[0])];
  Mat edges(n);  // rows: v_k - v_0
  Mat dvals(n);  // rows: f_k - f_0
  for (int k = 1; k <= n; ++k) {
    const Vec& xk = mesh.vertices[static_cast<std::size_t>(vs[static_cast<std::size_t>(k)])];
    const Vec& fk = vertex_values[static_cast<std::size_t>(vs[static_cast<std::size_t>(k)])];
    for (int d = 0; d < n; ++d) {
      edges(k - 1, d) = xk[d] - x0[d];
      dvals(k - 1, d) = fk[d] - f0[d];
    }
  }
  // gradient G solves G . edges_row = dvals_row per component:
  // G = dvals^T * edges^{-T}
  const Mat einv = inverse(edges);
  return transpose(dvals) * transpose(einv);
}

Vec cell_offset(const MeshedDomain& mesh, int cell, const std::vector<Vec>& vertex_values,
                const Mat& gradient) {
  const auto& vs = mesh.cells[static_cast<std::size_t>(cell)];
  const Vec& x0 = mesh.vertices[static_cast<std::size_t>(vs[0])];
  const Vec& f0 = vertex_values[static_cast<std::size_t>(vs[0])];
  return f0 - gradient * x0;
}

}  // namespace gqc
