#include "gqc/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gqc {

namespace {

struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration.
void gauss_legendre(int k, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(k), 0.0);
  weights.assign(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < k; ++i) {
    double x = std::cos(3.14159265358979323846 * (i + 0.75) / (k + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= k; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = k * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = x;
    weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

struct QuadNode {
  Vec x;
  double w;
};

void complete_basis(const Vec& axis, int n, std::vector<Vec>& perp) {
  perp.clear();
  if (n == 2) {
    Vec e(2);
    e[0] = -axis[1];
    e[1] = axis[0];
    perp.push_back(e);
    return;
  }
  // n == 3: two Gram-Schmidt steps against the least-aligned coordinate axes
  int skip = 0;
  double best = std::abs(axis[0]);
  for (int i = 1; i < n; ++i)
    if (std::abs(axis[i]) > best) {
      best = std::abs(axis[i]);
      skip = i;
    }
  for (int i = 0; i < n && static_cast<int>(perp.size()) < 2; ++i) {
    if (i == skip) continue;
    Vec e = Vec::basis(n, i);
    e = e - dot(e, axis) * axis;
    for (const Vec& p : perp) e = e - dot(e, p) * p;
    perp.push_back(normalized(e));
  }
}

// Product rule on the unit ball adapted to oscillation along `axis`:
// panels in the axial coordinate (at least four per oscillation period),
// Gauss in the cross-section. Supports n = 2, 3.
std::vector<QuadNode> ball_quadrature(int n, const Vec& axis, double wavenumber, int order) {
  if (n != 2 && n != 3)
    throw std::invalid_argument("ball quadrature supports n = 2, 3");
  if (order < 2) order = 2;
  const Vec bhat = normalized(axis);
  std::vector<Vec> perp;
  complete_basis(bhat, n, perp);

  const double pi = 3.14159265358979323846;
  const int panels = std::max(16, static_cast<int>(std::ceil(4.0 * std::abs(wavenumber) / pi)));
  std::vector<double> gx, gw, cx, cw;
  gauss_legendre(order, gx, gw);
  gauss_legendre(16, cx, cw);

  std::vector<QuadNode> nodes;
  nodes.reserve(static_cast<std::size_t>(panels * order * (n == 2 ? 16 : 12 * 8)));

  for (int p = 0; p < panels; ++p) {
    const double xi0 = -1.0 + 2.0 * p / panels;
    const double xi1 = -1.0 + 2.0 * (p + 1) / panels;
    const double half = 0.5 * (xi1 - xi0), mid = 0.5 * (xi0 + xi1);
    for (int i = 0; i < order; ++i) {
      const double xi = mid + half * gx[static_cast<std::size_t>(i)];
      const double wxi = half * gw[static_cast<std::size_t>(i)];
      const double rho2 = 1.0 - xi * xi;
      if (rho2 <= 0.0) continue;
      const double rho = std::sqrt(rho2);
      if (n == 2) {
        for (int j = 0; j < 16; ++j) {
          const double y = rho * cx[static_cast<std::size_t>(j)];
          const double wy = rho * cw[static_cast<std::size_t>(j)];
          Vec pt = xi * bhat + y * perp[0];
          nodes.push_back({pt, wxi * wy});
        }
      } else {
        std::vector<double> rx, rw;
        gauss_legendre(12, rx, rw);
        const int nth = 8;
        for (int j = 0; j < 12; ++j) {
          const double r = 0.5 * rho * (rx[static_cast<std::size_t>(j)] + 1.0);
          const double wr = 0.5 * rho * rw[static_cast<std::size_t>(j)] * r;
          for (int t = 0; t < nth; ++t) {
            const double th = 2.0 * pi * t / nth;
            Vec pt = xi * bhat + (r * std::cos(th)) * perp[0] + (r * std::sin(th)) * perp[1];
            nodes.push_back({pt, wxi * wr * (2.0 * pi / nth)});
          }
        }
      }
    }
  }
  return nodes;
}

}  // namespace

int TestField::dim() const {
  if (piecewise_affine()) return pa().mesh->n;
  return smooth().n;
}

TestField pa_from_function(std::shared_ptr<const MeshedDomain> mesh,
                           const std::function<Vec(const Vec&)>& disp, bool pin_boundary) {
  PiecewiseAffineField f;
  f.mesh = mesh;
  const int n = mesh->n;
  f.vertex_disp.resize(mesh->vertices.size(), Vec(n));
  for (std::size_t v = 0; v < mesh->vertices.size(); ++v) {
    if (pin_boundary && mesh->boundary_vertex[v]) continue;  // identity boundary
    f.vertex_disp[v] = disp(mesh->vertices[v]);
  }
  const int nc = mesh->cell_count();
  f.disp_grad.resize(static_cast<std::size_t>(nc), Mat(n));
  f.disp_offset.resize(static_cast<std::size_t>(nc), Vec(n));
  f.in_support.assign(static_cast<std::size_t>(nc), 0);
  f.in_band.assign(static_cast<std::size_t>(nc), 0);
  f.exact_laminate.assign(static_cast<std::size_t>(nc), 0);
  for (int c = 0; c < nc; ++c) {
    f.disp_grad[static_cast<std::size_t>(c)] = cell_gradient(*mesh, c, f.vertex_disp);
    f.disp_offset[static_cast<std::size_t>(c)] =
        cell_offset(*mesh, c, f.vertex_disp, f.disp_grad[static_cast<std::size_t>(c)]);
    for (int k = 0; k <= n; ++k) {
      const int vi = mesh->cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
      if (norm(f.vertex_disp[static_cast<std::size_t>(vi)]) > 0.0) {
        f.in_support[static_cast<std::size_t>(c)] = 1;
        break;
      }
    }
  }
  return TestField{std::move(f)};
}

namespace {

struct Profile {
  std::function<double(double)> u;   // u(t), t = |x|^2, u(1) = 0
  std::function<double(double)> du;  // u'(t)
};

Profile morrey_profile(std::string_view name) {
  if (name == "quartic")
    return {[](double t) { return (1.0 - t) * (1.0 - t); },
            [](double t) { return -2.0 * (1.0 - t); }};
  if (name == "cubic")
    return {[](double t) { return (1.0 - t) * (1.0 - t) * (1.0 - t); },
            [](double t) { return -3.0 * (1.0 - t) * (1.0 - t); }};
  throw std::invalid_argument("unknown morrey profile: " + std::string(name));
}

}  // namespace

TestField morrey_field(const Vec& a, const Vec& b, std::string_view profile, double frequency) {
  if (a.dim() != b.dim()) throw std::invalid_argument("morrey_field: dimension mismatch");
  const int n = a.dim();
  const Profile prof = morrey_profile(profile);
  const double s = frequency;
  if (!(s > 0.0)) throw std::invalid_argument("morrey_field: frequency must be > 0");

  SmoothField f;
  f.n = n;
  f.kind = "morrey";
  f.param_a = a;
  f.param_b = b;
  f.profile = std::string(profile);
  f.frequency = s;
  const double bnorm = norm(b);
  f.axis = (bnorm > 0.0) ? normalized(b) : Vec::basis(n, 0);
  f.wavenumber = s * bnorm;
  f.displacement = [a, b, prof, s](const Vec& x) {
    const double t = dot(x, x);
    return (prof.u(t) * std::sin(s * dot(b, x)) / s) * a;
  };
  f.gradient = [a, b, prof, s](const Vec& x) {
    const double t = dot(x, x);
    const double phase = s * dot(b, x);
    Vec g = (2.0 * prof.du(t) * std::sin(phase) / s) * x + (prof.u(t) * std::cos(phase)) * b;
    return rank_one(a, g);
  };
  return TestField{std::move(f)};
}

double DeltaTensor::norm() const {
  double s = 0.0;
  const int m = n * n * n * n;
  for (int i = 0; i < m; ++i) s += d[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(i)];
  return std::sqrt(s);
}

double DeltaTensor::symmetry_defect() const {
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          worst = std::max(worst, std::abs(at(i, j, k, l) - at(i, l, k, j)));
  return worst;
}

DeltaTensor delta_tensor(const TestField& field, int quadrature_order) {
  const int n = field.dim();
  DeltaTensor out;
  out.n = n;
  if (field.piecewise_affine()) {
    const auto& f = field.pa();
    for (int c = 0; c < f.mesh->cell_count(); ++c) {
      const Mat& g = f.disp_grad[static_cast<std::size_t>(c)];
      const double vol = f.mesh->volumes[static_cast<std::size_t>(c)];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) out.at(i, j, k, l) += vol * g(i, j) * g(k, l);
    }
    return out;
  }
  const auto& f = field.smooth();
  const auto nodes = ball_quadrature(n, f.axis, f.wavenumber, quadrature_order);
  const int m = n * n * n * n;
  std::vector<KahanSum> acc(static_cast<std::size_t>(m));
  for (const auto& q : nodes) {
    const Mat g = f.gradient(q.x);
    int idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) acc[static_cast<std::size_t>(idx++)].add(q.w * g(i, j) * g(k, l));
  }
  for (int i = 0; i < m; ++i) out.d[static_cast<std::size_t>(i)] = acc[static_cast<std::size_t>(i)].s;
  return out;
}

RankOneFit delta_rank_one_fit(const DeltaTensor& d, const Vec& a, const Vec& b) {
  const int n = d.n;
  double tt = 0.0, dt = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double t = a[i] * b[j] * a[k] * b[l];
          tt += t * t;
          dt += d.at(i, j, k, l) * t;
        }
  RankOneFit fit;
  if (tt == 0.0) return fit;
  fit.lambda = dt / tt;
  double resid = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double r = d.at(i, j, k, l) - fit.lambda * a[i] * b[j] * a[k] * b[l];
          resid += r * r;
        }
  const double dn = d.norm();
  fit.rel_residual = (dn > 0.0) ? std::sqrt(resid) / dn : 0.0;
  return fit;
}

namespace {

double sawtooth(double zeta, double s1, double s2, double lambda) {
  double u = zeta - std::floor(zeta);
  return (u < lambda) ? s1 * u : s1 * lambda + s2 * (u - lambda);
}

// closed interval [lo, hi] of the sawtooth piece containing zeta
void sawtooth_piece_interval(double zeta, double lambda, double& lo, double& hi) {
  const double fl = std::floor(zeta);
  const double u = zeta - fl;
  if (u < lambda) {
    lo = fl;
    hi = fl + lambda;
  } else {
    lo = fl + lambda;
    hi = fl + 1.0;
  }
}

}  // namespace

TestField laminate_field(const GroupSpec& g, const LaminateSpec& spec,
                         std::shared_ptr<const MeshedDomain> mesh) {
  const int n = mesh->n;
  if (spec.a.dim() != n || spec.b.dim() != n)
    throw std::invalid_argument("laminate_field: vector dimension mismatch");
  if (g.tag == GroupTag::so || g.tag == GroupTag::co)
    throw std::invalid_argument("laminate_field: rank-one cone of " + g.str() + " is empty");
  const double lambda = spec.fraction;
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("laminate_field: fraction must be in (0,1)");
  const double mean = lambda * spec.slope1 + (1.0 - lambda) * spec.slope2;
  if (std::abs(mean) > 1e-12 * (1.0 + std::abs(spec.slope1) + std::abs(spec.slope2)))
    throw std::invalid_argument("laminate_field: slopes/fractions have nonzero mean");
  const double ab = dot(spec.a, spec.b);
  if (g.tag == GroupTag::sl && std::abs(ab) > 1e-12 * (1.0 + norm(spec.a) * norm(spec.b)))
    throw std::invalid_argument("laminate_field: SL admissibility needs a.b = 0");
  if (g.tag == GroupTag::gl_plus) {
    if (1.0 + spec.slope1 * ab <= 0.0 || 1.0 + spec.slope2 * ab <= 0.0)
      throw std::invalid_argument("laminate_field: interior gradients leave GL+");
  }
  const double h = spec.scale;
  if (!(h > 0.0)) throw std::invalid_argument("laminate_field: scale must be > 0");
  const double bnorm = norm(spec.b);
  if (!(bnorm > 0.0)) throw std::invalid_argument("laminate_field: b must be nonzero");
  const double delta = (spec.cutoff > 0.0) ? spec.cutoff : lambda / (h * bnorm);
  const double amp = std::max(std::abs(spec.slope1) * lambda, std::abs(spec.slope2) * (1.0 - lambda)) / h;

  auto scalar_disp = [&](const Vec& x) {
    const double raw = sawtooth(h * dot(spec.b, x), spec.slope1, spec.slope2, lambda) / h;
    const double m =
        amp * std::clamp(mesh->boundary_distance(x) / delta, 0.0, 1.0);  // 0 outside
    return std::clamp(raw, -m, m);
  };
  TestField field = pa_from_function(mesh, [&](const Vec& x) { return scalar_disp(x) * spec.a; });
  auto& f = std::get<PiecewiseAffineField>(field.data);

  if (amp > 0.0) {
    double max_disp = 0.0;
    for (const auto& v : f.vertex_disp) max_disp = std::max(max_disp, norm(v));
    // vertices one full period apart alias the sawtooth to zero
    if (max_disp == 0.0)
      throw std::invalid_argument(
          "laminate_field: mesh does not resolve the sawtooth (raise the resolution)");
  }

  // classify cells and enforce admissibility
  const Mat eye = Mat::identity(n);
  for (int c = 0; c < mesh->cell_count(); ++c) {
    const auto& vs = mesh->cells[static_cast<std::size_t>(c)];
    bool modified = false;   // clamp actually changed a vertex value
    bool geom_band = false;  // cell touches the cutoff band
    double zmin = std::numeric_limits<double>::infinity();
    double zmax = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n; ++k) {
      const Vec& x = mesh->vertices[static_cast<std::size_t>(vs[static_cast<std::size_t>(k)])];
      const double zeta = h * dot(spec.b, x);
      const double raw = sawtooth(zeta, spec.slope1, spec.slope2, lambda) / h;
      const double m = amp * std::clamp(mesh->boundary_distance(x) / delta, 0.0, 1.0);
      if (std::abs(raw) > m + 1e-15) modified = true;
      if (mesh->boundary_distance(x) < delta - 1e-15) geom_band = true;
      zmin = std::min(zmin, zeta);
      zmax = std::max(zmax, zeta);
    }
    // kink-free iff the zeta-range of the cell fits inside one linear piece
    // (vertices sitting exactly on a breakpoint stay kink-free)
    double plo = 0.0, phi = 0.0;
    sawtooth_piece_interval(0.5 * (zmin + zmax), lambda, plo, phi);
    const bool same_piece = (zmin >= plo - 1e-12 && zmax <= phi + 1e-12);
    if (modified || geom_band || mesh->boundary_layer[static_cast<std::size_t>(c)])
      f.in_band[static_cast<std::size_t>(c)] = 1;
    // unmodified same-piece cells carry the exact laminate gradient even
    // inside the geometric band (the interpolant is the field)
    if (!modified && same_piece) f.exact_laminate[static_cast<std::size_t>(c)] = 1;

    const Mat du = eye + f.disp_grad[static_cast<std::size_t>(c)];
    const double d = det(du);
    if (g.tag == GroupTag::gl_plus || g.tag == GroupTag::sl) {
      if (d <= 1e-9)
        throw std::invalid_argument("laminate_field: cell " + std::to_string(c) +
                                    " leaves GL+ (det = " + std::to_string(d) + ")");
    } else {
      if (std::abs(d) <= 1e-9)
        throw std::invalid_argument("laminate_field: cell " + std::to_string(c) + " is degenerate");
    }
    if (g.tag == GroupTag::sl && f.exact_laminate[static_cast<std::size_t>(c)] &&
        std::abs(d - 1.0) > 1e-9)
      throw std::invalid_argument("laminate_field: exact cell " + std::to_string(c) +
                                  " leaves SL");
  }
  return field;
}

namespace {

double cell_energy_value(const Potential& w, const Mat& f0, const Mat& du, MulSide side) {
  return w.eval(side == MulSide::left ? f0 * du : du * f0);
}

}  // namespace

EnergyBreakdown energy_breakdown(const Potential& w, const Mat& f0, const TestField& field,
                                 int quadrature_order, MulSide side) {
  EnergyBreakdown out;
  const int n = field.dim();
  const Mat eye = Mat::identity(n);
  if (field.piecewise_affine()) {
    const auto& f = field.pa();
    KahanSum total, band;
    for (int c = 0; c < f.mesh->cell_count(); ++c) {
      const Mat du = eye + f.disp_grad[static_cast<std::size_t>(c)];
      double val = 0.0;
      try {
        val = cell_energy_value(w, f0, du, side);
      } catch (const std::domain_error& e) {
        throw std::domain_error("energy: cell " + std::to_string(c) + ": " + e.what());
      }
      const double contrib = f.mesh->volumes[static_cast<std::size_t>(c)] * val;
      total.add(contrib);
      if (f.in_band[static_cast<std::size_t>(c)]) band.add(contrib);
    }
    out.total = total.s;
    out.band = band.s;
    return out;
  }
  const auto& f = field.smooth();
  const auto nodes = ball_quadrature(n, f.axis, f.wavenumber, quadrature_order);
  KahanSum total;
  for (const auto& q : nodes) {
    const Mat du = eye + f.gradient(q.x);
    total.add(q.w * cell_energy_value(w, f0, du, side));
  }
  out.total = total.s;
  return out;
}

double energy(const Potential& w, const Mat& f0, const TestField& field, int quadrature_order,
              MulSide side) {
  return energy_breakdown(w, f0, field, quadrature_order, side).total;
}

Mat mean_gradient(const TestField& field) {
  if (!field.piecewise_affine())
    throw std::invalid_argument("mean_gradient needs a piecewise-affine field");
  const auto& f = field.pa();
  const int n = f.mesh->n;
  Mat acc(n);
  for (int c = 0; c < f.mesh->cell_count(); ++c) {
    const double vol = f.mesh->volumes[static_cast<std::size_t>(c)];
    acc += vol * (Mat::identity(n) + f.disp_grad[static_cast<std::size_t>(c)]);
  }
  return (1.0 / f.mesh->total_volume()) * acc;
}

TestField ball_to_eta_conversion(const TestField& phi_field, const Mat& fmat) {
  if (!phi_field.piecewise_affine())
    throw std::invalid_argument("ball_to_eta_conversion needs a piecewise-affine field");
  const auto& src = phi_field.pa();
  PiecewiseAffineField out = src;
  for (auto& v : out.vertex_disp) v = fmat * v;
  for (auto& g : out.disp_grad) g = fmat * g;
  for (auto& o : out.disp_offset) o = fmat * o;
  return TestField{std::move(out)};
}

double uniform_conformal_gap(const Potential& w, const Mat& a, const Mat& r, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  return w.eval(a * ((1.0 / eps) * r)) - w.eval(a);
}

Vec evaluate_pa(const TestField& field, const Vec& x) {
  const auto& f = field.pa();
  const auto& mesh = *f.mesh;
  const int n = mesh.n;
  const int r = mesh.resolution;
  const bool ball = (mesh.shape == MeshedDomain::Shape::unit_ball);
  const double lo = ball ? -1.0 : 0.0;
  const double hcell = (1.0 - lo) / r;

  std::array<int, 4> idx{};
  for (int d = 0; d < n; ++d) {
    double t = (x[d] - lo) / hcell;
    t = std::clamp(t, 0.0, static_cast<double>(r) - 1e-12);
    idx[static_cast<std::size_t>(d)] = static_cast<int>(t);
  }
  int flat = 0;
  for (int d = 0; d < n; ++d) flat = flat * r + idx[static_cast<std::size_t>(d)];
  int fact = 1;
  for (int d = 2; d <= n; ++d) fact *= d;

  // for the cube, cells of a subcube are stored contiguously; locate by
  // barycentric test among its n! simplices
  const int cell_base = flat * fact;
  if (!ball) {
    for (int c = cell_base; c < cell_base + fact; ++c) {
      const auto& vs = mesh.cells[static_cast<std::size_t>(c)];
      const Vec& x0 = mesh.vertices[static_cast<std::size_t>(vs[0])];
      Mat edges(n);
      for (int k = 1; k <= n; ++k) {
        const Vec& xk = mesh.vertices[static_cast<std::size_t>(vs[static_cast<std::size_t>(k)])];
        for (int d = 0; d < n; ++d) edges(d, k - 1) = xk[d] - x0[d];
      }
      const Vec lambda = inverse(edges) * (x - x0);
      double lsum = 0.0;
      bool inside = true;
      for (int k = 0; k < n; ++k) {
        if (lambda[k] < -1e-9) inside = false;
        lsum += lambda[k];
      }
      if (lsum > 1.0 + 1e-9) inside = false;
      if (inside)
        return f.disp_grad[static_cast<std::size_t>(c)] * x +
               f.disp_offset[static_cast<std::size_t>(c)];
    }
    throw std::logic_error("evaluate_pa: point location failed");
  }
  // ball meshes drop cells; scan (slow path, used rarely)
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const auto& vs = mesh.cells[static_cast<std::size_t>(c)];
    const Vec& x0 = mesh.vertices[static_cast<std::size_t>(vs[0])];
    Mat edges(n);
    for (int k = 1; k <= n; ++k) {
      const Vec& xk = mesh.vertices[static_cast<std::size_t>(vs[static_cast<std::size_t>(k)])];
      for (int d = 0; d < n; ++d) edges(d, k - 1) = xk[d] - x0[d];
    }
    const Vec lambda = inverse(edges) * (x - x0);
    double lsum = 0.0;
    bool inside = true;
    for (int k = 0; k < n; ++k) {
      if (lambda[k] < -1e-9) inside = false;
      lsum += lambda[k];
    }
    if (lsum > 1.0 + 1e-9) inside = false;
    if (inside)
      return f.disp_grad[static_cast<std::size_t>(c)] * x +
             f.disp_offset[static_cast<std::size_t>(c)];
  }
  return Vec(n);  // outside the kept region: identity
}

TestField refine_pa(const TestField& base, int factor) {
  if (!base.piecewise_affine()) throw std::invalid_argument("refine_pa needs a PA field");
  if (factor < 1) throw std::invalid_argument("refine_pa: factor must be >= 1");
  const auto& src = base.pa();
  if (factor == 1) return base;
  if (src.mesh->shape != MeshedDomain::Shape::unit_cube)
    throw std::invalid_argument("refine_pa supports cube meshes");
  const int n = src.mesh->n;
  auto fine = MeshedDomain::unit_cube(n, src.mesh->resolution * factor);
  TestField out = pa_from_function(fine, [&](const Vec& x) { return evaluate_pa(base, x); });
  // inherit masks from the containing coarse cells
  auto& pf = std::get<PiecewiseAffineField>(out.data);
  for (int c = 0; c < fine->cell_count(); ++c) {
    Vec cent(n);
    for (int k = 0; k <= n; ++k)
      cent = cent + (1.0 / (n + 1.0)) *
                        fine->vertices[static_cast<std::size_t>(
                            fine->cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)])];
    // locate the coarse cell of the centroid and copy its flags
    const auto& mesh = *src.mesh;
    const int r = mesh.resolution;
    std::array<int, 4> idx{};
    for (int d = 0; d < n; ++d) {
      double t = std::clamp(cent[d] * r, 0.0, static_cast<double>(r) - 1e-12);
      idx[static_cast<std::size_t>(d)] = static_cast<int>(t);
    }
    int flat = 0;
    for (int d = 0; d < n; ++d) flat = flat * r + idx[static_cast<std::size_t>(d)];
    int fact = 1;
    for (int d = 2; d <= n; ++d) fact *= d;
    for (int cc = flat * fact; cc < (flat + 1) * fact; ++cc) {
      const auto& vs = mesh.cells[static_cast<std::size_t>(cc)];
      const Vec& x0 = mesh.vertices[static_cast<std::size_t>(vs[0])];
      Mat edges(n);
      for (int k = 1; k <= n; ++k) {
        const Vec& xk = mesh.vertices[static_cast<std::size_t>(vs[static_cast<std::size_t>(k)])];
        for (int d = 0; d < n; ++d) edges(d, k - 1) = xk[d] - x0[d];
      }
      const Vec lambda = inverse(edges) * (cent - x0);
      double lsum = 0.0;
      bool inside = true;
      for (int k = 0; k < n; ++k) {
        if (lambda[k] < -1e-9) inside = false;
        lsum += lambda[k];
      }
      if (lsum > 1.0 + 1e-9) inside = false;
      if (inside) {
        pf.in_band[static_cast<std::size_t>(c)] = src.in_band[static_cast<std::size_t>(cc)];
        pf.exact_laminate[static_cast<std::size_t>(c)] =
            src.exact_laminate[static_cast<std::size_t>(cc)];
        break;
      }
    }
  }
  return out;
}

CheckReport quasiconvexity_probe(const Potential& w, const GroupSpec& g, const Mat& f,
                                 const ProbeFamily& family, long budget, double tol,
                                 std::uint64_t seed) {
  CheckReport rep;
  rep.check = "quasiconvexity_probe(" + w.name + "," + g.str() + ")";
  if (g.tag == GroupTag::so || g.tag == GroupTag::co) {
    // every compactly supported field with gradients in so/co is the
    // identity; there is nothing to probe
    rep.verdict = Verdict::vacuous;
    rep.metadata["vacuous_reason"] = "no nontrivial admissible fields for " + g.str();
    return rep;
  }
  const int n = g.n;
  auto mesh = MeshedDomain::unit_cube(n, family.resolution);
  const double vol = mesh->total_volume();
  const double wf = w.eval(f);
  const double base = vol * wf;
  const double tol_eff = tol * (1.0 + std::abs(wf));

  long infeasible = 0;
  long perturbations_run = 0;
  const bool sl_like = (g.tag == GroupTag::sl);
  double worst_gap = std::numeric_limits<double>::infinity();
  nlohmann::json worst_params;

  const bool perturbations_usable = family.perturbations && !sl_like;
  for (long it = 0; it < budget; ++it) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(it));
    bool do_lam = family.laminates;
    if (family.laminates && perturbations_usable) do_lam = rng.uniform() < 0.7;
    if (!family.laminates && !perturbations_usable) break;  // nothing to sample
    double gap = 0.0;
    nlohmann::json params;
    if (do_lam) {
      LaminateSpec spec;
      if (sl_like) {
        const auto pair = sample_rank_one_cone(g, rng);
        spec.a = pair->a;
        spec.b = pair->b;
      } else {
        spec.a = random_unit_vec(n, rng);
        spec.b = (rng.uniform() < 0.5) ? spec.a : random_unit_vec(n, rng);
      }
      spec.fraction = rng.uniform(0.25, 0.75);
      double smax = family.slope_max;
      if (g.tag == GroupTag::gl_plus) {
        // keep both interior determinants clear of zero
        const double ab = dot(spec.a, spec.b);
        if (std::abs(ab) > 1e-12)
          smax = std::min(smax, 0.8 / std::abs(ab) * std::min(1.0, (1.0 - spec.fraction) / spec.fraction));
      }
      spec.slope1 = rng.uniform(0.2, 1.0) * smax * ((rng.uniform() < 0.5) ? 1.0 : -1.0);
      spec.slope2 = -spec.fraction * spec.slope1 / (1.0 - spec.fraction);
      spec.scale = family.scales[static_cast<std::size_t>(rng.uniform_int(
          0, static_cast<int>(family.scales.size()) - 1))];
      double band_energy = 0.0;
      try {
        const TestField field = laminate_field(g, spec, mesh);
        const EnergyBreakdown eb = energy_breakdown(w, f, field);
        gap = eb.total - base;
        band_energy = eb.band;
      } catch (const std::invalid_argument&) {
        ++infeasible;
        continue;
      } catch (const std::domain_error&) {
        ++infeasible;
        continue;
      }
      params = {{"family", "laminate"},
                {"a", vec_to_json(spec.a)},
                {"b", vec_to_json(spec.b)},
                {"slope1", spec.slope1},
                {"slope2", spec.slope2},
                {"fraction", spec.fraction},
                {"scale", spec.scale},
                {"band_energy", band_energy}};
    } else {
      // random piecewise-affine perturbation, scaled back to admissibility
      const double step = 1.0 / family.resolution;
      std::vector<Vec> bumps(mesh->vertices.size(), Vec(n));
      for (std::size_t v = 0; v < mesh->vertices.size(); ++v) {
        if (mesh->boundary_vertex[v]) continue;
        bumps[v] = (family.perturbation_amplitude * step) * normal_vec(n, rng);
      }
      double scl = 1.0;
      bool ok = false;
      TestField field{PiecewiseAffineField{}};
      for (int attempt = 0; attempt < 24; ++attempt) {
        field = pa_from_function(mesh, [&](const Vec& x) {
          (void)x;
          return Vec(n);
        });
        auto& pf = std::get<PiecewiseAffineField>(field.data);
        pf.vertex_disp = bumps;
        for (auto& v : pf.vertex_disp) v = scl * v;
        for (int c = 0; c < mesh->cell_count(); ++c) {
          pf.disp_grad[static_cast<std::size_t>(c)] = cell_gradient(*mesh, c, pf.vertex_disp);
          pf.disp_offset[static_cast<std::size_t>(c)] =
              cell_offset(*mesh, c, pf.vertex_disp, pf.disp_grad[static_cast<std::size_t>(c)]);
          pf.in_support[static_cast<std::size_t>(c)] = 1;
        }
        bool admissible = true;
        for (int c = 0; c < mesh->cell_count(); ++c) {
          const double d = det(Mat::identity(n) + pf.disp_grad[static_cast<std::size_t>(c)]);
          if (d < 0.05) {
            admissible = false;
            break;
          }
        }
        if (admissible) {
          ok = true;
          break;
        }
        scl *= 0.5;
      }
      if (!ok) {
        ++infeasible;
        continue;
      }
      try {
        gap = energy(w, f, field) - base;
      } catch (const std::domain_error&) {
        ++infeasible;
        continue;
      }
      ++perturbations_run;
      params = {{"family", "perturbation"}, {"amplitude_scale", scl}};
    }
    if (gap < worst_gap) {
      worst_gap = gap;
      worst_params = params;
    }
    Witness wit;
    wit.F = f;
    wit.note = params.dump();
    rep.record(gap, gap < -tol_eff, wit);
  }

  rep.metadata["infeasible_or_skipped"] = std::to_string(infeasible);
  rep.metadata["perturbation_fields"] = std::to_string(perturbations_run);
  if (!worst_params.is_null()) rep.metadata["worst_field"] = worst_params.dump();
  {
    std::ostringstream os;
    os << worst_gap;
    rep.metadata["worst_gap"] = os.str();
  }
  if (sl_like && family.perturbations)
    rep.metadata["perturbations_note"] = "random vertex perturbations cannot satisfy det = 1; laminates only";
  rep.finalize();
  return rep;
}

nlohmann::json field_to_json(const TestField& field) {
  nlohmann::json j;
  if (field.piecewise_affine()) {
    const auto& f = field.pa();
    j["type"] = "piecewise_affine";
    j["domain"] = {{"shape", f.mesh->shape == MeshedDomain::Shape::unit_cube ? "unit_cube" : "unit_ball"},
                   {"n", f.mesh->n},
                   {"resolution", f.mesh->resolution}};
    nlohmann::json vd = nlohmann::json::array();
    for (const auto& v : f.vertex_disp) vd.push_back(vec_to_json(v));
    j["vertex_displacements"] = vd;
    nlohmann::json cells = nlohmann::json::array();
    for (int c = 0; c < f.mesh->cell_count(); ++c) {
      nlohmann::json cj;
      nlohmann::json vs = nlohmann::json::array();
      for (int k = 0; k <= f.mesh->n; ++k)
        vs.push_back(f.mesh->cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)]);
      cj["vertices"] = vs;
      cj["gradient"] = mat_to_json(f.disp_grad[static_cast<std::size_t>(c)]);
      cj["offset"] = vec_to_json(f.disp_offset[static_cast<std::size_t>(c)]);
      cj["support"] = static_cast<bool>(f.in_support[static_cast<std::size_t>(c)]);
      cj["band"] = static_cast<bool>(f.in_band[static_cast<std::size_t>(c)]);
      cells.push_back(cj);
    }
    j["cells"] = cells;
    return j;
  }
  const auto& f = field.smooth();
  j["type"] = "smooth";
  j["kind"] = f.kind;
  j["a"] = vec_to_json(f.param_a);
  j["b"] = vec_to_json(f.param_b);
  j["profile"] = f.profile;
  j["frequency"] = f.frequency;
  return j;
}

TestField field_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "smooth") {
    if (j.at("kind").get<std::string>() != "morrey")
      throw std::invalid_argument("unknown smooth field kind");
    return morrey_field(vec_from_json(j.at("a")), vec_from_json(j.at("b")),
                        j.at("profile").get<std::string>(), j.at("frequency").get<double>());
  }
  if (type != "piecewise_affine") throw std::invalid_argument("unknown field type");
  const auto& dom = j.at("domain");
  const int n = dom.at("n").get<int>();
  const int res = dom.at("resolution").get<int>();
  const std::string shape = dom.at("shape").get<std::string>();
  auto mesh = (shape == "unit_cube") ? MeshedDomain::unit_cube(n, res)
                                     : MeshedDomain::unit_ball(n, res);
  std::vector<Vec> vd;
  for (const auto& v : j.at("vertex_displacements")) vd.push_back(vec_from_json(v));
  if (vd.size() != mesh->vertices.size())
    throw std::invalid_argument("field_from_json: vertex count mismatch");
  TestField field = pa_from_function(mesh, [&](const Vec&) { return Vec(n); });
  auto& f = std::get<PiecewiseAffineField>(field.data);
  f.vertex_disp = vd;
  for (int c = 0; c < mesh->cell_count(); ++c) {
    f.disp_grad[static_cast<std::size_t>(c)] = cell_gradient(*mesh, c, f.vertex_disp);
    f.disp_offset[static_cast<std::size_t>(c)] =
        cell_offset(*mesh, c, f.vertex_disp, f.disp_grad[static_cast<std::size_t>(c)]);
  }
  if (j.contains("cells")) {
    const auto& cells = j.at("cells");
    for (int c = 0; c < mesh->cell_count() && c < static_cast<int>(cells.size()); ++c) {
      f.in_support[static_cast<std::size_t>(c)] =
          cells.at(static_cast<std::size_t>(c)).value("support", false) ? 1 : 0;
      f.in_band[static_cast<std::size_t>(c)] =
          cells.at(static_cast<std::size_t>(c)).value("band", false) ? 1 : 0;
    }
  }
  return field;
}

}  // namespace gqc
