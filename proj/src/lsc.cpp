#include "gqc/lsc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gqc {

SequenceSpec SequenceSpec::defaults(int n) {
  SequenceSpec s;
  s.base.a = Vec::basis(n, 0);
  s.base.b = Vec::basis(n, n - 1);  // a.b = 0: admissible for SL as well
  // slope 1/2 keeps the cutoff-cap gradient at det = 1 - 1/2 in the band
  s.base.slope1 = 0.5;
  s.base.slope2 = -0.5;
  s.base.fraction = 0.5;
  return s;
}

namespace {

// Coordinate-wise piecewise-linear bi-Lipschitz reparametrization mapping
// grid nodes to grid nodes: psi(0) = 0, psi(1/4) = 1/2, psi(1) = 1 in the
// first coordinate (slopes 2 and 2/3), identity in the others. Affine on
// every cell of any mesh whose resolution is a multiple of 4.
double grid_remap_1d(double t) {
  return (t < 0.25) ? 2.0 * t : 0.5 + (t - 0.25) * (2.0 / 3.0);
}

Vec grid_remap(const Vec& x) {
  Vec y = x;
  y[0] = grid_remap_1d(x[0]);
  return y;
}

Mat grid_remap_grad(const Vec& x, int n) {
  Mat g = Mat::identity(n);
  g(0, 0) = (x[0] < 0.25) ? 2.0 : (2.0 / 3.0);
  return g;
}

int laminate_resolution(double h, int factor) {
  // multiple of 2h so the default sawtooth breakpoints land on grid planes
  const int base = static_cast<int>(std::lround(2.0 * h));
  return std::max(base, base * std::max(1, factor / 2));
}

TestField build_one(const SequenceSpec& spec, const GroupSpec& g, double h) {
  const int n = g.n;
  switch (spec.generator) {
    case SequenceSpec::Generator::laminate_scaling: {
      // build once on the base mesh, then refine the *field* (nested Kuhn
      // meshes represent the same function, so energies are mesh
      // independent once the base resolution resolves the laminate)
      LaminateSpec lam = spec.base;
      lam.scale = h;
      const int base_res = static_cast<int>(std::lround(2.0 * h));
      auto mesh = MeshedDomain::unit_cube(n, base_res);
      TestField field = laminate_field(g, lam, mesh);
      const int factor = std::max(1, spec.resolution_factor / 2);
      return (factor > 1) ? refine_pa(field, factor) : field;
    }
    case SequenceSpec::Generator::bump_scaling: {
      const int res = laminate_resolution(h, spec.resolution_factor);
      auto mesh = MeshedDomain::unit_cube(n, res);
      const Vec a = spec.base.a;
      const Vec b = spec.base.b;
      auto disp = [a, b, h, n](const Vec& x) {
        double hat = 1.0;
        for (int i = 0; i < n; ++i) hat = std::min({hat, 4.0 * x[i], 4.0 * (1.0 - x[i])});
        hat = std::max(0.0, std::min(1.0, hat));
        const double pi2 = 6.283185307179586;
        return (hat * std::sin(pi2 * h * dot(b, x)) / (pi2 * h)) * a;
      };
      TestField field = pa_from_function(mesh, disp);
      // admissibility: the amplitude 1/(2 pi h) keeps gradients near 1
      const auto& f = field.pa();
      for (int c = 0; c < mesh->cell_count(); ++c) {
        const double d = det(Mat::identity(n) + f.disp_grad[static_cast<std::size_t>(c)]);
        if ((g.tag == GroupTag::gl_plus || g.tag == GroupTag::sl) && d <= 1e-9)
          throw std::invalid_argument("bump_scaling: cell " + std::to_string(c) + " leaves GL+");
      }
      return field;
    }
    case SequenceSpec::Generator::composed: {
      // u_h o u with u a grid remap: exact chain rule on the common grid
      LaminateSpec lam = spec.base;
      lam.scale = h;
      int res = laminate_resolution(h, spec.resolution_factor);
      res = ((res + 3) / 4) * 4;  // multiple of 4 for the remap nodes
      auto mesh = MeshedDomain::unit_cube(n, 2 * res);  // refined: remap slopes 2, 2/3
      const TestField inner_lam = laminate_field(g, lam, MeshedDomain::unit_cube(n, res));
      auto disp = [&](const Vec& x) {
        const Vec y = grid_remap(x);
        // (u_h o u)(x) - x = u_h(y) - y + (y - x)
        return evaluate_pa(inner_lam, y) + (y - x);
      };
      // not pinned: the sequence converges to the remap, not to the identity
      TestField field = pa_from_function(mesh, disp, false);
      return field;
    }
  }
  throw std::logic_error("unreachable");
}

double sup_norm_displacement(const TestField& field, const SequenceSpec& spec) {
  const auto& f = field.pa();
  double sup = 0.0;
  const bool remap = (spec.limit_map == "grid_remap");
  for (std::size_t v = 0; v < f.vertex_disp.size(); ++v) {
    Vec d = f.vertex_disp[v];
    if (remap) {
      const Vec& x = f.mesh->vertices[v];
      d = d - (grid_remap(x) - x);  // subtract the limit displacement
    }
    sup = std::max(sup, norm(d));
  }
  return sup;
}

double max_gradient_norm(const TestField& field) {
  const auto& f = field.pa();
  double mg = 0.0;
  const int n = f.mesh->n;
  for (const auto& g : f.disp_grad)
    mg = std::max(mg, frobenius_norm(Mat::identity(n) + g));
  return mg;
}

}  // namespace

Vec grid_remap_map(const Vec& x) { return grid_remap(x); }
Mat grid_remap_gradient(const Vec& x, int n) { return grid_remap_grad(x, n); }

std::vector<TestField> build_sequence(const SequenceSpec& spec, const GroupSpec& g) {
  std::vector<TestField> out;
  out.reserve(spec.scales.size());
  for (double h : spec.scales) {
    try {
      out.push_back(build_one(spec, g, h));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("build_sequence: h = " + std::to_string(h) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::array<double, 3>> weak_star_diagnostics(const std::vector<TestField>& fields,
                                                         const SequenceSpec& spec) {
  std::vector<std::array<double, 3>> table;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const double h = (i < spec.scales.size()) ? spec.scales[i] : static_cast<double>(i);
    table.push_back({h, sup_norm_displacement(fields[i], spec), max_gradient_norm(fields[i])});
  }
  return table;
}

LscReport lsc_experiment(const Potential& w, const Mat& f0, const SequenceSpec& spec_in,
                         const GroupSpec& g, double tol) {
  LscReport rep;
  const int n = g.n;
  SequenceSpec spec = spec_in;
  if (spec.generator == SequenceSpec::Generator::composed && spec.limit_map == "identity") {
    spec.limit_map = "grid_remap";  // composed sequences converge to the remap
    rep.metadata["limit_map"] = "grid_remap (implied by the composed generator)";
  }
  const std::vector<TestField> fields = build_sequence(spec, g);

  // limit energy
  if (spec.limit_map == "identity") {
    rep.limit_energy = w.eval(f0);  // |Omega| = 1 on the unit cube
  } else if (spec.limit_map == "grid_remap") {
    auto mesh = MeshedDomain::unit_cube(n, 8);
    TestField limit =
        pa_from_function(mesh, [&](const Vec& x) { return grid_remap(x) - x; }, false);
    rep.limit_energy = energy(w, f0, limit);
  } else {
    throw std::invalid_argument("unknown limit_map: " + spec.limit_map);
  }

  for (std::size_t i = 0; i < fields.size(); ++i) {
    const double e = energy(w, f0, fields[i]);
    rep.energies.push_back({spec.scales[i], e});
  }
  rep.diagnostics = weak_star_diagnostics(fields, spec);

  const std::size_t tail_start = rep.energies.size() / 2;
  double tail_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = tail_start; i < rep.energies.size(); ++i)
    tail_min = std::min(tail_min, rep.energies[i].second);
  rep.min_tail_energy = tail_min;
  const double tol_eff = (tol > 0.0) ? tol : 1e-6 * (1.0 + std::abs(rep.limit_energy));
  rep.pass = (tail_min >= rep.limit_energy - tol_eff);
  {
    std::ostringstream os;
    os << tol_eff;
    rep.metadata["tol_effective"] = os.str();
  }
  rep.metadata["tail_start_index"] = std::to_string(tail_start);
  return rep;
}

nlohmann::json to_json(const LscReport& r) {
  nlohmann::json j;
  nlohmann::json es = nlohmann::json::array();
  for (const auto& [h, e] : r.energies) es.push_back({{"h", h}, {"E_h", e}});
  j["energies"] = es;
  j["limit_energy"] = r.limit_energy;
  j["min_tail_energy"] = r.min_tail_energy;
  j["verdict"] = r.pass ? "pass" : "fail";
  nlohmann::json diag = nlohmann::json::array();
  for (const auto& row : r.diagnostics)
    diag.push_back({{"h", row[0]}, {"sup_norm", row[1]}, {"gradient_bound", row[2]}});
  j["diagnostics"] = diag;
  if (!r.metadata.empty()) j["metadata"] = r.metadata;
  return j;
}

std::string lsc_csv(const LscReport& r) {
  std::ostringstream os;
  os << "h,E_h\n";
  os.precision(17);
  for (const auto& [h, e] : r.energies) os << h << "," << e << "\n";
  return os.str();
}

}  // namespace gqc
