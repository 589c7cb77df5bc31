#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gqc/fields.hpp"
#include "gqc/groups.hpp"
#include "gqc/potentials.hpp"

namespace gqc {

// Weak-* convergent sequences of admissible fields and the liminf check.

struct SequenceSpec {
  enum class Generator { laminate_scaling, bump_scaling, composed };

  Generator generator = Generator::laminate_scaling;
  std::vector<double> scales = {4, 8, 16, 32, 64};
  LaminateSpec base;          // a, b, slopes, fraction, cutoff; scale set per h
  int resolution_factor = 2;  // mesh resolution = factor * h (laminates)
  // limit map: "identity" or "grid_remap" (coordinate-wise piecewise-linear
  // bi-Lipschitz map with grid-aligned nodes; used by the composed generator)
  std::string limit_map = "identity";

  static SequenceSpec defaults(int n);
};

// Fields u_h with per-cell gradients in G (checked at build time) and
// displacement sup-norm <= C/h. Throws on the first inadmissible h.
std::vector<TestField> build_sequence(const SequenceSpec& spec, const GroupSpec& g);

struct LscReport {
  std::vector<std::pair<double, double>> energies;  // (h, E_h)
  double limit_energy = 0.0;
  double min_tail_energy = 0.0;
  bool pass = false;  // min over the tail half of E_h >= limit_energy - tol
  // per h: (h, sup-norm of u_h - limit, max per-cell gradient norm)
  std::vector<std::array<double, 3>> diagnostics;
  std::map<std::string, std::string> metadata;
};

LscReport lsc_experiment(const Potential& w, const Mat& f0, const SequenceSpec& spec,
                         const GroupSpec& g, double tol);

// Per h: sup-norm of the displacement difference to the limit and the max
// per-cell gradient norm (the operational weak-* characterization).
std::vector<std::array<double, 3>> weak_star_diagnostics(const std::vector<TestField>& fields,
                                                         const SequenceSpec& spec);

nlohmann::json to_json(const LscReport& r);
std::string lsc_csv(const LscReport& r);

// The grid-remap limit map of the composed generator and its gradient
// (coordinate-wise piecewise linear, grid-node aligned, bi-Lipschitz).
Vec grid_remap_map(const Vec& x);
Mat grid_remap_gradient(const Vec& x, int n);

}  // namespace gqc
