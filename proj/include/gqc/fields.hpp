#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gqc/mesh.hpp"
#include "gqc/potentials.hpp"
#include "gqc/report.hpp"

namespace gqc {

// A compactly supported displacement field. Piecewise-affine fields carry
// exact per-cell affine data (energies become exact sums); smooth fields
// carry analytic evaluators and are integrated by Gauss quadrature.
struct PiecewiseAffineField {
  std::shared_ptr<const MeshedDomain> mesh;
  std::vector<Vec> vertex_disp;            // displacement at mesh vertices
  std::vector<Mat> disp_grad;              // per-cell D(eta)
  std::vector<Vec> disp_offset;            // eta(x) = disp_grad x + disp_offset
  std::vector<std::uint8_t> in_support;    // cells with nonzero displacement
  std::vector<std::uint8_t> in_band;       // cutoff band cells
  std::vector<std::uint8_t> exact_laminate;  // cells with gradient exactly 1 + s a(x)b
};

struct SmoothField {
  int n = 2;
  std::function<Vec(const Vec&)> displacement;
  std::function<Mat(const Vec&)> gradient;  // analytic D(eta)
  Vec axis;                 // oscillation direction (unit)
  double wavenumber = 1.0;  // oscillation scale along axis, for quadrature panels
  // reconstruction data
  std::string kind;  // "morrey"
  Vec param_a, param_b;
  std::string profile;
  double frequency = 1.0;
};

struct TestField {
  std::variant<PiecewiseAffineField, SmoothField> data;

  bool piecewise_affine() const { return std::holds_alternative<PiecewiseAffineField>(data); }
  const PiecewiseAffineField& pa() const { return std::get<PiecewiseAffineField>(data); }
  const SmoothField& smooth() const { return std::get<SmoothField>(data); }
  int dim() const;
};

// P1 interpolant of an arbitrary displacement on a mesh. With pin_boundary
// (the default) displacements are zeroed at boundary vertices so the field
// has identity boundary; sequence elements converging to a non-identity
// limit map pass false.
TestField pa_from_function(std::shared_ptr<const MeshedDomain> mesh,
                           const std::function<Vec(const Vec&)>& disp, bool pin_boundary = true);

inline constexpr double kMorreyDefaultFrequency = 8192.0;

// eta(x) = u(|x|^2) sin(s b.x) a / s on the unit ball, with profile u from a
// fixed menu (default "quartic": u(t) = (1-t)^2, u(1) = 0) and s the
// oscillation frequency. s = 1 is the bare field; the rank-one structure of
// the Delta tensor emerges as s grows.
TestField morrey_field(const Vec& a, const Vec& b, std::string_view profile = "quartic",
                       double frequency = kMorreyDefaultFrequency);

struct DeltaTensor {
  int n = 2;
  std::array<double, 256> d{};

  double& at(int i, int j, int k, int l) {
    return d[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)];
  }
  double at(int i, int j, int k, int l) const {
    return d[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)];
  }
  double norm() const;
  // max |D_ijkl - D_ilkj|
  double symmetry_defect() const;
};

// Integral of D(eta) (x) D(eta) over the field's domain.
DeltaTensor delta_tensor(const TestField& field, int quadrature_order = 6);

struct RankOneFit {
  double lambda = 0.0;
  double rel_residual = 0.0;
};
// Least-squares fit of D to lambda * a_i b_j a_k b_l.
RankOneFit delta_rank_one_fit(const DeltaTensor& d, const Vec& a, const Vec& b);

struct LaminateSpec {
  Vec a;
  Vec b;
  double slope1 = 1.0;
  double slope2 = -1.0;
  double fraction = 0.5;  // lambda; zero mean requires lambda s1 + (1-lambda) s2 = 0
  double scale = 8.0;     // h: sawtooth frequency, sup-norm of displacement ~ C/h
  double cutoff = 0.0;    // delta: band width; 0 selects fraction/(scale |b|),
                          // which aligns the clamp kinks with the mesh diagonals
};

// Sawtooth displacement chi(h b.x)/h a with amplitude clamped to zero
// towards the boundary, sampled through the P1 interpolant. Interior
// kink-free cells carry gradient exactly 1 + s_i a(x)b; band and
// kink-crossing cells are flagged. Cell-wise admissibility is enforced for
// the claimed group (det > 0 in the band; det == 1 on exact cells for SL).
// Throws std::invalid_argument on infeasible slope/fraction combinations.
TestField laminate_field(const GroupSpec& g, const LaminateSpec& spec,
                         std::shared_ptr<const MeshedDomain> mesh);

enum class MulSide { left, right };

// Sum over cells of |cell| w(F0 Du) for piecewise-affine fields (exact);
// Gauss quadrature for smooth fields. Du is the map gradient 1 + D(eta).
// Domain violations rethrow with the offending cell index.
double energy(const Potential& w, const Mat& f0, const TestField& field,
              int quadrature_order = 6, MulSide side = MulSide::left);

struct EnergyBreakdown {
  double total = 0.0;
  double band = 0.0;  // contribution of cutoff-band cells
};
EnergyBreakdown energy_breakdown(const Potential& w, const Mat& f0, const TestField& field,
                                 int quadrature_order = 6, MulSide side = MulSide::left);

// (1/|Omega|) sum |cell| Du; equals the identity for compactly supported
// fields (discrete divergence theorem).
Mat mean_gradient(const TestField& field);

// eta = F (phi - id) for a map field phi with identity boundary;
// cell-wise F + D(eta) = F D(phi) holds exactly.
TestField ball_to_eta_conversion(const TestField& phi_field, const Mat& f);

// Per-volume gap of the conditional uniform-gradient witness: w(A R / eps) - w(A).
double uniform_conformal_gap(const Potential& w, const Mat& a, const Mat& r, double eps);

// Evaluate a piecewise-affine field's displacement at an arbitrary point of
// its (structured) domain. Exact on cell closures.
Vec evaluate_pa(const TestField& field, const Vec& x);

// The same piecewise-affine function on the dyadically refined mesh (Kuhn
// triangulations are nested, so the refined field is bit-for-bit the same
// function and all energies are mesh independent).
TestField refine_pa(const TestField& base, int factor);

struct ProbeFamily {
  bool laminates = true;
  bool perturbations = true;
  double slope_max = 1.0;
  std::vector<double> scales = {4.0, 8.0};
  int resolution = 16;
  double perturbation_amplitude = 0.25;  // relative to the mesh step
};

// Search over laminates and admissibility-projected random perturbations for
// energy(w,F,field) < |Omega| w(F) - tol. A negative worst gap certifies
// non-quasiconvexity (the witness field is genuinely admissible); a
// nonnegative worst gap is evidence only.
CheckReport quasiconvexity_probe(const Potential& w, const GroupSpec& g, const Mat& f,
                                 const ProbeFamily& family, long budget, double tol,
                                 std::uint64_t seed);

nlohmann::json field_to_json(const TestField& field);
TestField field_from_json(const nlohmann::json& j);

}  // namespace gqc
