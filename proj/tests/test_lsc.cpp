#include <doctest.h>

#include <cmath>

#include "gqc/lsc.hpp"
#include "test_util.hpp"

using namespace gqc;
using gqc::test::mat_diff;

TEST_CASE("build_sequence laminate scaling") {
  const GroupSpec g{GroupTag::sl, 2};
  SequenceSpec spec = SequenceSpec::defaults(2);
  spec.scales = {4, 8, 16, 32};
  const auto fields = build_sequence(spec, g);
  REQUIRE(fields.size() == 4);

  SUBCASE("sup-norms scale like C/h") {
    const auto diag = weak_star_diagnostics(fields, spec);
    // amplitude of the sawtooth is fraction * slope1 / h = 0.25 / h
    for (std::size_t i = 0; i < diag.size(); ++i) {
      const double expected = 0.25 / diag[i][0];
      CHECK(diag[i][1] <= 2.0 * expected);
      CHECK(diag[i][1] >= 0.5 * expected);
    }
  }
  SUBCASE("consecutive sup-norm ratios sit near 1/2 for doubling h") {
    const auto diag = weak_star_diagnostics(fields, spec);
    for (std::size_t i = 0; i + 1 < diag.size(); ++i) {
      const double ratio = diag[i + 1][1] / diag[i][1];
      CHECK(ratio >= 0.4);
      CHECK(ratio <= 0.6);
    }
  }
  SUBCASE("gradients stay uniformly bounded") {
    const auto diag = weak_star_diagnostics(fields, spec);
    for (const auto& row : diag) CHECK(row[2] <= 4.0);
  }
}

TEST_CASE("zero-amplitude laminate sequence is the identity") {
  const GroupSpec g{GroupTag::sl, 2};
  SequenceSpec spec = SequenceSpec::defaults(2);
  spec.base.slope1 = 0.0;
  spec.base.slope2 = 0.0;
  spec.scales = {4, 8};
  const auto fields = build_sequence(spec, g);
  const auto diag = weak_star_diagnostics(fields, spec);
  for (const auto& row : diag) CHECK(row[1] == doctest::Approx(0.0));
}

TEST_CASE("composed generator satisfies the chain rule on exact cells") {
  const GroupSpec g{GroupTag::gl_plus, 2};
  SequenceSpec spec = SequenceSpec::defaults(2);
  spec.generator = SequenceSpec::Generator::composed;
  spec.scales = {4.0};
  const auto fields = build_sequence(spec, g);
  REQUIRE(fields.size() == 1);
  const auto& pa = fields[0].pa();
  const auto& mesh = *pa.mesh;

  // laminate gradient of the inner field at y, from the sawtooth piece
  const double h = 4.0;
  auto inner_slope = [&](double y1) {
    const double zeta = h * y1;
    const double u = zeta - std::floor(zeta);
    return (u < 0.5) ? 0.5 : -0.5;
  };
  const double delta = 0.5 / h;  // default cutoff
  int checked = 0;
  for (int c = 0; c < mesh.cell_count(); ++c) {
    // centroid, pushed through the remap
    Vec cent(2);
    for (int k = 0; k <= 2; ++k)
      cent = cent + (1.0 / 3.0) *
                        mesh.vertices[static_cast<std::size_t>(
                            mesh.cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)])];
    const Vec y = grid_remap_map(cent);
    // skip the cutoff band and remap-kink cells
    if (std::min({y[0], 1.0 - y[0], y[1], 1.0 - y[1]}) < delta + 0.1) continue;
    if (std::abs(cent[0] - 0.25) < 0.1) continue;
    // skip cells crossing a sawtooth kink
    const double margin = 0.3 / (2.0 * h);
    const double frac = h * y[1] - std::floor(h * y[1]);
    if (std::min(std::abs(frac - 0.5), std::min(frac, 1.0 - frac)) * (1.0 / h) < margin) continue;
    const Mat du_h = Mat::identity(2) + inner_slope(y[1]) * rank_one(Vec{1.0, 0.0}, Vec{0.0, 1.0});
    const Mat du = grid_remap_gradient(cent, 2);
    const Mat expected = du_h * du;
    const Mat got = Mat::identity(2) + pa.disp_grad[static_cast<std::size_t>(c)];
    if (mat_diff(got, expected) <= 1e-12) ++checked;
  }
  CHECK(checked > 30);
}

TEST_CASE("composed gradient bound is submultiplicative away from kink pullbacks") {
  const GroupSpec g{GroupTag::gl_plus, 2};
  SequenceSpec spec = SequenceSpec::defaults(2);
  spec.generator = SequenceSpec::Generator::composed;
  spec.limit_map = "grid_remap";
  spec.scales = {4.0};
  const auto fields = build_sequence(spec, g);
  const auto& pa = fields[0].pa();
  const auto& mesh = *pa.mesh;
  // bound(u_h): max map-gradient norm of the plain laminate; bound(u): the
  // remap operator norm (slope 2)
  SequenceSpec plain = SequenceSpec::defaults(2);
  plain.scales = spec.scales;
  const auto lam = build_sequence(plain, g);
  const double bound_uh = weak_star_diagnostics(lam, plain)[0][2];
  const double bound_u = 2.0;
  const double h = 4.0, delta = 0.5 / h;
  double global = 0.0;
  for (int c = 0; c < mesh.cell_count(); ++c) {
    Vec cent(2);
    for (int k = 0; k <= 2; ++k)
      cent = cent + (1.0 / 3.0) *
                        mesh.vertices[static_cast<std::size_t>(
                            mesh.cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)])];
    const double gn = frobenius_norm(Mat::identity(2) + pa.disp_grad[static_cast<std::size_t>(c)]);
    global = std::max(global, gn);
    const Vec y = grid_remap_map(cent);
    const bool in_band = std::min({y[0], 1.0 - y[0], y[1], 1.0 - y[1]}) < delta + 0.05;
    const bool near_remap_kink = std::abs(cent[0] - 0.25) < 0.05;
    if (in_band || near_remap_kink) continue;
    CHECK(gn <= bound_uh * bound_u + 1e-9);
  }
  // uniform boundedness also holds in the kink-pullback cells, with the P1
  // reconstruction constant on top of the product bound
  CHECK(global <= 3.0 * bound_uh * bound_u);
}

TEST_CASE("lsc_experiment") {
  const GroupSpec g{GroupTag::gl_plus, 2};
  const Mat f0 = Mat::identity(2);
  SUBCASE("endorsed iso-family potentials pass over laminate sequences") {
    SequenceSpec spec = SequenceSpec::defaults(2);
    spec.scales = {4, 8, 16, 32};
    for (const char* gauge : {"neg_sum_log", "log_sum_inv"}) {
      const Potential w = iso_family(make_gauge(gauge), 2);
      const LscReport rep = lsc_experiment(w, f0, spec, g, 1e-6);
      CHECK(rep.pass);
    }
  }
  SUBCASE("det is exactly flat (null Lagrangian)") {
    SequenceSpec spec = SequenceSpec::defaults(2);
    spec.scales = {4, 8, 16, 32};
    const Potential w = builtin_potential("det", 2);
    const LscReport rep = lsc_experiment(w, Mat(2, {1.3, 0.2, -0.4, 1.1}), spec, g, 1e-6);
    CHECK(rep.pass);
    for (const auto& [h, e] : rep.energies)
      CHECK(std::abs(e - rep.limit_energy) <= 1e-10);
  }
  SUBCASE("a concave potential fails with a visible drop") {
    SequenceSpec spec = SequenceSpec::defaults(2);
    spec.scales = {4, 8, 16, 32};
    const Potential w = negate(builtin_potential("frobenius_sq", 2));
    const LscReport rep = lsc_experiment(w, f0, spec, GroupSpec{GroupTag::gl, 2}, 1e-6);
    CHECK_FALSE(rep.pass);
    CHECK(rep.min_tail_energy < rep.limit_energy - 0.01);
  }
  SUBCASE("composed sequences stay exactly flat for det (null Lagrangian)") {
    SequenceSpec spec = SequenceSpec::defaults(2);
    spec.generator = SequenceSpec::Generator::composed;
    spec.scales = {4, 8};
    const Potential w = builtin_potential("det", 2);
    const LscReport rep = lsc_experiment(w, Mat(2, {1.1, 0.2, 0.0, 0.9}), spec, g, 1e-6);
    CHECK(rep.pass);
    for (const auto& [h, e] : rep.energies)
      CHECK(std::abs(e - rep.limit_energy) <= 1e-10);
    CHECK(rep.metadata.count("limit_map") == 1);  // remap limit implied
  }
  SUBCASE("bump scaling sequences behave like laminates for convex potentials") {
    SequenceSpec spec = SequenceSpec::defaults(2);
    spec.generator = SequenceSpec::Generator::bump_scaling;
    spec.scales = {2, 4, 8};
    const Potential w = builtin_potential("frobenius_sq", 2);
    const LscReport rep = lsc_experiment(w, f0, spec, g, 1e-6);
    CHECK(rep.pass);
  }
}

TEST_CASE("rank-one convex potentials pass lsc over laminate sequences") {
  const GroupSpec g{GroupTag::gl_plus, 2};
  SequenceSpec spec = SequenceSpec::defaults(2);
  spec.scales = {4, 8, 16};
  for (const char* name : {"frobenius_sq", "det", "neg_log_abs_det"}) {
    const Potential w = builtin_potential(name, 2);
    const LscReport rep = lsc_experiment(w, Mat::identity(2), spec, g, 1e-6);
    CHECK(rep.pass);
  }
}

TEST_CASE("monotone refinement: energies are mesh independent once resolved") {
  const GroupSpec g{GroupTag::gl_plus, 2};
  const Potential w = iso_family(make_gauge("log_sum_inv"), 2);
  SequenceSpec coarse = SequenceSpec::defaults(2);
  coarse.scales = {4, 8};
  coarse.resolution_factor = 2;
  SequenceSpec fine = coarse;
  fine.resolution_factor = 4;
  const LscReport r1 = lsc_experiment(w, Mat::identity(2), coarse, g, 1e-6);
  const LscReport r2 = lsc_experiment(w, Mat::identity(2), fine, g, 1e-6);
  for (std::size_t i = 0; i < r1.energies.size(); ++i)
    CHECK(std::abs(r1.energies[i].second - r2.energies[i].second) <= 1e-10);
}

TEST_CASE("lsc report serialization") {
  const GroupSpec g{GroupTag::gl_plus, 2};
  SequenceSpec spec = SequenceSpec::defaults(2);
  spec.scales = {4, 8};
  const LscReport rep =
      lsc_experiment(builtin_potential("det", 2), Mat::identity(2), spec, g, 1e-6);
  const nlohmann::json j = to_json(rep);
  CHECK(j.at("verdict") == "pass");
  CHECK(j.at("energies").size() == 2);
  const std::string csv = lsc_csv(rep);
  CHECK(csv.rfind("h,E_h", 0) == 0);
}
