#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "gqc/fields.hpp"
#include "test_util.hpp"

using namespace gqc;
using gqc::test::mat_diff;

namespace {

LaminateSpec aligned_laminate(int n, double h) {
  LaminateSpec s;
  s.a = Vec::basis(n, 0);
  s.b = Vec::basis(n, n - 1);
  s.slope1 = 0.5;
  s.slope2 = -0.5;
  s.fraction = 0.5;
  s.scale = h;
  return s;
}

}  // namespace

TEST_CASE("mesh volumes") {
  SUBCASE("cube cells sum to one") {
    for (int n = 2; n <= 3; ++n) {
      auto mesh = MeshedDomain::unit_cube(n, 6);
      CHECK(std::abs(mesh->total_volume() - 1.0) <= 1e-12);
    }
  }
  SUBCASE("ball volume converges at O(1/R)") {
    const double pi = 3.14159265358979323846;
    auto coarse = MeshedDomain::unit_ball(2, 16);
    auto fine = MeshedDomain::unit_ball(2, 64);
    CHECK(std::abs(coarse->total_volume() - pi) <= 12.0 / 16.0);
    CHECK(std::abs(fine->total_volume() - pi) <= 12.0 / 64.0);
    CHECK(std::abs(fine->total_volume() - pi) < std::abs(coarse->total_volume() - pi));
  }
  SUBCASE("interpolation reproduces affine data exactly") {
    auto mesh = MeshedDomain::unit_cube(2, 4);
    const Mat g(2, {0.3, -1.2, 0.7, 0.1});
    std::vector<Vec> values(mesh->vertices.size(), Vec(2));
    for (std::size_t v = 0; v < mesh->vertices.size(); ++v)
      values[v] = g * mesh->vertices[v];
    for (int c = 0; c < mesh->cell_count(); ++c)
      CHECK(mat_diff(cell_gradient(*mesh, c, values), g) <= 1e-13);
  }
}

TEST_CASE("morrey field") {
  const Vec a{0.0, 1.0}, b{1.0, 0.0};
  SUBCASE("vanishes on the unit sphere") {
    const TestField f = morrey_field(a, b, "quartic", 1.0);
    const Vec x{0.6, 0.8};  // |x| = 1
    CHECK(norm(f.smooth().displacement(x)) <= 1e-14);
  }
  SUBCASE("zero amplitude direction gives the zero field") {
    const TestField f = morrey_field(Vec{0.0, 0.0}, b, "quartic", 1.0);
    CHECK(norm(f.smooth().displacement(Vec{0.1, 0.2})) == doctest::Approx(0.0));
  }
  SUBCASE("gradient at the origin is a (x) b") {
    for (double freq : {1.0, 64.0}) {
      const TestField f = morrey_field(a, b, "quartic", freq);
      CHECK(mat_diff(f.smooth().gradient(Vec{0.0, 0.0}), rank_one(a, b)) <= 1e-12);
    }
  }
  SUBCASE("gradient matches a finite-difference probe of the displacement") {
    const TestField f = morrey_field(a, b, "quartic", 8.0);
    const Vec x{0.3, -0.2};
    const double h = 1e-6;
    const Mat g = f.smooth().gradient(x);
    for (int j = 0; j < 2; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const Vec dcol =
          (1.0 / (2.0 * h)) * (f.smooth().displacement(xp) - f.smooth().displacement(xm));
      for (int i = 0; i < 2; ++i) CHECK(g(i, j) == doctest::Approx(dcol[i]).epsilon(1e-5));
    }
  }
}

TEST_CASE("delta tensor") {
  SUBCASE("zero field gives the zero tensor") {
    auto mesh = MeshedDomain::unit_cube(2, 4);
    const TestField f = pa_from_function(mesh, [](const Vec&) { return Vec(2); });
    CHECK(delta_tensor(f).norm() == doctest::Approx(0.0));
  }
  SUBCASE("morrey delta is symmetric and rank-one at high frequency") {
    Rng rng(61);
    for (int it = 0; it < 3; ++it) {
      const Vec a = random_unit_vec(2, rng);
      const Vec b = random_unit_vec(2, rng);
      const TestField f = morrey_field(a, b);
      const DeltaTensor d = delta_tensor(f, 6);
      CHECK(d.symmetry_defect() <= 1e-8 * d.norm());
      const RankOneFit fit = delta_rank_one_fit(d, a, b);
      CHECK(fit.rel_residual <= 1e-6);
      CHECK(fit.lambda > 0.0);
    }
  }
  SUBCASE("low frequency is visibly not rank-one (the scaling matters)") {
    const Vec a{1.0, 0.0}, b{0.6, 0.8};
    const DeltaTensor d = delta_tensor(morrey_field(a, b, "quartic", 1.0), 6);
    CHECK(delta_rank_one_fit(d, a, b).rel_residual > 1e-2);
  }
  SUBCASE("piecewise-affine fields have exactly symmetric delta tensors") {
    auto mesh = MeshedDomain::unit_cube(2, 12);
    const TestField f =
        laminate_field(GroupSpec{GroupTag::sl, 2}, aligned_laminate(2, 6.0), mesh);
    const DeltaTensor d = delta_tensor(f);
    CHECK(d.symmetry_defect() <= 1e-12 * (1.0 + d.norm()));
  }
  SUBCASE("smooth-field energy matches the delta-tensor contraction") {
    // |1 + D|^2 integrates to n |B| + trace(Delta): the divergence term
    // vanishes for compactly supported fields. The n |B| part is taken from
    // the same quadrature rule (the constant does not vanish at the sphere,
    // where the rule carries the geometric endpoint error).
    const Vec a{0.8, 0.3}, b{0.2, 0.9};
    const TestField f = morrey_field(a, b, "quartic", 16.0);
    const TestField zero = morrey_field(Vec{0.0, 0.0}, b, "quartic", 16.0);
    const DeltaTensor d = delta_tensor(f, 8);
    double tr = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) tr += d.at(i, j, i, j);
    const Potential w = builtin_potential("frobenius_sq", 2);
    const double e = energy(w, Mat::identity(2), f, 8);
    const double e_zero = energy(w, Mat::identity(2), zero, 8);
    CHECK(e - e_zero == doctest::Approx(tr).epsilon(1e-6));
  }
}

TEST_CASE("laminate fields") {
  const GroupSpec sl2{GroupTag::sl, 2};
  SUBCASE("aligned configuration has exactly the two interior gradients") {
    auto mesh = MeshedDomain::unit_cube(2, 16);  // resolution = 2h per axis
    const TestField f = laminate_field(sl2, aligned_laminate(2, 8.0), mesh);
    const auto& pa = f.pa();
    const Mat g1 = 0.5 * rank_one(Vec{1.0, 0.0}, Vec{0.0, 1.0});  // +1/2 slope
    int exact_cells = 0;
    for (int c = 0; c < pa.mesh->cell_count(); ++c) {
      if (!pa.exact_laminate[static_cast<std::size_t>(c)]) continue;
      ++exact_cells;
      const double d1 = mat_diff(pa.disp_grad[static_cast<std::size_t>(c)], g1);
      const double d2 = mat_diff(pa.disp_grad[static_cast<std::size_t>(c)], (-1.0) * g1);
      CHECK(std::min(d1, d2) <= 1e-14);
      CHECK(std::abs(det(Mat::identity(2) + pa.disp_grad[static_cast<std::size_t>(c)]) - 1.0) <=
            1e-14);
    }
    CHECK(exact_cells > 0);
  }
  SUBCASE("mean gradient is the identity (discrete divergence theorem)") {
    auto mesh = MeshedDomain::unit_cube(2, 16);
    const TestField f = laminate_field(sl2, aligned_laminate(2, 8.0), mesh);
    CHECK(mat_diff(mean_gradient(f), Mat::identity(2)) <= 1e-10);
  }
  SUBCASE("generic direction laminate on gl+ builds and stays admissible") {
    Rng rng(62);
    auto mesh = MeshedDomain::unit_cube(2, 16);
    LaminateSpec spec = aligned_laminate(2, 8.0);
    spec.a = random_unit_vec(2, rng);
    spec.b = random_unit_vec(2, rng);
    spec.slope1 = 0.4;
    spec.slope2 = -0.4;
    const TestField f = laminate_field(GroupSpec{GroupTag::gl_plus, 2}, spec, mesh);
    for (int c = 0; c < f.pa().mesh->cell_count(); ++c)
      CHECK(det(Mat::identity(2) + f.pa().disp_grad[static_cast<std::size_t>(c)]) > 0.0);
  }
  SUBCASE("nonzero mean slopes are rejected") {
    auto mesh = MeshedDomain::unit_cube(2, 8);
    LaminateSpec spec = aligned_laminate(2, 4.0);
    spec.slope2 = -0.2;
    CHECK_THROWS_AS((void)laminate_field(sl2, spec, mesh), std::invalid_argument);
  }
  SUBCASE("sl requires orthogonal directions") {
    auto mesh = MeshedDomain::unit_cube(2, 8);
    LaminateSpec spec = aligned_laminate(2, 4.0);
    spec.b = spec.a;
    CHECK_THROWS_AS((void)laminate_field(sl2, spec, mesh), std::invalid_argument);
  }
  SUBCASE("gl+ rejects slopes that cross det = 0") {
    auto mesh = MeshedDomain::unit_cube(2, 8);
    LaminateSpec spec = aligned_laminate(2, 4.0);
    spec.b = spec.a;  // a.b = 1
    spec.slope1 = 1.5;
    spec.slope2 = -1.5;
    CHECK_THROWS_AS((void)laminate_field(GroupSpec{GroupTag::gl_plus, 2}, spec, mesh),
                    std::invalid_argument);
  }
  SUBCASE("three-dimensional laminates build, stay admissible, and average to 1") {
    auto mesh = MeshedDomain::unit_cube(3, 8);
    const TestField f =
        laminate_field(GroupSpec{GroupTag::sl, 3}, aligned_laminate(3, 4.0), mesh);
    for (int c = 0; c < mesh->cell_count(); ++c)
      CHECK(det(Mat::identity(3) + f.pa().disp_grad[static_cast<std::size_t>(c)]) > 0.0);
    CHECK(mat_diff(mean_gradient(f), Mat::identity(3)) <= 1e-10);
    const Potential w = builtin_potential("frobenius_sq", 3);
    CHECK(energy(w, Mat::identity(3), f) >= w.eval(Mat::identity(3)) - 1e-10);
  }
  SUBCASE("cell affine data interpolates the vertex values (continuity)") {
    auto mesh = MeshedDomain::unit_cube(2, 12);
    const TestField f = laminate_field(sl2, aligned_laminate(2, 6.0), mesh);
    const auto& pa = f.pa();
    for (int c = 0; c < mesh->cell_count(); ++c) {
      for (int k = 0; k <= 2; ++k) {
        const int vi = mesh->cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
        const Vec x = mesh->vertices[static_cast<std::size_t>(vi)];
        const Vec val = pa.disp_grad[static_cast<std::size_t>(c)] * x +
                        pa.disp_offset[static_cast<std::size_t>(c)];
        CHECK(norm(val - pa.vertex_disp[static_cast<std::size_t>(vi)]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("energy") {
  const Mat f0(2, {1.5, 0.2, -0.3, 1.1});
  SUBCASE("identity field gives |Omega| w(F0)") {
    auto mesh = MeshedDomain::unit_cube(2, 8);
    const TestField f = pa_from_function(mesh, [](const Vec&) { return Vec(2); });
    const Potential w = builtin_potential("frobenius_sq", 2);
    CHECK(energy(w, f0, f) == doctest::Approx(w.eval(f0)).epsilon(1e-12));
  }
  SUBCASE("det energy against a hand-summed two-cell oracle") {
    // tent displacement on a 2-cell-per-axis mesh, independent direct sum
    auto mesh = MeshedDomain::unit_cube(2, 2);
    auto tent = [](const Vec& x) {
      const double hat = std::max(
          0.0, 1.0 - 2.0 * std::max(std::abs(x[0] - 0.5), std::abs(x[1] - 0.5)));
      return Vec{0.15 * hat, -0.1 * hat};
    };
    const TestField f = pa_from_function(mesh, tent);
    const Potential w = builtin_potential("det", 2);
    double oracle = 0.0;
    for (int c = 0; c < mesh->cell_count(); ++c)
      oracle += mesh->volumes[static_cast<std::size_t>(c)] *
                det(Mat::identity(2) + f.pa().disp_grad[static_cast<std::size_t>(c)]);
    CHECK(oracle == doctest::Approx(1.0).epsilon(1e-12));  // null Lagrangian
    CHECK(energy(w, Mat::identity(2), f) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(energy(w, f0, f) == doctest::Approx(det(f0)).epsilon(1e-12));
  }
  SUBCASE("uniform conformal gradient identity: w(A R/eps) - w(A) = n log eps") {
    Rng rng(63);
    const Potential w = builtin_potential("neg_log_abs_det", 3);
    for (int it = 0; it < 100; ++it) {
      const Mat a = sample_group_element(GroupSpec{GroupTag::gl, 3}, 0.8, rng);
      const Mat r = random_orthogonal(3, rng);
      const double eps = rng.uniform(0.1, 0.9);
      CHECK(std::abs(uniform_conformal_gap(w, a, r, eps) - 3.0 * std::log(eps)) <= 1e-12 * 10);
    }
  }
  SUBCASE("laminate gap matches the 1-d Jensen oracle") {
    auto mesh = MeshedDomain::unit_cube(2, 32);
    const GroupSpec gl2{GroupTag::gl, 2};
    LaminateSpec spec = aligned_laminate(2, 16.0);
    const TestField f = laminate_field(gl2, spec, mesh);
    const Potential w = builtin_potential("frobenius_sq", 2);
    // restriction to the rank-one line t -> w(F(1 + t a(x)b))
    const Mat dir = rank_one(spec.a, spec.b);
    auto line = [&](double t) { return w.eval(f0 * (Mat::identity(2) + t * dir)); };
    const double jensen = spec.fraction * line(spec.slope1) +
                          (1.0 - spec.fraction) * line(spec.slope2) - line(0.0);
    const double gap = energy(w, f0, f) - w.eval(f0);
    // band volume ~ delta, discretization ~ 1/h
    CHECK(std::abs(gap - jensen) <= (1.0 / spec.scale + spec.fraction / spec.scale) * 10.0);
  }
  SUBCASE("band energy is reported separately and stays O(cutoff)") {
    auto mesh = MeshedDomain::unit_cube(2, 16);
    const TestField f =
        laminate_field(GroupSpec{GroupTag::gl, 2}, aligned_laminate(2, 8.0), mesh);
    const Potential w = builtin_potential("frobenius_sq", 2);
    const EnergyBreakdown eb = energy_breakdown(w, Mat::identity(2), f);
    CHECK(eb.total == doctest::Approx(energy(w, Mat::identity(2), f)));
    // the band occupies a boundary strip of width ~ max(cutoff, 2/resolution)
    double band_vol = 0.0;
    for (int c = 0; c < mesh->cell_count(); ++c)
      if (f.pa().in_band[static_cast<std::size_t>(c)])
        band_vol += mesh->volumes[static_cast<std::size_t>(c)];
    CHECK(std::abs(eb.band) <= band_vol * 4.0);  // |w| <= |1+D|^2 <= ~3 there
    CHECK(band_vol <= 8.0 * (2.0 / 16.0));
  }
  SUBCASE("domain violation reports the cell") {
    auto mesh = MeshedDomain::unit_cube(2, 2);
    const TestField f = pa_from_function(mesh, [](const Vec&) { return Vec(2); });
    const Potential w = builtin_potential("neg_log_abs_det", 2);
    try {
      (void)energy(w, Mat(2, {1.0, 0.0, 0.0, 0.0}), f);  // singular F0
      CHECK(false);
    } catch (const std::domain_error& e) {
      CHECK(std::string(e.what()).find("cell") != std::string::npos);
    }
  }
}

TEST_CASE("mean-gradient identity for assorted compactly supported fields") {
  Rng rng(64);
  auto mesh = MeshedDomain::unit_cube(2, 10);
  for (int it = 0; it < 10; ++it) {
    std::vector<Vec> bumps(mesh->vertices.size(), Vec(2));
    const TestField f = pa_from_function(mesh, [&](const Vec&) {
      return Vec{0.02 * rng.normal(), 0.02 * rng.normal()};
    });
    CHECK(mat_diff(mean_gradient(f), Mat::identity(2)) <= 1e-10);
  }
}

TEST_CASE("ball_to_eta_conversion") {
  auto mesh = MeshedDomain::unit_cube(2, 8);
  const Mat fmat(2, {2.0, 0.5, -0.5, 1.5});
  SUBCASE("identity map gives the zero field") {
    const TestField phi = pa_from_function(mesh, [](const Vec&) { return Vec(2); });
    const TestField eta = ball_to_eta_conversion(phi, fmat);
    for (const auto& g : eta.pa().disp_grad) CHECK(max_abs(g) == doctest::Approx(0.0));
  }
  SUBCASE("F = 1 returns phi - id") {
    const TestField phi = laminate_field(GroupSpec{GroupTag::gl, 2}, aligned_laminate(2, 4.0),
                                         mesh);
    const TestField eta = ball_to_eta_conversion(phi, Mat::identity(2));
    for (int c = 0; c < mesh->cell_count(); ++c)
      CHECK(mat_diff(eta.pa().disp_grad[static_cast<std::size_t>(c)],
                     phi.pa().disp_grad[static_cast<std::size_t>(c)]) == doctest::Approx(0.0));
  }
  SUBCASE("cell-wise F + D(eta) = F D(phi)") {
    const TestField phi = laminate_field(GroupSpec{GroupTag::gl, 2}, aligned_laminate(2, 4.0),
                                         mesh);
    const TestField eta = ball_to_eta_conversion(phi, fmat);
    for (int c = 0; c < mesh->cell_count(); ++c) {
      const Mat lhs = fmat + eta.pa().disp_grad[static_cast<std::size_t>(c)];
      const Mat rhs =
          fmat * (Mat::identity(2) + phi.pa().disp_grad[static_cast<std::size_t>(c)]);
      CHECK(mat_diff(lhs, rhs) <= 1e-14 * (1.0 + frobenius_norm(rhs)));
    }
  }
}

TEST_CASE("left/right energy probes agree in verdict (multiplication side)") {
  auto mesh = MeshedDomain::unit_cube(2, 16);
  const Mat f0(2, {1.4, 0.3, -0.1, 0.9});
  const TestField f = laminate_field(GroupSpec{GroupTag::gl, 2}, aligned_laminate(2, 8.0), mesh);
  const Potential convex = builtin_potential("frobenius_sq", 2);
  const Potential concave = negate(builtin_potential("frobenius_sq", 2));
  const double base_convex = convex.eval(f0), base_concave = concave.eval(f0);
  const double left_cx = energy(convex, f0, f, 6, MulSide::left) - base_convex;
  const double right_cx = energy(convex, f0, f, 6, MulSide::right) - base_convex;
  const double left_cc = energy(concave, f0, f, 6, MulSide::left) - base_concave;
  const double right_cc = energy(concave, f0, f, 6, MulSide::right) - base_concave;
  CHECK(left_cx >= -1e-10);
  CHECK(right_cx >= -1e-10);
  CHECK(left_cc < -1e-4);
  CHECK(right_cc < -1e-4);
}

TEST_CASE("domain irrelevance: laminate gap signs agree between cube and ball") {
  const GroupSpec gl2{GroupTag::gl, 2};
  LaminateSpec spec = aligned_laminate(2, 8.0);
  auto cube = MeshedDomain::unit_cube(2, 16);
  auto ball = MeshedDomain::unit_ball(2, 32);  // width 2: grid step 1/16
  const TestField f_cube = laminate_field(gl2, spec, cube);
  const TestField f_ball = laminate_field(gl2, spec, ball);
  const Potential convex = builtin_potential("frobenius_sq", 2);
  const Potential concave = negate(builtin_potential("frobenius_sq", 2));
  const Mat id = Mat::identity(2);
  const double vol_cube = cube->total_volume(), vol_ball = ball->total_volume();
  CHECK(energy(convex, id, f_cube) - vol_cube * convex.eval(id) >= -1e-10);
  CHECK(energy(convex, id, f_ball) - vol_ball * convex.eval(id) >= -1e-10);
  CHECK(energy(concave, id, f_cube) - vol_cube * concave.eval(id) < -1e-5);
  CHECK(energy(concave, id, f_ball) - vol_ball * concave.eval(id) < -1e-5);
}

TEST_CASE("quasiconvexity probe") {
  const Mat id = Mat::identity(2);
  SUBCASE("convex potentials see no violation") {
    const Potential w = builtin_potential("frobenius_sq", 2);
    const CheckReport rep =
        quasiconvexity_probe(w, GroupSpec{GroupTag::gl, 2}, id, ProbeFamily{}, 100, 1e-7, 71);
    CHECK(rep.verdict == Verdict::pass);
  }
  SUBCASE("iso(neg_sum_log) on gl+ sees no violation") {
    const Potential w = iso_family(make_gauge("neg_sum_log"), 2);
    const CheckReport rep =
        quasiconvexity_probe(w, GroupSpec{GroupTag::gl_plus, 2}, id, ProbeFamily{}, 100, 1e-7, 72);
    CHECK(rep.verdict == Verdict::pass);
  }
  SUBCASE("negated frobenius is caught with a witness") {
    const Potential w = negate(builtin_potential("frobenius_sq", 2));
    const CheckReport rep =
        quasiconvexity_probe(w, GroupSpec{GroupTag::gl, 2}, id, ProbeFamily{}, 60, 1e-7, 73);
    CHECK(rep.verdict == Verdict::fail);
    CHECK(rep.metadata.count("worst_field") == 1);
  }
  SUBCASE("sl probes use cone-admissible laminates") {
    const Potential w = builtin_potential("frobenius_sq", 2);
    const CheckReport rep =
        quasiconvexity_probe(w, GroupSpec{GroupTag::sl, 2}, id, ProbeFamily{}, 40, 1e-7, 74);
    CHECK(rep.verdict == Verdict::pass);
  }
}

TEST_CASE("field JSON round trip") {
  auto mesh = MeshedDomain::unit_cube(2, 8);
  const TestField f =
      laminate_field(GroupSpec{GroupTag::sl, 2}, aligned_laminate(2, 4.0), mesh);
  const nlohmann::json j = field_to_json(f);
  const TestField g = field_from_json(j);
  REQUIRE(g.piecewise_affine());
  REQUIRE(g.pa().mesh->cell_count() == f.pa().mesh->cell_count());
  for (int c = 0; c < mesh->cell_count(); ++c)
    CHECK(mat_diff(f.pa().disp_grad[static_cast<std::size_t>(c)],
                   g.pa().disp_grad[static_cast<std::size_t>(c)]) <= 1e-14);
  const Potential w = builtin_potential("frobenius_sq", 2);
  CHECK(energy(w, Mat::identity(2), f) == doctest::Approx(energy(w, Mat::identity(2), g)));

  const TestField m = morrey_field(Vec{1.0, 0.0}, Vec{0.0, 1.0}, "quartic", 32.0);
  const TestField m2 = field_from_json(field_to_json(m));
  CHECK(m2.smooth().frequency == doctest::Approx(32.0));
}
