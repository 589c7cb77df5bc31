#include <doctest.h>

#include <stdexcept>

#include "gqc/groups.hpp"
#include "gqc/potentials.hpp"
#include "test_util.hpp"

using namespace gqc;
using gqc::test::mat_diff;
using gqc::test::rotation2;

TEST_CASE("in_group examples") {
  CHECK(in_group(GroupSpec{GroupTag::sl, 2}, Mat(2, {2.0, 0.0, 0.0, 0.5}), 1e-9));
  CHECK_FALSE(in_group(GroupSpec{GroupTag::gl_plus, 2}, Mat(2, {1.0, 0.0, 0.0, -1.0})));
  CHECK(in_group(GroupSpec{GroupTag::so, 2}, rotation2(0.3), 1e-9));
  CHECK_FALSE(in_group(GroupSpec{GroupTag::so, 2}, 2.0 * rotation2(0.3), 1e-9));
  CHECK(in_group(GroupSpec{GroupTag::co, 2}, 2.0 * rotation2(0.3), 1e-9));
  CHECK(in_group(GroupSpec{GroupTag::gl, 2}, Mat(2, {1.0, 0.0, 0.0, -1.0})));
}

TEST_CASE("in_algebra examples") {
  CHECK(in_algebra(GroupSpec{GroupTag::sl, 2}, Mat(2, {1.0, 0.0, 0.0, -1.0}), 1e-12));
  CHECK_FALSE(in_algebra(GroupSpec{GroupTag::sl, 2}, Mat::identity(2), 1e-12));
  CHECK(in_algebra(GroupSpec{GroupTag::gl, 2}, Mat(2, {5.0, 3.0, -2.0, 7.0})));
  CHECK(in_algebra(GroupSpec{GroupTag::so, 2}, Mat(2, {0.0, 1.0, -1.0, 0.0}), 1e-12));
  CHECK(in_algebra(GroupSpec{GroupTag::co, 2}, Mat(2, {3.0, 1.0, -1.0, 3.0}), 1e-12));
  CHECK(in_algebra(GroupSpec{GroupTag::sp, 2}, Mat(2, {1.0, 0.5, 0.25, -1.0}), 1e-12));
}

TEST_CASE("GroupSpec validation and parsing") {
  CHECK_THROWS_AS(GroupSpec(GroupTag::sp, 3), std::invalid_argument);
  CHECK(GroupSpec::parse("gl+", 3).tag == GroupTag::gl_plus);
  CHECK_THROWS_AS(GroupSpec::parse("nope", 2), std::invalid_argument);
}

TEST_CASE("rank-one cone sampling") {
  SUBCASE("sl pairs are orthogonal") {
    Rng rng(3);
    for (int it = 0; it < 200; ++it) {
      const auto p = sample_rank_one_cone(GroupSpec{GroupTag::sl, 2 + it % 3}, rng);
      REQUIRE(p.has_value());
      CHECK(std::abs(dot(p->a, p->b)) <= 1e-14);
    }
  }
  SUBCASE("so and co cones are empty") {
    Rng rng(4);
    CHECK_FALSE(sample_rank_one_cone(GroupSpec{GroupTag::so, 3}, rng).has_value());
    CHECK_FALSE(sample_rank_one_cone(GroupSpec{GroupTag::co, 2}, rng).has_value());
  }
  SUBCASE("gl pairs are nonzero and in the algebra") {
    Rng rng(5);
    const auto p = sample_rank_one_cone(GroupSpec{GroupTag::gl, 2}, rng);
    REQUIRE(p.has_value());
    CHECK(norm(p->a) > 0.0);
    CHECK(in_algebra(GroupSpec{GroupTag::gl, 2}, rank_one(p->a, p->b)));
  }
  SUBCASE("cone members pass in_algebra at 1e-10") {
    Rng rng(6);
    for (GroupTag tag : {GroupTag::gl, GroupTag::gl_plus, GroupTag::sl, GroupTag::sp}) {
      for (int it = 0; it < 100; ++it) {
        const int n = (tag == GroupTag::sp) ? (it % 2 ? 2 : 4) : 2 + it % 3;
        const GroupSpec g{tag, n};
        const auto p = sample_rank_one_cone(g, rng);
        REQUIRE(p.has_value());
        CHECK(in_algebra(g, rank_one(p->a, p->b), 1e-10));
      }
    }
  }
}

TEST_CASE("sample_group_element") {
  SUBCASE("zero spread gives the identity") {
    Rng rng(8);
    CHECK(mat_diff(sample_group_element(GroupSpec{GroupTag::sl, 2}, 0.0, rng),
                   Mat::identity(2)) == doctest::Approx(0.0));
  }
  SUBCASE("sl elements have unit determinant") {
    Rng rng(9);
    for (int it = 0; it < 200; ++it) {
      const Mat f = sample_group_element(GroupSpec{GroupTag::sl, 3}, 1.0, rng);
      CHECK(std::abs(det(f) - 1.0) <= 1e-10);
    }
  }
  SUBCASE("so elements are orthogonal") {
    Rng rng(10);
    for (int it = 0; it < 200; ++it) {
      const Mat f = sample_group_element(GroupSpec{GroupTag::so, 3}, 1.0, rng);
      CHECK(mat_diff(transpose(f) * f, Mat::identity(3)) <= 1e-10);
    }
  }
}

TEST_CASE("exp consistency for every group") {
  Rng rng(12);
  for (GroupTag tag :
       {GroupTag::gl, GroupTag::gl_plus, GroupTag::sl, GroupTag::so, GroupTag::co, GroupTag::sp}) {
    for (int it = 0; it < 1000; ++it) {
      const int n = (tag == GroupTag::sp) ? (it % 2 ? 2 : 4) : 2 + it % 3;
      const GroupSpec g{tag, n};
      const Mat h = random_algebra_element(g, 0.6, rng);
      CHECK(in_group(g, mat_exp(h), 1e-8));
    }
  }
}

TEST_CASE("conjugation closure for sl, gl, gl+") {
  Rng rng(14);
  for (GroupTag tag : {GroupTag::sl, GroupTag::gl, GroupTag::gl_plus}) {
    const GroupSpec g{tag, 2};
    const Mat u = normal_mat(2, rng) + 3.0 * Mat::identity(2);
    const Mat uinv = inverse(u);
    for (int it = 0; it < 100; ++it) {
      const Mat f = sample_group_element(g, 0.8, rng);
      CHECK(in_group(g, u * f * uinv, 1e-7));
    }
  }
}

TEST_CASE("conjugate_potential") {
  const int n = 2;
  const Potential tr{"trace", GroupSpec{GroupTag::gl, n},
                     [](const Mat& f) { return trace(f); }, {}};
  SUBCASE("identity conjugator is a no-op") {
    const Potential c = conjugate_potential(tr, Mat::identity(n));
    Rng rng(15);
    for (int it = 0; it < 20; ++it) {
      const Mat f = sample_group_element(GroupSpec{GroupTag::gl, n}, 0.7, rng);
      CHECK(c.eval(f) == doctest::Approx(tr.eval(f)));
    }
  }
  SUBCASE("det-based potentials are conjugation invariant") {
    const Potential w = builtin_potential("neg_log_abs_det", n);
    const Mat u(2, {1.0, 2.0, 0.0, 3.0});
    const Potential c = conjugate_potential(w, u);
    Rng rng(16);
    for (int it = 0; it < 20; ++it) {
      const Mat f = sample_group_element(GroupSpec{GroupTag::gl, n}, 0.7, rng);
      CHECK(c.eval(f) == doctest::Approx(w.eval(f)).epsilon(1e-10));
    }
  }
  SUBCASE("direct 2x2 product") {
    // U F U^{-1} = [[1,4],[0,1]] for U = diag(2, 1/2), F = [[1,1],[0,1]]
    const Potential c = conjugate_potential(tr, Mat(2, {2.0, 0.0, 0.0, 0.5}));
    CHECK(c.eval(Mat(2, {1.0, 1.0, 0.0, 1.0})) == doctest::Approx(2.0));
  }
  SUBCASE("constraint violation is reported") {
    const Potential wso{"tr_so", GroupSpec{GroupTag::so, 2},
                        [](const Mat& f) { return trace(f); }, {}};
    CHECK_THROWS_AS((void)conjugate_potential(wso, Mat(2, {2.0, 0.0, 0.0, 1.0})),
                    std::invalid_argument);
  }
}
