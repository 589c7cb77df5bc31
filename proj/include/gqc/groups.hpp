#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "gqc/linalg.hpp"
#include "gqc/rng.hpp"

namespace gqc {

// Matrix Lie subgroups of GL(n,R) supported by the testers, with membership
// predicates for the group and its algebra and samplers for both.

enum class GroupTag { gl, gl_plus, sl, so, co, sp };

inline constexpr double kDetTol = 1e-12;         // invertibility guard
inline constexpr double kMembershipTol = 1e-9;   // default membership tolerance

struct GroupSpec {
  GroupTag tag = GroupTag::gl;
  int n = 2;

  GroupSpec() = default;
  GroupSpec(GroupTag t, int dim);

  std::string str() const;  // "gl", "gl+", "sl", "so", "co", "sp"
  static GroupSpec parse(std::string_view tag, int n);
};

// Standard symplectic form J = [[0, I], [-I, 0]]; n must be even.
Mat symplectic_form(int n);

bool in_group(const GroupSpec& g, const Mat& f, double tol = kMembershipTol);
bool in_algebra(const GroupSpec& g, const Mat& h, double tol = kMembershipTol);

// Orthogonal projection of an arbitrary matrix onto the algebra.
Mat project_to_algebra(const GroupSpec& g, const Mat& h);

// Independent normal entries scaled by spread, projected onto the algebra.
Mat random_algebra_element(const GroupSpec& g, double spread, Rng& rng);

// exp of a random algebra element; passes in_group with tol 1e-8.
Mat sample_group_element(const GroupSpec& g, double spread, Rng& rng);

struct RankOnePair {
  Vec a;
  Vec b;
};

// A pair (a,b) with a (x) b in the algebra, or nullopt when the only
// rank-one algebra element is zero (so(n), co(n)). Downstream checks report
// "vacuous" on an empty cone rather than silently passing.
std::optional<RankOnePair> sample_rank_one_cone(const GroupSpec& g, Rng& rng);

Mat random_rotation(int n, Rng& rng);    // Haar-ish SO(n) via exp of skew
Mat random_orthogonal(int n, Rng& rng);  // O(n): rotation times optional reflection

}  // namespace gqc
