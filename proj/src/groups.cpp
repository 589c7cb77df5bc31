#include "gqc/groups.hpp"

#include <cmath>
#include <stdexcept>

namespace gqc {

GroupSpec::GroupSpec(GroupTag t, int dim) : tag(t), n(dim) {
  if (dim < 2 || dim > 4) throw std::invalid_argument("group dimension must be in 2..4");
  if (t == GroupTag::sp && dim % 2 != 0)
    throw std::invalid_argument("sp(n,R) requires even n");
}

std::string GroupSpec::str() const {
  switch (tag) {
    case GroupTag::gl: return "gl";
    case GroupTag::gl_plus: return "gl+";
    case GroupTag::sl: return "sl";
    case GroupTag::so: return "so";
    case GroupTag::co: return "co";
    case GroupTag::sp: return "sp";
  }
  return "?";
}

GroupSpec GroupSpec::parse(std::string_view tag, int n) {
  if (tag == "gl") return {GroupTag::gl, n};
  if (tag == "gl+") return {GroupTag::gl_plus, n};
  if (tag == "sl") return {GroupTag::sl, n};
  if (tag == "so") return {GroupTag::so, n};
  if (tag == "co") return {GroupTag::co, n};
  if (tag == "sp") return {GroupTag::sp, n};
  throw std::invalid_argument("unknown group tag: " + std::string(tag));
}

Mat symplectic_form(int n) {
  if (n % 2 != 0) throw std::invalid_argument("symplectic form needs even n");
  Mat j(n);
  const int m = n / 2;
  for (int i = 0; i < m; ++i) {
    j(i, m + i) = 1.0;
    j(m + i, i) = -1.0;
  }
  return j;
}

bool in_group(const GroupSpec& g, const Mat& f, double tol) {
  if (f.dim() != g.n) throw std::invalid_argument("in_group: dimension mismatch");
  const double d = det(f);
  switch (g.tag) {
    case GroupTag::gl:
      return std::abs(d) > kDetTol;
    case GroupTag::gl_plus:
      return d > kDetTol;
    case GroupTag::sl:
      return std::abs(d - 1.0) <= tol;
    case GroupTag::so:
      return d > 0.0 && frobenius_norm(transpose(f) * f - Mat::identity(g.n)) <= tol;
    case GroupTag::co: {
      if (d <= kDetTol) return false;
      const double lam2 = std::pow(d, 2.0 / static_cast<double>(g.n));
      return frobenius_norm(transpose(f) * f - lam2 * Mat::identity(g.n)) <= tol;
    }
    case GroupTag::sp: {
      const Mat j = symplectic_form(g.n);
      return frobenius_norm(transpose(f) * j * f - j) <= tol;
    }
  }
  return false;
}

bool in_algebra(const GroupSpec& g, const Mat& h, double tol) {
  if (h.dim() != g.n) throw std::invalid_argument("in_algebra: dimension mismatch");
  switch (g.tag) {
    case GroupTag::gl:
    case GroupTag::gl_plus:
      return is_finite(h);
    case GroupTag::sl:
      return std::abs(trace(h)) <= tol;
    case GroupTag::so:
      return frobenius_norm(h + transpose(h)) <= tol;
    case GroupTag::co: {
      const Mat k = h - (trace(h) / static_cast<double>(g.n)) * Mat::identity(g.n);
      return frobenius_norm(k + transpose(k)) <= tol;
    }
    case GroupTag::sp: {
      const Mat j = symplectic_form(g.n);
      return frobenius_norm(transpose(h) * j + j * h) <= tol;
    }
  }
  return false;
}

Mat project_to_algebra(const GroupSpec& g, const Mat& h) {
  const int n = g.n;
  switch (g.tag) {
    case GroupTag::gl:
    case GroupTag::gl_plus:
      return h;
    case GroupTag::sl:
      return h - (trace(h) / static_cast<double>(n)) * Mat::identity(n);
    case GroupTag::so:
      return 0.5 * (h - transpose(h));
    case GroupTag::co:
      return 0.5 * (h - transpose(h)) + (trace(h) / static_cast<double>(n)) * Mat::identity(n);
    case GroupTag::sp: {
      // H in sp(n) iff J H is symmetric; project J H to its symmetric part.
      const Mat j = symplectic_form(n);
      const Mat s = 0.5 * (j * h + transpose(j * h));
      return (-1.0) * (j * s);  // J^{-1} = -J
    }
  }
  return h;
}

Mat random_algebra_element(const GroupSpec& g, double spread, Rng& rng) {
  Mat h = normal_mat(g.n, rng);
  h *= spread;
  return project_to_algebra(g, h);
}

Mat sample_group_element(const GroupSpec& g, double spread, Rng& rng) {
  if (spread < 0.0) throw std::invalid_argument("spread must be >= 0");
  if (spread == 0.0) return Mat::identity(g.n);
  return mat_exp(random_algebra_element(g, spread, rng));
}

std::optional<RankOnePair> sample_rank_one_cone(const GroupSpec& g, Rng& rng) {
  const int n = g.n;
  switch (g.tag) {
    case GroupTag::gl:
    case GroupTag::gl_plus: {
      RankOnePair p{random_unit_vec(n, rng), random_unit_vec(n, rng)};
      return p;
    }
    case GroupTag::sl: {
      // a (x) b traceless iff a.b = 0; Gram-Schmidt b against a.
      const Vec a = random_unit_vec(n, rng);
      for (;;) {
        Vec b = normal_vec(n, rng);
        b = b - dot(a, b) * a;
        const double r = norm(b);
        if (r > 1e-6) return RankOnePair{a, (1.0 / r) * b};
      }
    }
    case GroupTag::so:
    case GroupTag::co:
      // a (x) b skew (plus a multiple of 1 for co) forces a (x) b = 0.
      return std::nullopt;
    case GroupTag::sp: {
      // H^T J + J H = 0 with H = a b^T forces b parallel to J a, and
      // (a, J a) solves it identically: (Ja) a^T J + J a (Ja)^T = 0.
      const Vec a = random_unit_vec(n, rng);
      const Mat j = symplectic_form(n);
      Vec b = j * a;
      b = rng.uniform(0.5, 1.5) * b;
      if (!in_algebra(g, rank_one(a, b), 1e-10)) return std::nullopt;
      return RankOnePair{a, b};
    }
  }
  return std::nullopt;
}

Mat random_rotation(int n, Rng& rng) {
  GroupSpec so{GroupTag::so, n};
  return mat_exp(random_algebra_element(so, 1.0, rng));
}

Mat random_orthogonal(int n, Rng& rng) {
  Mat r = random_rotation(n, rng);
  if (rng.uniform() < 0.5) {
    for (int i = 0; i < n; ++i) r(i, 0) = -r(i, 0);  // reflect one column
  }
  return r;
}

}  // namespace gqc
