#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <string>

#include "gqc/rng.hpp"

namespace gqc {

// Dense kernels for the tiny matrices this library lives on (n = 2..4).
// Everything is closed-form or unconditionally convergent; value semantics
// throughout, no heap traffic.

class Vec {
public:
  Vec() = default;
  explicit Vec(int n);
  Vec(std::initializer_list<double> xs);

  static Vec zero(int n) { return Vec(n); }
  static Vec basis(int n, int i);

  int dim() const { return n_; }
  double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }

private:
  int n_ = 0;
  std::array<double, 4> v_{};
};

class Mat {
public:
  Mat() = default;
  explicit Mat(int n);                                // zero matrix
  Mat(int n, std::initializer_list<double> rowmajor);

  static Mat identity(int n);
  static Mat zero(int n) { return Mat(n); }
  static Mat diag(const Vec& d);

  int dim() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * n_ + j)]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * n_ + j)]; }

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

private:
  int n_ = 0;
  std::array<double, 16> a_{};
};

Mat operator+(Mat x, const Mat& y);
Mat operator-(Mat x, const Mat& y);
Mat operator*(double s, Mat x);
Mat operator*(Mat x, double s);
Mat operator*(const Mat& x, const Mat& y);
Vec operator*(const Mat& m, const Vec& v);
Vec operator+(Vec x, const Vec& y);
Vec operator-(Vec x, const Vec& y);
Vec operator*(double s, Vec x);

double dot(const Vec& x, const Vec& y);
double norm(const Vec& x);
Vec normalized(const Vec& x);

Mat transpose(const Mat& m);
double trace(const Mat& m);
double frobenius_norm(const Mat& m);
double max_abs(const Mat& m);
bool is_finite(const Mat& m);

// Closed-form cofactor determinant, exact expressions for n <= 4.
double det(const Mat& m);

// Adjugate inverse; throws std::domain_error when |det| < 1e-12.
Mat inverse(const Mat& m);

// entry (i,j) = a_i b_j
Mat rank_one(const Vec& a, const Vec& b);

// Scaling and squaring with a Taylor tail; relative error <= 1e-12 for
// ||H|| <= 10.
Mat mat_exp(const Mat& h);

// Polar data F = rotation * stretch. sigma sorted nonincreasing, stretch
// symmetric PSD; rotation orthogonal with det matching the sign of det F.
struct SingularData {
  Vec sigma;
  Mat rotation;
  Mat stretch;
};

// One-sided Jacobi, 100-sweep budget, off-diagonal threshold 1e-14; throws
// std::runtime_error if the budget is exhausted (degenerate input).
SingularData polar_svd(const Mat& f);

// Eigenvalues of a (symmetrized) matrix by cyclic Jacobi, ascending order.
Vec sym_eigenvalues(const Mat& m);

Vec normal_vec(int n, Rng& rng);
Mat normal_mat(int n, Rng& rng);
Vec random_unit_vec(int n, Rng& rng);

std::string to_string(const Mat& m);
std::string to_string(const Vec& v);

}  // namespace gqc
