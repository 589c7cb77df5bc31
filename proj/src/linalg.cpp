#include "gqc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gqc {

namespace {
void check_dim(int n) {
  if (n < 2 || n > 4) throw std::invalid_argument("dimension must be in 2..4, got " + std::to_string(n));
}
}  // namespace

Vec::Vec(int n) : n_(n) { check_dim(n); }

Vec::Vec(std::initializer_list<double> xs) : n_(static_cast<int>(xs.size())) {
  check_dim(n_);
  int i = 0;
  for (double x : xs) v_[static_cast<std::size_t>(i++)] = x;
}

Vec Vec::basis(int n, int i) {
  Vec e(n);
  e[i] = 1.0;
  return e;
}

Mat::Mat(int n) : n_(n) { check_dim(n); }

Mat::Mat(int n, std::initializer_list<double> rowmajor) : n_(n) {
  check_dim(n);
  if (static_cast<int>(rowmajor.size()) != n * n)
    throw std::invalid_argument("matrix initializer size mismatch");
  int i = 0;
  for (double x : rowmajor) a_[static_cast<std::size_t>(i++)] = x;
}

Mat Mat::identity(int n) {
  Mat m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diag(const Vec& d) {
  Mat m(d.dim());
  for (int i = 0; i < d.dim(); ++i) m(i, i) = d[i];
  return m;
}

Mat& Mat::operator+=(const Mat& o) {
  for (int i = 0; i < n_ * n_; ++i) a_[static_cast<std::size_t>(i)] += o.a_[static_cast<std::size_t>(i)];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  for (int i = 0; i < n_ * n_; ++i) a_[static_cast<std::size_t>(i)] -= o.a_[static_cast<std::size_t>(i)];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (int i = 0; i < n_ * n_; ++i) a_[static_cast<std::size_t>(i)] *= s;
  return *this;
}

Mat operator+(Mat x, const Mat& y) { return x += y; }
Mat operator-(Mat x, const Mat& y) { return x -= y; }
Mat operator*(double s, Mat x) { return x *= s; }
Mat operator*(Mat x, double s) { return x *= s; }

Mat operator*(const Mat& x, const Mat& y) {
  const int n = x.dim();
  Mat r(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double xik = x(i, k);
      for (int j = 0; j < n; ++j) r(i, j) += xik * y(k, j);
    }
  return r;
}

Vec operator*(const Mat& m, const Vec& v) {
  const int n = m.dim();
  Vec r(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += m(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

Vec operator+(Vec x, const Vec& y) {
  for (int i = 0; i < x.dim(); ++i) x[i] += y[i];
  return x;
}

Vec operator-(Vec x, const Vec& y) {
  for (int i = 0; i < x.dim(); ++i) x[i] -= y[i];
  return x;
}

Vec operator*(double s, Vec x) {
  for (int i = 0; i < x.dim(); ++i) x[i] *= s;
  return x;
}

double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (int i = 0; i < x.dim(); ++i) s += x[i] * y[i];
  return s;
}

double norm(const Vec& x) { return std::sqrt(dot(x, x)); }

Vec normalized(const Vec& x) {
  const double r = norm(x);
  if (r == 0.0) throw std::domain_error("cannot normalize the zero vector");
  return (1.0 / r) * x;
}

Mat transpose(const Mat& m) {
  Mat r(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) r(j, i) = m(i, j);
  return r;
}

double trace(const Mat& m) {
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i) s += m(i, i);
  return s;
}

double frobenius_norm(const Mat& m) {
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) s += m(i, j) * m(i, j);
  return std::sqrt(s);
}

double max_abs(const Mat& m) {
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) s = std::max(s, std::abs(m(i, j)));
  return s;
}

bool is_finite(const Mat& m) {
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j)
      if (!std::isfinite(m(i, j))) return false;
  return true;
}

double det(const Mat& m) {
  switch (m.dim()) {
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default: {
      // Laplace expansion along the first row over 3x3 cofactors.
      double s = 0.0;
      for (int j = 0; j < 4; ++j) {
        Mat sub(3);
        for (int r = 1; r < 4; ++r) {
          int cc = 0;
          for (int c = 0; c < 4; ++c) {
            if (c == j) continue;
            sub(r - 1, cc++) = m(r, c);
          }
        }
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        s += sign * m(0, j) * det(sub);
      }
      return s;
    }
  }
}

Mat inverse(const Mat& m) {
  const double d = det(m);
  if (std::abs(d) < 1e-12) throw std::domain_error("matrix is numerically singular (|det| < 1e-12)");
  const int n = m.dim();
  Mat inv(n);
  if (n == 2) {
    inv(0, 0) = m(1, 1);
    inv(0, 1) = -m(0, 1);
    inv(1, 0) = -m(1, 0);
    inv(1, 1) = m(0, 0);
    return (1.0 / d) * inv;
  }
  // adjugate via cofactors
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Mat sub(n - 1);
      int rr = 0;
      for (int r = 0; r < n; ++r) {
        if (r == i) continue;
        int cc = 0;
        for (int c = 0; c < n; ++c) {
          if (c == j) continue;
          sub(rr, cc++) = m(r, c);
        }
        ++rr;
      }
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      inv(j, i) = sign * det(sub);  // transposed cofactor
    }
  return (1.0 / d) * inv;
}

Mat rank_one(const Vec& a, const Vec& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("rank_one: dimension mismatch");
  Mat m(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

Mat mat_exp(const Mat& h) {
  const int n = h.dim();
  const double nrm = frobenius_norm(h);
  int s = 0;
  double scale = 1.0;
  while (nrm * scale > 0.25 && s < 60) {
    scale *= 0.5;
    ++s;
  }
  const Mat t = scale * h;
  Mat result = Mat::identity(n);
  Mat term = Mat::identity(n);
  for (int k = 1; k <= 30; ++k) {
    term = term * t;
    term *= 1.0 / static_cast<double>(k);
    result += term;
    if (frobenius_norm(term) < 1e-20 * (1.0 + frobenius_norm(result))) break;
  }
  for (int k = 0; k < s; ++k) result = result * result;
  return result;
}

SingularData polar_svd(const Mat& f) {
  if (!is_finite(f)) throw std::invalid_argument("polar_svd: non-finite input");
  const int n = f.dim();
  Mat a = f;
  Mat v = Mat::identity(n);
  const double scale = std::max(frobenius_norm(f), 1e-300);

  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (int i = 0; i < n; ++i) {
          app += a(i, p) * a(i, p);
          aqq += a(i, q) * a(i, q);
          apq += a(i, p) * a(i, q);
        }
        if (std::abs(apq) <= 1e-14 * scale * scale) continue;
        converged = false;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = ((zeta >= 0.0) ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = c * t;
        for (int i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - sn * aiq;
          a(i, q) = sn * aip + c * aiq;
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - sn * viq;
          v(i, q) = sn * vip + c * viq;
        }
      }
    }
  }
  if (!converged) throw std::runtime_error("polar_svd: Jacobi iteration did not converge in 100 sweeps");

  Vec sigma(n);
  Mat u(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a(i, j) * a(i, j);
    sigma[j] = std::sqrt(s);
  }

  // sort singular values nonincreasing, permuting columns of A and V
  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.begin() + n, [&](int x, int y) { return sigma[x] > sigma[y]; });
  {
    Mat a2(n), v2(n);
    Vec s2(n);
    for (int j = 0; j < n; ++j) {
      s2[j] = sigma[order[static_cast<std::size_t>(j)]];
      for (int i = 0; i < n; ++i) {
        a2(i, j) = a(i, order[static_cast<std::size_t>(j)]);
        v2(i, j) = v(i, order[static_cast<std::size_t>(j)]);
      }
    }
    a = a2;
    v = v2;
    sigma = s2;
  }

  for (int j = 0; j < n; ++j) {
    if (sigma[j] > 1e-14 * scale) {
      for (int i = 0; i < n; ++i) u(i, j) = a(i, j) / sigma[j];
    } else {
      // complete U with a unit vector orthogonal to the existing columns
      sigma[j] = std::max(sigma[j], 0.0);
      for (int cand = 0; cand < n; ++cand) {
        Vec e = Vec::basis(n, cand);
        for (int k = 0; k < j; ++k) {
          double proj = 0.0;
          for (int i = 0; i < n; ++i) proj += u(i, k) * e[i];
          for (int i = 0; i < n; ++i) e[i] -= proj * u(i, k);
        }
        const double r = norm(e);
        if (r > 0.5) {
          for (int i = 0; i < n; ++i) u(i, j) = e[i] / r;
          break;
        }
      }
    }
  }

  SingularData out;
  out.sigma = sigma;
  out.rotation = u * transpose(v);
  out.stretch = v * Mat::diag(sigma) * transpose(v);
  return out;
}

Vec sym_eigenvalues(const Mat& m) {
  const int n = m.dim();
  Mat a(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
  const double scale = std::max(frobenius_norm(a), 1e-300);
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * scale) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= 1e-18 * scale) continue;
        const double zeta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = ((zeta >= 0.0) ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = c * t;
        for (int i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - sn * aiq;
          a(i, q) = sn * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - sn * aqi;
          a(q, i) = sn * api + c * aqi;
        }
      }
    }
  }
  Vec ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a(i, i);
  std::array<double, 4> tmp{};
  for (int i = 0; i < n; ++i) tmp[static_cast<std::size_t>(i)] = ev[i];
  std::sort(tmp.begin(), tmp.begin() + n);
  for (int i = 0; i < n; ++i) ev[i] = tmp[static_cast<std::size_t>(i)];
  return ev;
}

Vec normal_vec(int n, Rng& rng) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

Mat normal_mat(int n, Rng& rng) {
  Mat m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
  return m;
}

Vec random_unit_vec(int n, Rng& rng) {
  for (;;) {
    Vec v = normal_vec(n, rng);
    const double r = norm(v);
    if (r > 1e-6) return (1.0 / r) * v;
  }
}

std::string to_string(const Mat& m) {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < m.dim(); ++i) {
    os << (i ? "; " : "");
    for (int j = 0; j < m.dim(); ++j) os << (j ? ", " : "") << m(i, j);
  }
  os << "]";
  return os.str();
}

std::string to_string(const Vec& v) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < v.dim(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

}  // namespace gqc
