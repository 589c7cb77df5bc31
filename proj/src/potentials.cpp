#include "gqc/potentials.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gqc {

namespace {

double guarded_abs_det(const Mat& f) {
  const double d = std::abs(det(f));
  if (d < 1e-12) throw std::domain_error("potential evaluated at |det| < 1e-12");
  return d;
}

std::array<double, 4> singular_values(const Mat& f) {
  const SingularData sd = polar_svd(f);
  std::array<double, 4> s{};
  for (int i = 0; i < f.dim(); ++i) s[static_cast<std::size_t>(i)] = sd.sigma[i];
  return s;
}

}  // namespace

Potential builtin_potential(std::string_view name, int n) {
  if (name == "neg_log_abs_det") {
    return Potential{
        "neg_log_abs_det",
        GroupSpec{GroupTag::gl, n},
        [](const Mat& f) { return -std::log(guarded_abs_det(f)); },
        {}};
  }
  if (name == "det_log_trace_stretch") {
    // det F * log(trace U_F), det F > 0 only
    return Potential{
        "det_log_trace_stretch",
        GroupSpec{GroupTag::gl_plus, n},
        [](const Mat& f) {
          const double d = det(f);
          if (d <= 1e-12) throw std::domain_error("det_log_trace_stretch needs det F > 0");
          const SingularData sd = polar_svd(f);
          return d * std::log(trace(sd.stretch));
        },
        {}};
  }
  if (name == "log_trace_inv_stretch") {
    // log(trace U_F^{-1}) = log(sum 1/sigma_i)
    return Potential{
        "log_trace_inv_stretch",
        GroupSpec{GroupTag::gl_plus, n},
        [n](const Mat& f) {
          const SingularData sd = polar_svd(f);
          double s = 0.0;
          for (int i = 0; i < n; ++i) {
            if (sd.sigma[i] <= 1e-12) throw std::domain_error("singular value <= 1e-12");
            s += 1.0 / sd.sigma[i];
          }
          return std::log(s);
        },
        {}};
  }
  if (name == "frobenius_sq") {
    return Potential{
        "frobenius_sq",
        GroupSpec{GroupTag::gl, n},
        [](const Mat& f) {
          const double r = frobenius_norm(f);
          return r * r;
        },
        {}};
  }
  if (name == "det") {
    return Potential{"det", GroupSpec{GroupTag::gl, n}, [](const Mat& f) { return det(f); }, {}};
  }
  throw std::invalid_argument("unknown builtin potential: " + std::string(name));
}

Potential involution(const Potential& w) {
  auto inner = w.eval;
  return Potential{
      "invol(" + w.name + ")",
      w.domain,
      [inner](const Mat& f) {
        const double d = guarded_abs_det(f);
        return d * inner(inverse(f));
      },
      {}};
}

Potential negate(const Potential& w) { return scale_potential(w, -1.0); }

Potential scale_potential(const Potential& w, double c) {
  auto inner = w.eval;
  std::ostringstream name;
  name << c << "*(" << w.name << ")";
  Potential out{name.str(), w.domain, [inner, c](const Mat& f) { return c * inner(f); }, {}};
  if (w.chart_eval) {
    auto chart = w.chart_eval;
    out.chart_eval = [chart, c](double x, double y, double z) { return c * chart(x, y, z); };
  }
  return out;
}

Potential conjugate_potential(const Potential& w, const Mat& u) {
  const Mat uinv = inverse(u);
  // closure check: conjugates of sampled group elements must stay in G
  Rng rng(0x5a17c0de);
  for (int i = 0; i < 64; ++i) {
    const Mat f = sample_group_element(w.domain, 0.7, rng);
    if (!in_group(w.domain, u * f * uinv, 1e-6))
      throw std::invalid_argument("conjugate_potential: U G U^{-1} leaves " + w.domain.str());
  }
  auto inner = w.eval;
  return Potential{
      "conj(" + w.name + ")",
      w.domain,
      [inner, u, uinv](const Mat& f) { return inner(u * f * uinv); },
      {}};
}

double gauge_h(const SymmetricGauge& gauge, std::span<const double> x) {
  std::array<double, 4> s{};
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = std::exp(x[i]);
  return gauge.g(std::span<const double>(s.data(), x.size()));
}

SymmetricGauge make_gauge(std::string_view name, const std::map<std::string, double>& params) {
  auto alpha_of = [&params]() {
    auto it = params.find("alpha");
    return (it == params.end()) ? 1.0 : it->second;
  };
  if (name == "neg_sum_log") {
    return SymmetricGauge{"neg_sum_log", [](std::span<const double> s) {
                            double acc = 0.0;
                            for (double x : s) acc -= std::log(x);
                            return acc;
                          }};
  }
  if (name == "log_sum_inv") {
    return SymmetricGauge{"log_sum_inv", [](std::span<const double> s) {
                            double acc = 0.0;
                            for (double x : s) acc += 1.0 / x;
                            return std::log(acc);
                          }};
  }
  if (name == "sum") {
    return SymmetricGauge{"sum", [](std::span<const double> s) {
                            double acc = 0.0;
                            for (double x : s) acc += x;
                            return acc;
                          }};
  }
  if (name == "max") {
    return SymmetricGauge{"max", [](std::span<const double> s) {
                            double acc = 0.0;
                            for (double x : s) acc = std::max(acc, x);
                            return acc;
                          }};
  }
  if (name == "power_sum") {
    const double a = alpha_of();
    std::ostringstream nm;
    nm << "power_sum(" << a << ")";
    return SymmetricGauge{nm.str(), [a](std::span<const double> s) {
                            double acc = 0.0;
                            for (double x : s) acc += std::pow(x, a);
                            return acc;
                          }};
  }
  if (name == "log_power_sum") {
    const double a = alpha_of();
    std::ostringstream nm;
    nm << "log_power_sum(" << a << ")";
    return SymmetricGauge{nm.str(), [a](std::span<const double> s) {
                            double acc = 0.0;
                            for (double x : s) acc += std::pow(x, a);
                            return std::log(acc);
                          }};
  }
  if (name == "ogden") {
    const double a = alpha_of();
    std::ostringstream nm;
    nm << "ogden(" << a << ")";
    return SymmetricGauge{nm.str(), [a](std::span<const double> s) {
                            double acc = 0.0;
                            for (double x : s) acc += std::pow(x, a) + std::pow(x, -a);
                            return acc;
                          }};
  }
  throw std::invalid_argument("unknown gauge: " + std::string(name));
}

Potential iso_family(const SymmetricGauge& gauge, int n) {
  auto g = gauge.g;
  return Potential{
      "iso(" + gauge.name + ")",
      GroupSpec{GroupTag::gl_plus, n},
      [g, n](const Mat& f) {
        const auto s = singular_values(f);
        for (int i = 0; i < n; ++i)
          if (s[static_cast<std::size_t>(i)] <= 1e-12)
            throw std::domain_error("iso_family: singular value <= 1e-12");
        return g(std::span<const double>(s.data(), static_cast<std::size_t>(n)));
      },
      {}};
}

namespace {

// central difference of h along coordinate i
double h_partial(const SymmetricGauge& gauge, std::span<const double> x, int i, double step) {
  std::array<double, 4> xp{}, xm{};
  for (std::size_t k = 0; k < x.size(); ++k) xp[k] = xm[k] = x[k];
  xp[static_cast<std::size_t>(i)] += step;
  xm[static_cast<std::size_t>(i)] -= step;
  const auto n = x.size();
  return (gauge_h(gauge, std::span<const double>(xp.data(), n)) -
          gauge_h(gauge, std::span<const double>(xm.data(), n))) /
         (2.0 * step);
}

}  // namespace

CheckReport check_iso_family_hypotheses(const SymmetricGauge& gauge, int n, long samples,
                                   std::uint64_t seed, SortOrder order) {
  CheckReport rep;
  rep.check = "iso_family_hypotheses(" + gauge.name + ")";
  rep.metadata["p_sort_order"] = (order == SortOrder::ascending) ? "ascending" : "descending";
  const double tol = 1e-7;
  const double step = 1e-5;
  double worst_convexity = std::numeric_limits<double>::infinity();
  double worst_monotone = std::numeric_limits<double>::infinity();

  for (long it = 0; it < samples; ++it) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(it));

    // (a) midpoint convexity of h on a random segment in [-3,3]^n
    std::array<double, 4> x{}, y{}, mid{};
    for (int i = 0; i < n; ++i) {
      x[static_cast<std::size_t>(i)] = rng.uniform(-3.0, 3.0);
      y[static_cast<std::size_t>(i)] = rng.uniform(-3.0, 3.0);
      mid[static_cast<std::size_t>(i)] =
          0.5 * (x[static_cast<std::size_t>(i)] + y[static_cast<std::size_t>(i)]);
    }
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(n));
    const std::span<const double> ys(y.data(), static_cast<std::size_t>(n));
    const std::span<const double> ms(mid.data(), static_cast<std::size_t>(n));
    const double hx = gauge_h(gauge, xs), hy = gauge_h(gauge, ys), hm = gauge_h(gauge, ms);
    const double gap = 0.5 * (hx + hy) - hm;  // >= 0 for convex h
    const double tol_a = tol * (1.0 + std::abs(hx) + std::abs(hy));
    worst_convexity = std::min(worst_convexity, gap);
    bool violated = gap < -tol_a;
    Witness wit;
    if (violated) {
      Vec vx(n), vy(n);
      for (int i = 0; i < n; ++i) {
        vx[i] = x[static_cast<std::size_t>(i)];
        vy[i] = y[static_cast<std::size_t>(i)];
      }
      wit.a = vx;
      wit.b = vy;
      wit.note = "h midpoint convexity";
    }

    // (a) continued: finite-difference Hessian PSD at a random point
    double min_eig = 0.0;
    {
      std::array<double, 4> z{};
      for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = rng.uniform(-2.5, 2.5);
      const std::span<const double> zs(z.data(), static_cast<std::size_t>(n));
      const double hs = 1e-3;
      Mat hess(n);
      const double h0 = gauge_h(gauge, zs);
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          std::array<double, 4> zpp = z, zpm = z, zmp = z, zmm = z;
          zpp[static_cast<std::size_t>(i)] += hs;
          zpp[static_cast<std::size_t>(j)] += hs;
          zpm[static_cast<std::size_t>(i)] += hs;
          zpm[static_cast<std::size_t>(j)] -= hs;
          zmp[static_cast<std::size_t>(i)] -= hs;
          zmp[static_cast<std::size_t>(j)] += hs;
          zmm[static_cast<std::size_t>(i)] -= hs;
          zmm[static_cast<std::size_t>(j)] -= hs;
          const auto sp = [&](std::array<double, 4>& arr) {
            return std::span<const double>(arr.data(), static_cast<std::size_t>(n));
          };
          double v;
          if (i == j) {
            std::array<double, 4> zp = z, zm = z;
            zp[static_cast<std::size_t>(i)] += hs;
            zm[static_cast<std::size_t>(i)] -= hs;
            v = (gauge_h(gauge, sp(zp)) - 2.0 * h0 + gauge_h(gauge, sp(zm))) / (hs * hs);
          } else {
            v = (gauge_h(gauge, sp(zpp)) - gauge_h(gauge, sp(zpm)) - gauge_h(gauge, sp(zmp)) +
                 gauge_h(gauge, sp(zmm))) /
                (4.0 * hs * hs);
          }
          hess(i, j) = v;
          hess(j, i) = v;
        }
      }
      const Vec eig = sym_eigenvalues(hess);
      min_eig = eig[0];
      const double tol_eig = 1e-5 * (1.0 + frobenius_norm(hess));
      if (min_eig < -tol_eig && !violated) {
        violated = true;
        Vec vz(n);
        for (int i = 0; i < n; ++i) vz[i] = z[static_cast<std::size_t>(i)];
        wit.a = vz;
        wit.note = "h Hessian not PSD";
      }
      worst_convexity = std::min(worst_convexity, min_eig);
    }

    // (b) monotonicity of p in the partial-sum coordinates of sorted x.
    // dp/dS_k = h_{x_k} - h_{x_{k+1}} for k < n, dp/dS_n = h_{x_n}.
    {
      std::array<double, 4> z{};
      for (;;) {
        for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = rng.uniform(-3.0, 3.0);
        std::sort(z.begin(), z.begin() + n);
        bool distinct = true;
        for (int i = 0; i + 1 < n; ++i)
          if (z[static_cast<std::size_t>(i + 1)] - z[static_cast<std::size_t>(i)] < 0.05)
            distinct = false;
        if (distinct) break;
      }
      if (order == SortOrder::descending) std::reverse(z.begin(), z.begin() + n);
      const std::span<const double> zs(z.data(), static_cast<std::size_t>(n));
      std::array<double, 4> partial{};
      for (int i = 0; i < n; ++i)
        partial[static_cast<std::size_t>(i)] = h_partial(gauge, zs, i, step);
      for (int k = 0; k < n; ++k) {
        const double dpk = (k + 1 < n)
                               ? partial[static_cast<std::size_t>(k)] - partial[static_cast<std::size_t>(k + 1)]
                               : partial[static_cast<std::size_t>(k)];
        worst_monotone = std::min(worst_monotone, -dpk);
        const double tol_b = tol * (1.0 + std::abs(dpk));
        if (dpk > tol_b && !violated) {
          violated = true;
          Vec vz(n);
          for (int i = 0; i < n; ++i) vz[i] = z[static_cast<std::size_t>(i)];
          wit.a = vz;
          std::ostringstream note;
          note << "dp/dS_" << (k + 1) << " = " << dpk << " > 0";
          wit.note = note.str();
        }
      }
    }

    rep.record(std::min(worst_convexity, worst_monotone), violated, wit);
  }

  std::ostringstream wc, wm;
  wc << worst_convexity;
  wm << worst_monotone;
  rep.metadata["worst_convexity_margin"] = wc.str();
  rep.metadata["worst_monotonicity_margin"] = wm.str();
  rep.finalize();
  return rep;
}

CheckReport check_convex_gauge_hypotheses(const SymmetricGauge& gauge, int n, long samples,
                                   std::uint64_t seed) {
  CheckReport rep;
  rep.check = "convex_gauge_hypotheses(" + gauge.name + ")";
  const double tol = 1e-7;
  bool hypotheses_ok = true;

  for (long it = 0; it < samples; ++it) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(it));
    std::array<double, 4> x{}, y{};
    for (int i = 0; i < n; ++i) {
      x[static_cast<std::size_t>(i)] = rng.uniform(0.05, 4.0);
      y[static_cast<std::size_t>(i)] = rng.uniform(0.05, 4.0);
    }
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(n));
    const std::span<const double> ys(y.data(), static_cast<std::size_t>(n));
    const double gx = gauge.g(xs), gy = gauge.g(ys);
    bool violated = false;
    Witness wit;
    double margin = std::numeric_limits<double>::infinity();

    // midpoint convexity
    {
      std::array<double, 4> mid{};
      for (int i = 0; i < n; ++i)
        mid[static_cast<std::size_t>(i)] =
            0.5 * (x[static_cast<std::size_t>(i)] + y[static_cast<std::size_t>(i)]);
      const double gm = gauge.g(std::span<const double>(mid.data(), static_cast<std::size_t>(n)));
      const double gap = 0.5 * (gx + gy) - gm;
      margin = std::min(margin, gap);
      if (gap < -tol * (1.0 + std::abs(gx) + std::abs(gy))) {
        violated = true;
        wit.note = "g midpoint convexity";
      }
    }
    // permutation symmetry (one random transposition)
    if (n >= 2) {
      std::array<double, 4> p = x;
      const int i = rng.uniform_int(0, n - 1);
      int j = rng.uniform_int(0, n - 1);
      if (j == i) j = (i + 1) % n;
      std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
      const double gp = gauge.g(std::span<const double>(p.data(), static_cast<std::size_t>(n)));
      const double asym = std::abs(gp - gx);
      margin = std::min(margin, tol * (1.0 + std::abs(gx)) - asym);
      if (asym > tol * (1.0 + std::abs(gx))) {
        violated = true;
        wit.note = "g not symmetric";
      }
    }
    // coordinate monotonicity (nondecreasing)
    {
      const int i = rng.uniform_int(0, n - 1);
      std::array<double, 4> p = x;
      p[static_cast<std::size_t>(i)] += rng.uniform(0.1, 1.0);
      const double gp = gauge.g(std::span<const double>(p.data(), static_cast<std::size_t>(n)));
      const double inc = gp - gx;
      margin = std::min(margin, inc);
      if (inc < -tol * (1.0 + std::abs(gx))) {
        violated = true;
        wit.note = "g decreasing in a coordinate";
      }
    }
    if (violated) {
      Vec vx(n);
      for (int i = 0; i < n; ++i) vx[i] = x[static_cast<std::size_t>(i)];
      wit.a = vx;
      hypotheses_ok = false;
    }
    rep.record(margin, violated, wit);
  }

  if (hypotheses_ok) {
    // conclusion spot-check: convexity of F -> g(sigma(F)) on matrix segments
    long conclusion_checks = std::max<long>(64, samples / 4);
    double worst = std::numeric_limits<double>::infinity();
    for (long it = 0; it < conclusion_checks; ++it) {
      Rng rng = Rng::substream(seed ^ 0xabcdef, static_cast<std::uint64_t>(it));
      const Mat f1 = normal_mat(n, rng);
      const Mat f2 = normal_mat(n, rng);
      auto w_of = [&](const Mat& f) {
        const auto s = singular_values(f);
        return gauge.g(std::span<const double>(s.data(), static_cast<std::size_t>(n)));
      };
      const double w1 = w_of(f1), w2 = w_of(f2), wm = w_of(0.5 * (f1 + f2));
      const double gap = 0.5 * (w1 + w2) - wm;
      worst = std::min(worst, gap);
      rep.record(gap, gap < -1e-7 * (1.0 + std::abs(w1) + std::abs(w2)),
                 Witness{f1, {}, {}, 0.0, "matrix-segment convexity"});
    }
    std::ostringstream os;
    os << worst;
    rep.metadata["matrix_segment_worst_gap"] = os.str();
    rep.metadata["conclusion_checked"] = "true";
  } else {
    rep.metadata["conclusion_checked"] = "false";
  }
  rep.finalize();
  return rep;
}

Potential sl2_affine_family(double k, double b, double c, double e, double f) {
  std::ostringstream nm;
  nm << "sl2_affine(" << k << "," << b << "," << c << "," << e << "," << f << ")";
  auto chart = [k, b, c, e, f](double x, double y, double z) {
    if (std::abs(x) <= 1e-10) throw std::domain_error("sl2 chart guard: |X| <= 1e-10");
    return k * (1.0 + y * z) / x + b * y + c * z + e * x + f;
  };
  auto eval = [k, b, c, e, f, chart](const Mat& m) {
    if (m.dim() != 2) throw std::invalid_argument("sl2_affine_family needs n = 2");
    const double x = m(0, 0), y = m(0, 1), z = m(1, 0), xp = m(1, 1);
    // take the chart with the larger pivot: (1+YZ)/X cancels catastrophically
    // when the divisor is the smaller entry
    if (std::abs(x) >= std::abs(xp)) {
      if (std::abs(x) <= 1e-10) throw std::domain_error("sl2 chart guard: both charts degenerate");
      return chart(x, y, z);
    }
    // second chart: F = [(1+Y'Z')/X', Y'; Z', X'], the roles of k and e swap
    if (std::abs(xp) <= 1e-10) throw std::domain_error("sl2 chart guard: both charts degenerate");
    return e * (1.0 + y * z) / xp + b * y + c * z + k * xp + f;
  };
  Potential out{nm.str(), GroupSpec{GroupTag::sl, 2}, eval, chart};
  return out;
}

}  // namespace gqc
