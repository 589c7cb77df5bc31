#include "gqc/derivatives.hpp"

#include <cmath>
#include <stdexcept>

namespace gqc {

namespace {

void validate_step(double h) {
  if (!(h > 0.0) || h > 1e-1) throw std::invalid_argument("FD step must be in (0, 0.1]");
}

double d1_kernel(const std::function<double(double)>& f, double h, FDOrder order) {
  if (order == FDOrder::central2) return (f(h) - f(-h)) / (2.0 * h);
  return (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
}

double d2_kernel(const std::function<double(double)>& f, double h, FDOrder order) {
  if (order == FDOrder::central2) return (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
  return (-f(-2.0 * h) + 16.0 * f(-h) - 30.0 * f(0.0) + 16.0 * f(h) - f(2.0 * h)) / (12.0 * h * h);
}

}  // namespace

double fd_d1(const std::function<double(double)>& f, double h, FDOrder order, bool richardson) {
  validate_step(h);
  const double coarse = d1_kernel(f, h, order);
  if (!richardson) return coarse;
  const double fine = d1_kernel(f, 0.5 * h, order);
  return (order == FDOrder::central2) ? (4.0 * fine - coarse) / 3.0
                                      : (16.0 * fine - coarse) / 15.0;
}

double fd_d2(const std::function<double(double)>& f, double h, FDOrder order, bool richardson) {
  validate_step(h);
  const double coarse = d2_kernel(f, h, order);
  if (!richardson) return coarse;
  const double fine = d2_kernel(f, 0.5 * h, order);
  return (order == FDOrder::central2) ? (4.0 * fine - coarse) / 3.0
                                      : (16.0 * fine - coarse) / 15.0;
}

double fd_mixed(const std::function<double(double, double)>& f, double hs, double ht,
                FDOrder order, bool richardson) {
  validate_step(hs);
  validate_step(ht);
  auto mixed = [&](double as, double at) {
    auto outer = [&](double s) {
      auto inner = [&](double t) { return f(s, t); };
      return d1_kernel(inner, at, order);
    };
    return d1_kernel(outer, as, order);
  };
  const double coarse = mixed(hs, ht);
  if (!richardson) return coarse;
  const double fine = mixed(0.5 * hs, 0.5 * ht);
  return (order == FDOrder::central2) ? (4.0 * fine - coarse) / 3.0
                                      : (16.0 * fine - coarse) / 15.0;
}

double group_d1(const Potential& w, const Mat& f, const Mat& h, const FDScheme& scheme) {
  const double step = (scheme.step > 0.0) ? scheme.step : 1e-4 * (1.0 + frobenius_norm(f));
  auto curve = [&](double t) { return w.eval(f * mat_exp(t * h)); };
  return fd_d1(curve, step, scheme.order, scheme.richardson);
}

double group_d2(const Potential& w, const Mat& f, const Mat& h, const Mat& p,
                const FDScheme& scheme) {
  const double step = (scheme.step > 0.0) ? scheme.step : 1e-3 * (1.0 + frobenius_norm(f));
  if (max_abs(h - p) == 0.0) {
    auto curve = [&](double t) { return w.eval(f * mat_exp(t * h)); };
    return fd_d2(curve, step, scheme.order, scheme.richardson);
  }
  auto surface = [&](double s, double t) { return w.eval(f * mat_exp(s * h) * mat_exp(t * p)); };
  return fd_mixed(surface, step, step, scheme.order, scheme.richardson);
}

double classical_hessian_quadform(const std::function<double(const Mat&)>& w, const Mat& h,
                                  const Vec& a, const Vec& b, const FDScheme& scheme) {
  const double step = (scheme.step > 0.0) ? scheme.step : 1e-3 * (1.0 + frobenius_norm(h));
  const Mat dir = rank_one(a, b);
  auto line = [&](double t) { return w(h + t * dir); };
  return fd_d2(line, step, scheme.order, scheme.richardson);
}

}  // namespace gqc
