#pragma once

#include <functional>

#include "gqc/linalg.hpp"
#include "gqc/potentials.hpp"

namespace gqc {

enum class FDOrder { central2, central4 };

// step == 0 selects the calibrated default: 1e-4*(1+||F||) for first
// derivatives, 1e-3*(1+||F||) for second. Explicit steps must be in (0, 0.1].
struct FDScheme {
  double step = 0.0;
  FDOrder order = FDOrder::central4;
  bool richardson = false;
};

double fd_d1(const std::function<double(double)>& f, double h, FDOrder order, bool richardson);
double fd_d2(const std::function<double(double)>& f, double h, FDOrder order, bool richardson);
double fd_mixed(const std::function<double(double, double)>& f, double hs, double ht,
                FDOrder order, bool richardson);

// d/dt w(F exp(tH)) at t = 0.
double group_d1(const Potential& w, const Mat& f, const Mat& h, const FDScheme& scheme = {});

// Iterated group second derivative. Equal directions use the 1-d second
// difference of t -> w(F exp(tH)); mixed directions use the two-parameter
// composition (s,t) -> w(F exp(sH) exp(tP)), which differs from exp(sH+tP)
// at second order on non-commuting directions.
double group_d2(const Potential& w, const Mat& f, const Mat& h, const Mat& p,
                const FDScheme& scheme = {});

// Quadratic form of the ambient-space Hessian contracted with a (x) b,
// computed as the second difference of t -> w(H + t a (x) b).
double classical_hessian_quadform(const std::function<double(const Mat&)>& w, const Mat& h,
                                  const Vec& a, const Vec& b, const FDScheme& scheme = {});

}  // namespace gqc
