#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "gqc/derivatives.hpp"
#include "gqc/groups.hpp"
#include "gqc/potentials.hpp"
#include "gqc/report.hpp"

namespace gqc {

struct CheckOptions {
  double spread = 0.8;   // algebra spread for sampled group elements
  FDScheme fd{};
  int witness_cap = 16;  // -1 = unbounded (--dump-witnesses)
  // resample F until |det F| >= this bound (used by the involution
  // agreement property, which restricts to det > 1/2 samples)
  std::optional<double> min_abs_det;
  int t_probes = 3;      // t values per sample in the affine checker
};

// Sampled sufficient condition for G rank-one convexity: q = D^2 w(F)(a(x)b,
// a(x)b) >= -tol*(1+|w(F)|) over sampled F in G and (a,b) in the rank-one
// cone of the algebra. Vacuous when the cone is empty.
CheckReport check_g_rank_one_convex(const Potential& w, const GroupSpec& g, long n_samples,
                                    double tol, std::uint64_t seed, const CheckOptions& opts = {});

// Affineness of t -> w(F (1 + t a(x)b)) via symmetric second differences at
// several t in [-0.5, 0.5].
CheckReport check_rank_one_affine(const Potential& w, const GroupSpec& g, long n_samples,
                                  double tol, std::uint64_t seed, const CheckOptions& opts = {});

// The ambient-space quadratic form along F + t (Fa)(x)b (== F(1 + t a(x)b))
// for F in SL(n,R) and a.b = 0.
double check_sl_rank_one_condition(const Potential& w, const Mat& f, const Vec& a, const Vec& b,
                                   const FDScheme& scheme = {});

// Residuals of the five-equation chart system characterizing SL(2,R)
// rank-one affine functions. Second partials by central differences on
// chart_eval. scale[i] carries the magnitude of the terms of equation i for
// relative normalization.
struct Sl2SystemResidual {
  std::array<double, 5> residual{};
  std::array<double, 5> scale{};
  double max_relative() const;
};

Sl2SystemResidual sl2_system_residual(const Potential& w, double x, double y, double z,
                                      const FDScheme& scheme = {});

// Classical ellipticity (Legendre-Hadamard): sampled nonnegativity of the
// Hessian quadratic form on rank-one directions, for w defined on the full
// matrix space.
CheckReport check_classical_ellipticity(const Potential& w, long n_samples, double tol,
                                        std::uint64_t seed, const CheckOptions& opts = {});

}  // namespace gqc
