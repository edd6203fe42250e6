#pragma once

namespace bbl {

// Curvature lower bound K and dimension upper bound N >= 1.
struct CurvatureDimension {
  double K = 0.0;
  double N = 1.0;

  // Validates N >= 1 and finiteness.
  static CurvatureDimension make(double K, double N);

  // pi * sqrt((N - 1) / K) for K > 0, +inf otherwise.
  double conjugate_radius() const;
};

// The sine-type function s_{K,N}: solution of s'' = -(K/(N-1)) s with
// s(0) = 0, s'(0) = 1.
double cofactor(const CurvatureDimension& cd, double r);

// beta_t^{K,N}(r) = (s(t r) / (t s(r)))^(N-1), extended continuously by 1 at
// r = 0. For K = 0 the result is exactly 1.0.
double beta(const CurvatureDimension& cd, double t, double r);

// True iff beta(cd, t, .) sampled on a uniform grid over [r_lo, r_hi] is
// nondecreasing (K > 0), nonincreasing (K < 0) or constant (K = 0).
bool beta_monotone_in_r(const CurvatureDimension& cd, double t, double r_lo, double r_hi,
                        int samples);

}  // namespace bbl
