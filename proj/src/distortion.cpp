#include "bbl/distortion.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "bbl/errors.hpp"

namespace bbl {

CurvatureDimension CurvatureDimension::make(double K, double N) {
  if (!std::isfinite(K)) throw DomainError("curvature bound K must be finite");
  if (!std::isfinite(N) || !(N >= 1.0)) throw DomainError("dimension bound N must be finite and >= 1");
  return CurvatureDimension{K, N};
}

double CurvatureDimension::conjugate_radius() const {
  if (K <= 0.0) return std::numeric_limits<double>::infinity();
  return std::numbers::pi * std::sqrt((N - 1.0) / K);
}

double cofactor(const CurvatureDimension& cd, double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("cofactor: r must be finite and >= 0");
  if (cd.K == 0.0) return r;
  if (cd.N <= 1.0) throw DomainError("cofactor: K != 0 requires N > 1");
  if (cd.K > 0.0) {
    if (r >= cd.conjugate_radius()) {
      throw DomainError("cofactor: r is at or beyond the conjugate radius pi*sqrt((N-1)/K)");
    }
    const double k = std::sqrt(cd.K / (cd.N - 1.0));
    return std::sin(r * k) / k;
  }
  const double k = std::sqrt(-cd.K / (cd.N - 1.0));
  return std::sinh(r * k) / k;
}

double beta(const CurvatureDimension& cd, double t, double r) {
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("beta: t must lie in (0,1]");
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("beta: r must be finite and >= 0");
  if (cd.K == 0.0) return 1.0;
  if (cd.N == 1.0) {
    if (cd.K > 0.0 && r > 0.0) throw DomainError("beta: K > 0 with N = 1 admits no positive radius");
    return 1.0;
  }
  if (r == 0.0 || t == 1.0) {
    (void)cofactor(cd, r);  // range check only
    return 1.0;
  }
  const double ratio = cofactor(cd, t * r) / (t * cofactor(cd, r));
  return std::pow(ratio, cd.N - 1.0);
}

bool beta_monotone_in_r(const CurvatureDimension& cd, double t, double r_lo, double r_hi,
                        int samples) {
  if (samples < 2) throw DomainError("beta_monotone_in_r: need at least 2 samples");
  if (!(r_lo <= r_hi)) throw DomainError("beta_monotone_in_r: empty interval");
  std::vector<double> b(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double r = r_lo + (r_hi - r_lo) * static_cast<double>(i) / (samples - 1);
    b[static_cast<std::size_t>(i)] = beta(cd, t, r);
  }
  constexpr double rel = 1e-13;
  for (std::size_t i = 1; i < b.size(); ++i) {
    const double prev = b[i - 1];
    const double cur = b[i];
    if (cd.K == 0.0) {
      if (cur != prev) return false;
    } else if (cd.K > 0.0) {
      if (cur < prev - rel * std::abs(prev)) return false;
    } else {
      if (cur > prev + rel * std::abs(prev)) return false;
    }
  }
  return true;
}

}  // namespace bbl
