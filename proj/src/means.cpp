#include "bbl/means.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "bbl/errors.hpp"

namespace bbl {

PMeanExponent PMeanExponent::from_double(double p) {
  if (std::isnan(p)) throw DomainError("p-mean exponent is NaN");
  if (p == std::numeric_limits<double>::infinity()) return pos_inf();
  if (p == -std::numeric_limits<double>::infinity()) return neg_inf();
  return finite(p);
}

PMeanExponent PMeanExponent::parse(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "inf" || s == "+inf" || s == "infinity" || s == "+infinity") return pos_inf();
  if (s == "-inf" || s == "-infinity") return neg_inf();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DomainError("cannot parse p-mean exponent '" + std::string(text) + "'");
  }
  if (used != s.size()) throw DomainError("cannot parse p-mean exponent '" + std::string(text) + "'");
  return from_double(v);
}

double PMeanExponent::value() const {
  switch (kind_) {
    case Kind::PosInf: return std::numeric_limits<double>::infinity();
    case Kind::NegInf: return -std::numeric_limits<double>::infinity();
    case Kind::Finite: break;
  }
  return value_;
}

std::string PMeanExponent::to_string() const {
  switch (kind_) {
    case Kind::PosInf: return "inf";
    case Kind::NegInf: return "-inf";
    case Kind::Finite: break;
  }
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

namespace {

// ((1-t) a^p + t b^p)^(1/p), directly when the powers are in range and
// otherwise in log space. Near p = 0 the sum is formed as
// 1 + (1-t) expm1(x) + t expm1(y) so the log keeps its relative precision;
// for large |p| a max-shift keeps exp() in range.
double finite_power_mean(double p, double t, double a, double b) {
  if (p == 1.0) return (1.0 - t) * a + t * b;
  if (std::abs(p) >= 0.5) {
    const double ap = std::pow(a, p), bp = std::pow(b, p);
    const double sum = (1.0 - t) * ap + t * bp;
    if (std::isnormal(ap) && std::isnormal(bp) && std::isnormal(sum)) return std::pow(sum, 1.0 / p);
  }
  const double x = p * std::log(a);
  const double y = p * std::log(b);
  double log_sum = 0.0;
  if (std::max(std::abs(x), std::abs(y)) < 0.5) {
    log_sum = std::log1p((1.0 - t) * std::expm1(x) + t * std::expm1(y));
  } else {
    const double m = std::max(x, y);
    log_sum = m + std::log((1.0 - t) * std::exp(x - m) + t * std::exp(y - m));
  }
  return std::exp(log_sum / p);
}

}  // namespace

double p_mean(PMeanExponent p, double t, double a, double b) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("p_mean: t must lie in [0,1]");
  if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("p_mean: arguments must be finite and nonnegative");
  }
  if (a == 0.0 || b == 0.0) return 0.0;
  if (a == b) return a;
  switch (p.kind()) {
    case PMeanExponent::Kind::PosInf: return std::max(a, b);
    case PMeanExponent::Kind::NegInf: return std::min(a, b);
    case PMeanExponent::Kind::Finite: break;
  }
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  if (p.is_zero()) return std::exp((1.0 - t) * std::log(a) + t * std::log(b));
  return finite_power_mean(p.value(), t, a, b);
}

PMeanExponent bbl_exponent(PMeanExponent p, double N) {
  if (!(N >= 1.0) || !std::isfinite(N)) throw DomainError("bbl_exponent: N must be finite and >= 1");
  switch (p.kind()) {
    case PMeanExponent::Kind::PosInf: return PMeanExponent::finite(1.0 / N);
    case PMeanExponent::Kind::NegInf:
      throw DomainError("bbl_exponent: p = -inf is below -1/N");
    case PMeanExponent::Kind::Finite: break;
  }
  if (p.is_zero()) return PMeanExponent::zero();
  const double v = p.value();
  const double denom = 1.0 + N * v;
  const double slack = 1e-12 * std::max(1.0, std::abs(N * v));
  if (denom < -slack) throw DomainError("bbl_exponent: p is below -1/N");
  if (std::abs(denom) <= slack) return PMeanExponent::neg_inf();
  return PMeanExponent::finite(v / denom);
}

}  // namespace bbl
