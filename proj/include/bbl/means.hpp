#pragma once

#include <string>
#include <string_view>

namespace bbl {

// Exponent of a power mean on the extended real line. The values +inf,
// -inf and 0 are distinguished cases evaluated by their conventions
// (max, min, geometric mean) rather than as limits.
class PMeanExponent {
 public:
  enum class Kind { NegInf, Finite, PosInf };

  constexpr PMeanExponent() = default;

  static constexpr PMeanExponent finite(double p) { return PMeanExponent(Kind::Finite, p); }
  static constexpr PMeanExponent zero() { return PMeanExponent(Kind::Finite, 0.0); }
  static constexpr PMeanExponent pos_inf() { return PMeanExponent(Kind::PosInf, 0.0); }
  static constexpr PMeanExponent neg_inf() { return PMeanExponent(Kind::NegInf, 0.0); }

  // Maps IEEE infinities to the tagged infinities; NaN is a DomainError.
  static PMeanExponent from_double(double p);
  // Accepts "inf", "+inf", "-inf", "infinity" (any case) or a decimal number.
  static PMeanExponent parse(std::string_view text);

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_finite() const { return kind_ == Kind::Finite; }
  constexpr bool is_zero() const { return kind_ == Kind::Finite && value_ == 0.0; }
  // Finite value, or +/-infinity for the infinite kinds.
  double value() const;

  std::string to_string() const;

  friend constexpr bool operator==(const PMeanExponent& a, const PMeanExponent& b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::Finite || a.value_ == b.value_);
  }

 private:
  constexpr PMeanExponent(Kind k, double v) : kind_(k), value_(v) {}

  Kind kind_ = Kind::Finite;
  double value_ = 0.0;
};

// Weighted power mean M^p_t(a, b). Returns 0 whenever ab = 0, for every p.
double p_mean(PMeanExponent p, double t, double a, double b);

// The exponent p / (1 + N p) of the integrated mean. p = -1/N maps to -inf,
// p = +inf maps to 1/N.
PMeanExponent bbl_exponent(PMeanExponent p, double N);

}  // namespace bbl
