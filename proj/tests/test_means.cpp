#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "bbl/errors.hpp"
#include "bbl/means.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bbl;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

// ((1-t) a^p + t b^p)^{1/p} in 50 digits.
double oracle(double p, double t, double a, double b) {
  const Big bp(p), bt(t), ba(a), bb(b);
  const Big s = (1 - bt) * pow(ba, bp) + bt * pow(bb, bp);
  return static_cast<double>(pow(s, 1 / bp));
}

}  // namespace

TEST_CASE("p_mean examples") {
  CHECK(p_mean(PMeanExponent::finite(1.0), 0.5, 2.0, 4.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(p_mean(PMeanExponent::zero(), 0.5, 1.0, 4.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(p_mean(PMeanExponent::pos_inf(), 0.7, 2.0, 5.0) == 5.0);
  CHECK(p_mean(PMeanExponent::neg_inf(), 0.7, 2.0, 5.0) == 2.0);
  for (auto p : {PMeanExponent::finite(-3.0), PMeanExponent::finite(2.5), PMeanExponent::zero(), PMeanExponent::pos_inf(),
                 PMeanExponent::neg_inf()}) {
    CHECK(p_mean(p, 0.3, 0.0, 5.0) == 0.0);
    CHECK(p_mean(p, 0.3, 5.0, 0.0) == 0.0);
  }
}

TEST_CASE("p_mean domain errors") {
  CHECK_THROWS_AS(p_mean(PMeanExponent::finite(1.0), -0.1, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(p_mean(PMeanExponent::finite(1.0), 1.1, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(p_mean(PMeanExponent::finite(1.0), 0.5, -1.0, 1.0), DomainError);
  CHECK_THROWS_AS(p_mean(PMeanExponent::finite(1.0), 0.5, 1.0, -1.0), DomainError);
}

TEST_CASE("p_mean matches a 50-digit oracle") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 2000; ++k) {
    double p = test::uniform(rng, -6.0, 6.0);
    if (k % 5 == 0) p = std::ldexp(test::uniform(rng, -1.0, 1.0), -static_cast<int>(test::uniform(rng, 10, 40)));
    if (p == 0.0) continue;
    const double t = test::uniform(rng, 0.0, 1.0);
    const double a = std::exp(test::uniform(rng, -5.0, 5.0));
    const double b = std::exp(test::uniform(rng, -5.0, 5.0));
    const double got = p_mean(PMeanExponent::finite(p), t, a, b);
    CHECK(test::rel_err(got, oracle(p, t, a, b)) < 1e-13);
  }
}

TEST_CASE("p_mean properties") {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 300; ++k) {
    const double t = test::uniform(rng, 0.0, 1.0);
    const double a = std::exp(test::uniform(rng, -3.0, 3.0));
    const double b = std::exp(test::uniform(rng, -3.0, 3.0));
    // Monotone in p over a grid including the special cases.
    double prev = p_mean(PMeanExponent::neg_inf(), t, a, b);
    for (double p = -8.0; p <= 8.0; p += 0.25) {
      const double v = p_mean(PMeanExponent::from_double(p), t, a, b);
      CHECK(v >= prev * (1.0 - 1e-14));
      prev = v;
    }
    CHECK(p_mean(PMeanExponent::pos_inf(), t, a, b) >= prev * (1.0 - 1e-14));
    // Homogeneity.
    const double lam = std::exp(test::uniform(rng, -2.0, 2.0));
    const auto p = PMeanExponent::finite(test::uniform(rng, -4.0, 4.0));
    CHECK(test::rel_err(p_mean(p, t, lam * a, lam * b), lam * p_mean(p, t, a, b)) < 1e-13);
    // a = b.
    CHECK(test::rel_err(p_mean(p, t, a, a), a) < 1e-15);
    // Limits.
    const double geo = p_mean(PMeanExponent::zero(), t, a, b);
    CHECK(test::rel_err(p_mean(PMeanExponent::finite(1e-6), t, a, b), geo) < 1e-4);
    CHECK(test::rel_err(p_mean(PMeanExponent::finite(-1e-6), t, a, b), geo) < 1e-4);
    const double tt = test::uniform(rng, 0.05, 0.95);
    CHECK(test::rel_err(p_mean(PMeanExponent::finite(1e6), tt, a, b), std::max(a, b)) < 1e-4);
    CHECK(test::rel_err(p_mean(PMeanExponent::finite(-1e6), tt, a, b), std::min(a, b)) < 1e-4);
  }
}

TEST_CASE("bbl_exponent") {
  const auto third = bbl_exponent(PMeanExponent::pos_inf(), 3.0);
  REQUIRE(third.is_finite());
  CHECK(third.value() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(bbl_exponent(PMeanExponent::zero(), 5.0).is_zero());
  CHECK(bbl_exponent(PMeanExponent::finite(1.0), 2.0).value() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(bbl_exponent(PMeanExponent::finite(-0.5), 2.0).kind() == PMeanExponent::Kind::NegInf);
  CHECK_THROWS_AS(bbl_exponent(PMeanExponent::finite(-0.6), 2.0), DomainError);
  CHECK_THROWS_AS(bbl_exponent(PMeanExponent::neg_inf(), 2.0), DomainError);
}

TEST_CASE("PMeanExponent parsing and special cases") {
  CHECK(PMeanExponent::parse("inf") == PMeanExponent::pos_inf());
  CHECK(PMeanExponent::parse("+inf") == PMeanExponent::pos_inf());
  CHECK(PMeanExponent::parse("-inf") == PMeanExponent::neg_inf());
  CHECK(PMeanExponent::parse("0.25") == PMeanExponent::finite(0.25));
  CHECK(PMeanExponent::parse("0").is_zero());
  CHECK_THROWS_AS(PMeanExponent::parse("abc"), DomainError);
  CHECK(PMeanExponent::from_double(std::numeric_limits<double>::infinity()) == PMeanExponent::pos_inf());
  CHECK_FALSE(PMeanExponent::finite(1e-300) == PMeanExponent::zero());
  CHECK_FALSE(PMeanExponent::finite(1e300) == PMeanExponent::pos_inf());
}
