#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bbl/errors.hpp"
#include "bbl/ode.hpp"
#include "doctest.h"

using namespace bbl;

namespace {

JacobiSystem system(int n, double r, double sec, Eigen::VectorXd hess_diag,
                    std::function<double(double)> psi = {}) {
  JacobiSystem s;
  s.n = n;
  s.r = r;
  s.sec = sec;
  s.hess_psi0 = hess_diag.asDiagonal();
  s.psi_along = std::move(psi);
  return s;
}

// Scalar transverse Jacobi solution a'' = -k a, a(0) = 1, a'(0) = -c.
double jacobi_component(double k, double c, double t) {
  if (k > 0) return std::cos(std::sqrt(k) * t) - c * std::sin(std::sqrt(k) * t) / std::sqrt(k);
  if (k < 0) return std::cosh(std::sqrt(-k) * t) - c * std::sinh(std::sqrt(-k) * t) / std::sqrt(-k);
  return 1.0 - c * t;
}

// High-accuracy solution of b'' = -omega2 b, b(0) = b0, b'(0) = v0 at t.
double odeint_linear(double omega2, double b0, double v0, double t) {
  using State = std::array<double, 2>;
  State x{b0, v0};
  auto rhs = [&](const State& s, State& d, double) {
    d[0] = s[1];
    d[1] = -omega2 * s[0];
  };
  namespace oi = boost::numeric::odeint;
  if (t > 0)
    oi::integrate_adaptive(oi::make_controlled(1e-14, 1e-14, oi::runge_kutta_dopri5<State>()), rhs, x, 0.0, t, 1e-3);
  return x[0];
}

std::vector<double> grid_values(int m, const std::function<double(double)>& f) {
  std::vector<double> v(m);
  for (int i = 0; i < m; ++i) v[i] = f(static_cast<double>(i) / (m - 1));
  return v;
}

}  // namespace

TEST_CASE("flat Jacobi system is trivial") {
  const RiccatiTrace tr = integrate_jacobi(system(3, 1.0, 0.0, Eigen::Vector3d::Zero()), 256);
  REQUIRE(tr.t.size() == 256);
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    CHECK(std::abs(tr.J[i] - 1.0) < 1e-14);
    CHECK(std::abs(tr.J_psi[i] - 1.0) < 1e-14);
    CHECK(tr.U[i].norm() < 1e-14);
    CHECK(tr.lambda[i] == doctest::Approx(1.0));
  }
  CHECK(tr.t.front() == 0.0);
  CHECK(tr.t.back() == 1.0);
  CHECK_THROWS_AS(integrate_jacobi(system(3, 1.0, 0.0, Eigen::Vector3d::Zero()), 63), DomainError);
  auto bad = system(2, 1.0, 0.0, Eigen::Vector2d::Zero());
  bad.hess_psi0(0, 1) = 1e-6;
  CHECK_THROWS_AS(integrate_jacobi(bad, 128), DomainError);
}

TEST_CASE("constant curvature Jacobi determinants") {
  struct Case {
    double sec, r, c;
  };
  for (const Case& cs : {Case{1.0, 1.0, 0.0}, Case{0.0, 1.3, 0.4}, Case{-1.0, 1.0, 0.0}, Case{-1.0, 0.8, 0.5},
                         Case{2.0, 0.7, -0.3}}) {
    for (int n : {2, 3}) {
      Eigen::VectorXd h = Eigen::VectorXd::Constant(n, cs.c);
      h(0) = 0.2;
      const RiccatiTrace tr = integrate_jacobi(system(n, cs.r, cs.sec, h), 4096);
      double err = 0.0;
      for (std::size_t i = 0; i < tr.t.size(); ++i) {
        const double t = tr.t[i];
        const double want = (1 - 0.2 * t) * std::pow(jacobi_component(cs.sec * cs.r * cs.r, cs.c, t), n - 1);
        err = std::max(err, std::abs(tr.J[i] - want));
      }
      CHECK(err < 1e-8);
      CHECK(tr.error_estimate < 1e-8);
    }
  }
  // n = 2 sphere, no weight: J = cos(sqrt(k) r t).
  const RiccatiTrace s = integrate_jacobi(system(2, 1.0, 1.0, Eigen::Vector2d::Zero()), 4096);
  for (std::size_t i = 0; i < s.t.size(); i += 97) CHECK(std::abs(s.J[i] - std::cos(s.t[i])) < 1e-12);
}

TEST_CASE("grid convergence at fourth order") {
  auto sys = system(3, 1.2, 1.0, Eigen::Vector3d(0.1, 0.3, -0.2));
  auto err_for = [&](int grid) {
    const RiccatiTrace tr = integrate_jacobi(sys, grid);
    double e = 0.0;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      const double t = tr.t[i];
      const double k = 1.44;
      e = std::max(e, std::abs(tr.J[i] - (1 - 0.1 * t) * jacobi_component(k, 0.3, t) * jacobi_component(k, -0.2, t)));
    }
    return e;
  };
  const double e64 = err_for(64), e4096 = err_for(4096);
  CHECK(e64 < 1e-7);
  CHECK(e4096 < 1e-12);
}

TEST_CASE("focal points are reported") {
  CHECK_THROWS_AS(integrate_jacobi(system(2, 4.0, 1.0, Eigen::Vector2d::Zero()), 256), FocalPointError);
  CHECK_THROWS_AS(integrate_jacobi(system(2, 1.0, 0.0, Eigen::Vector2d(0.0, 2.0)), 256), FocalPointError);
}

TEST_CASE("trace bookkeeping") {
  auto psi = [](double t) { return 0.3 * t + 0.1 * t * t; };
  const RiccatiTrace tr = integrate_jacobi(system(3, 1.0, -1.0, Eigen::Vector3d(0.3, 0.2, 0.1), psi), 512);
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    CHECK(tr.J_psi[i] == doctest::Approx(std::exp(-psi(tr.t[i])) * tr.J[i]).epsilon(1e-13));
    CHECK(tr.u[i] * tr.f[i] == doctest::Approx(tr.J_psi[i]).epsilon(1e-12));
    CHECK(tr.alpha[i] == doctest::Approx(tr.y_psi[i] - tr.lambda[i]).epsilon(1e-12));
  }
  CHECK(tr.u.front() * tr.f.front() == doctest::Approx(1.0).epsilon(1e-15));
  // f is concave.
  const auto f2 = fd_second(tr.f, tr.h());
  for (double v : f2) CHECK(v <= 1e-8);
  std::istringstream csv(tr.to_csv());
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,J,J_psi,f,u,alpha");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 512);
}

TEST_CASE("finite differences") {
  const double h = 1.0 / 511;
  const auto v = grid_values(512, [](double t) { return t * t * t; });
  const auto d1 = fd_first(v, h);
  const auto d2 = fd_second(v, h);
  for (int i = 0; i < 512; ++i) {
    const double t = i * h;
    CHECK(std::abs(d1[i] - 3 * t * t) < 1e-5);
    CHECK(std::abs(d2[i] - 6 * t) < 1e-4);
  }
  const auto q = grid_values(512, [](double t) { return 2 * t * t - t; });
  const auto q2 = fd_second(q, h);
  for (double x : q2) CHECK(x == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("Cauchy-Schwarz residual") {
  const auto cd = CurvatureDimension::make(0, 3);
  const auto zero = [](double) { return 0.0; };
  const RiccatiTrace flat = integrate_jacobi(system(2, 1.0, 0.0, Eigen::Vector2d::Zero()), 1024);
  CHECK(cs_inequality_residual(flat, CurvatureDimension::make(0, 2), zero) >= -1e-6);

  // Isotropic equality: V = xi, xi = -c/(1-ct), psi = -(N-n) log(1-ct).
  const double c = 0.4;
  const RiccatiTrace iso = integrate_jacobi(
      system(2, 1.0, 0.0, Eigen::Vector2d(0.0, c), [&](double t) { return -std::log(1 - c * t); }), 4096);
  CHECK(std::abs(cs_inequality_residual(iso, cd, zero)) < 1e-6);
  const IsotropyDiagnosis di = diagnose_isotropy(iso, cd, 1e-6);
  CHECK(di.isotropic);
  CHECK(di.max_weight_mismatch < 1e-6);
  CHECK(holder_recombination_margin(iso, cd) >= -1e-6);

  // Anisotropic V, psi = 0: slack (a-b)^2/2 with a = c1/(1-c1 t), b = c2/(1-c2 t).
  const double c1 = 0.5, c2 = -0.3;
  const RiccatiTrace an = integrate_jacobi(system(3, 1.0, 0.0, Eigen::Vector3d(0.0, c1, c2)), 4096);
  double want = INFINITY;
  for (double t : an.t) {
    const double a = c1 / (1 - c1 * t), b = c2 / (1 - c2 * t);
    want = std::min(want, 0.5 * (a - b) * (a - b));
  }
  const double res = cs_inequality_residual(an, cd, zero);
  CHECK(res > 0.1);
  CHECK(res == doctest::Approx(want).epsilon(1e-4));
  const IsotropyDiagnosis dan = diagnose_isotropy(an, cd, 1e-6);
  CHECK_FALSE(dan.isotropic);
  CHECK(dan.min_cs_ratio < 0.9);
  CHECK(holder_recombination_margin(an, cd) >= -1e-6);

  // Sphere with K = sec (n - 1) = 1, N = n = 2: the cos Jacobi field is equality.
  const RiccatiTrace sp = integrate_jacobi(system(2, 1.0, 1.0, Eigen::Vector2d::Zero()), 4096);
  const auto cd12 = CurvatureDimension::make(1, 2);
  // alpha = log cos t is stiff near t = 1; the one-sided end stencil costs ~2e-6 at 4096 points.
  CHECK(std::abs(cs_inequality_residual(sp, cd12, [](double) { return 1.0; })) < 1e-5);
  CHECK(holder_recombination_margin(sp, cd12) >= -1e-6);
  CHECK_THROWS_AS(cs_inequality_residual(an, CurvatureDimension::make(0, 2), zero), DomainError);
}

TEST_CASE("comparison solution") {
  const auto flat = CurvatureDimension::make(0, 3);
  CHECK(comparison_solution(flat, 2.0, 1.0, 3.0, 0.25) == doctest::Approx(1.5));
  const auto pos = CurvatureDimension::make(2, 3);
  const auto neg = CurvatureDimension::make(-2, 3);
  for (const auto& cd : {pos, neg}) {
    const double r = 1.1, k = cd.K * r * r / (cd.N - 1);
    // Oracle: shoot the linear ODE for the slope matching w(1).
    const double a = odeint_linear(k, 1.0, 0.0, 1.0), b = odeint_linear(k, 0.0, 1.0, 1.0);
    const double slope = (2.0 - 0.7 * a) / b;
    for (double t : {0.0, 0.2, 0.5, 0.9, 1.0})
      CHECK(comparison_solution(cd, r, 0.7, 2.0, t) == doctest::Approx(odeint_linear(k, 0.7, slope, t)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(comparison_solution(CurvatureDimension::make(1, 2), 4.0, 1.0, 1.0, 0.5), DomainError);
}

TEST_CASE("u concavity check") {
  const auto cd0 = CurvatureDimension::make(0, 3);
  const auto c0 = u_concavity_check(std::vector<double>(257, 1.0), cd0, 1.0);
  for (double m : c0.chord_margin) CHECK(m == doctest::Approx(0.0));
  CHECK(std::abs(c0.min_differential) < 1e-12);

  const auto cd = CurvatureDimension::make(1, 3);
  const double r = 1.2;
  auto eq = [&](double t) { return comparison_solution(cd, r, 1.0, 0.6, t); };
  const auto u = grid_values(1025, [&](double t) { return std::pow(eq(t), 2.0); });
  const auto chk = u_concavity_check(u, cd, r);
  CHECK(std::abs(chk.min_chord) < 1e-8);
  for (double m : chk.chord_margin) CHECK(std::abs(m) < 1e-8);
  CHECK(std::abs(chk.min_differential) < 1e-5);

  const auto bumped = grid_values(1025, [&](double t) { return std::pow(eq(t) + 0.05 * t * (1 - t), 2.0); });
  const auto cb = u_concavity_check(bumped, cd, r);
  CHECK(cb.min_differential > 0.0);
  for (std::size_t i = 1; i + 1 < cb.chord_margin.size(); ++i) CHECK(cb.chord_margin[i] > 0.0);

  // On a trace: the sphere Jacobi field in n = 3 with N = 3, K = 2.
  const RiccatiTrace sp = integrate_jacobi(system(3, 1.0, 1.0, Eigen::Vector3d::Zero()), 1024);
  const auto ct = u_concavity_check(sp, CurvatureDimension::make(2, 3));
  CHECK(ct.min_differential > -1e-5);
  CHECK(ct.min_chord > -1e-8);
}

TEST_CASE("equality propagation") {
  const double r = 1.0;
  for (const auto& cd : {CurvatureDimension::make(1, 3), CurvatureDimension::make(0, 3), CurvatureDimension::make(-1, 3)}) {
    auto eq = [&](double t) { return comparison_solution(cd, r, 1.0, 1.4, t); };
    const auto u = grid_values(512, [&](double t) { return std::pow(eq(t), 2.0); });
    for (double t0 : {0.3, 0.5, 0.77}) {
      const PropagationResult p = equality_propagation(u, cd, r, t0, 1e-6);
      CHECK(p.propagated);
      CHECK(p.equality_at_t0);
      CHECK(p.max_deviation < 1e-7);
      // Monotone in tol.
      CHECK(equality_propagation(u, cd, r, t0, 1e-4).propagated);
    }
    const auto bump = grid_values(512, [&](double t) { return std::pow(eq(t) + 1e-3 * std::sin(std::numbers::pi * t), 2.0); });
    const PropagationResult pb = equality_propagation(bump, cd, r, 0.5, 1e-6);
    CHECK_FALSE(pb.propagated);
    CHECK_FALSE(pb.equality_at_t0);
    CHECK(pb.deviation_at_t0 == doctest::Approx(1e-3).epsilon(1e-3));
  }
  // Convex w fails the precondition.
  const auto convex = grid_values(512, [](double t) { return std::pow(1 + 0.2 * t * t, 2.0); });
  CHECK_THROWS_AS(equality_propagation(convex, CurvatureDimension::make(0, 3), r, 0.3, 1e-6), PreconditionError);
}

TEST_CASE("weight closed form") {
  WeightProfile p{0.0, 3.0, 2.0, 1.0, 0.0, 1.0};
  for (double t : {0.0, 0.4, 1.0}) CHECK(weight_closed_form(p, t) == 1.0);
  WeightProfile q{0.0, 4.0, 2.0, 1.0, 1.0, 1.0};
  CHECK(weight_closed_form(q, 0.5) == doctest::Approx(2.25).epsilon(1e-15));
  WeightProfile same{0.0, 2.0, 2.0, 1.0, 5.0, -1.0};
  CHECK(weight_closed_form(same, 0.5) == 1.0);
  WeightProfile neg{0.0, 3.0, 2.0, 1.0, -2.0, 1.0};
  CHECK_THROWS_AS(weight_closed_form(neg, 0.75), DomainError);

  // Defining ODE against an adaptive integrator.
  for (const double K : {1.0, -1.0, 0.0}) {
    WeightProfile w{K, 3.0, 2.0, 1.0, 0.3, 1.0};
    const double k = K / 2.0;
    const double omega = std::sqrt(std::abs(k));
    const double v0 = K == 0.0 ? 0.3 : 0.3 * omega;
    double err = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double t = i / 200.0;
      err = std::max(err, std::abs(weight_closed_form(w, t) - odeint_linear(k, 1.0, v0, t)));
    }
    CHECK(err < 1e-8);
    // Finite-difference residual of the defining ODE.
    const auto b = grid_values(1001, [&](double t) { return std::pow(weight_closed_form(w, t), 1.0 / (w.N - w.n)); });
    const auto b2 = fd_second(b, 1e-3);
    for (std::size_t i = 1; i + 1 < b.size(); ++i) CHECK(std::abs(b2[i] + k * b[i]) < 1e-6);
  }
}

TEST_CASE("profile from initial values") {
  const auto a = profile_from_initial(0.0, 0.0, 0.0, 3.0, 2.0, 1.0);
  CHECK(a.C0 == 0.0);
  CHECK(a.C1 == 1.0);
  const auto b = profile_from_initial(0.0, -1.0, 0.0, 3.0, 2.0, 1.0);
  CHECK(b.C0 == doctest::Approx(1.0));
  CHECK(b.C1 == 1.0);
  const auto b2 = profile_from_initial(0.0, -2.0, 0.0, 5.0, 3.0, 1.0);
  CHECK(b2.C0 == doctest::Approx(1.0));
  const auto c = profile_from_initial(2.0 * std::log(2.0), 0.0, 0.0, 4.0, 2.0, 1.0);
  CHECK(c.C0 == 0.0);
  CHECK(c.C1 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(profile_from_initial(0.0, 0.0, 0.0, 2.0, 2.0, 1.0), DomainError);
  CHECK_THROWS_AS(profile_from_initial(0.0, 0.0, 0.0, 2.0, 3.0, 1.0), DomainError);
  // The profile reproduces psi(0) and its derivative for curved bases.
  for (double K : {1.0, -1.0}) {
    const auto p = profile_from_initial(0.3, -0.7, K, 3.0, 2.0, 1.3);
    auto psi = [&](double t) { return -(p.N - p.n) * std::log(weight_bracket(p, t)); };
    CHECK(psi(0.0) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK((psi(1e-6) - psi(-1e-6)) / 2e-6 == doctest::Approx(-0.7).epsilon(1e-7));
  }
}

TEST_CASE("fit weight profile") {
  for (double K : {1.0, 0.0, -1.0}) {
    const WeightProfile truth{K, 3.5, 2.0, 0.9, 0.4, 1.3};
    std::vector<std::pair<double, double>> s;
    for (int i = 0; i < 16; ++i) {
      const double t = i / 15.0;
      s.emplace_back(t, weight_closed_form(truth, t));
    }
    const ProfileFit f = fit_weight_profile(s, K, 3.5, 2.0, 0.9);
    CHECK(std::abs(f.profile.C0 - 0.4) < 1e-8);
    CHECK(std::abs(f.profile.C1 - 1.3) < 1e-8);
    CHECK(f.residual < 1e-10);
  }
  // Radial ray in the half-plane: |x0 + t(x1 - x0)| with x1 = 2 x0.
  std::vector<std::pair<double, double>> radial;
  for (int i = 0; i < 16; ++i) {
    const double t = i / 15.0;
    radial.emplace_back(t, std::hypot(0.3, 1.1) * (1 + t));
  }
  CHECK(fit_weight_profile(radial, 0.0, 3.0, 2.0, std::hypot(0.3, 1.1)).residual < 1e-6);
  std::vector<std::pair<double, double>> gauss;
  for (int i = 0; i < 16; ++i) {
    const double t = -2.0 + 4.0 * i / 15.0;
    gauss.emplace_back(t, std::exp(-t * t));
  }
  CHECK(fit_weight_profile(gauss, 0.0, 3.0, 2.0, 1.0).residual > 0.01);
  CHECK_THROWS_AS(fit_weight_profile(std::vector<std::pair<double, double>>(radial.begin(), radial.begin() + 7), 0.0, 3.0,
                                     2.0, 1.0),
                  DomainError);
  std::vector<std::pair<double, double>> same_t(10, {0.5, 1.0});
  CHECK_THROWS_AS(fit_weight_profile(same_t, 0.0, 3.0, 2.0, 1.0), IllConditionedError);
  auto bad = radial;
  bad[3].second = -1.0;
  CHECK_THROWS_AS(fit_weight_profile(bad, 0.0, 3.0, 2.0, 1.0), DomainError);
}
