// One line per acceptance criterion; exits nonzero if any fails.
#include <array>
#include <boost/numeric/odeint.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "bbl/cli/catalog.hpp"
#include "bbl/distortion.hpp"
#include "bbl/ode.hpp"
#include "bbl/transport.hpp"
#include "bbl/verify.hpp"

using namespace bbl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

BMInstance catalog_bm(const std::string& name, double t) {
  cli::ExperimentConfig cfg = cli::catalog_config(name);
  cfg.t = t;
  return cli::build_bm(cli::resolve(cfg));
}

void halfspace_ratio() {
  bool ok = true;
  std::string detail;
  for (double t : {0.25, 0.5, 0.75}) {
    const auto start = Clock::now();
    const VerificationReport rep = verify_bm(catalog_bm("halfspace-example", t), 1000000, 4096, 2024);
    const double secs = seconds_since(start);
    const double ratio = rep.combined.value / rep.first.value;
    const double expected = std::pow(1 + t, 3);
    const double rel = std::abs(ratio - expected) / expected;
    ok = ok && rel < 0.02 && rep.equality && secs < 30.0;
    detail += fmt("t=%.2f ratio=%.5f (1+t)^3=%.5f rel=%.2e equality=%d %.1fs; ", t, ratio, expected, rel,
                  rep.equality ? 1 : 0, secs);
  }
  report(1, ok, "half-space ratio m(Z_t)/m(A) = (1+t)^3", detail);
}

void cone_quadrature() {
  double worst = 0.0;
  bool quad = true;
  for (double t : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const VerificationReport rep = verify_bm(catalog_bm("cone-halfline", t), 1000, 16, 0);
    worst = std::max(worst, std::abs(rep.margin));
    quad = quad && rep.method == "quadrature";
  }
  report(2, worst < 1e-9 && quad, "cone half-line BM equality by quadrature", fmt("max |margin| = %.3e", worst));
}

void flat_beta_bitwise() {
  long bad = 0, total = 0;
  for (double N : {1.0, 2.0, 3.0, 7.5, 50.0}) {
    const auto cd = CurvatureDimension::make(0.0, N);
    for (int i = 0; i < 100; ++i) {
      const double t = (i + 1) / 100.0;
      for (int j = 0; j < 100; ++j) {
        const double r = 10.0 * j / 99.0;
        ++total;
        if (beta(cd, t, r) != 1.0) ++bad;
      }
    }
  }
  report(3, bad == 0, "beta^{0,N} == 1 bitwise on 100x100 grids", fmt("%ld of %ld entries differ", bad, total));
}

void cone_concavity() {
  const auto e1 = ModelSpace::euclidean(1);
  const WeightedSpace cone(e1, Weight::power_norm(2.0), Region::interval(e1, 0.0, INFINITY));
  const auto cd = CurvatureDimension::make(0, 3);
  std::mt19937_64 rng(314);
  auto unif = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto random_density = [&](double lo, double hi) {
    if (unif(0, 1) < 0.5) return Density1D::uniform(cone, lo, hi);
    return Density1D::power(cone, lo, hi, unif(-2.0, 3.0));
  };
  double worst = INFINITY;
  for (int k = 0; k < 200; ++k) {
    const double a = unif(0.05, 2.0), b = a + unif(0.1, 3.0);
    const double c = unif(0.05, 2.0), d = c + unif(0.1, 3.0);
    const TransportMap1D T = optimal_map_1d(cone, random_density(a, b), random_density(c, d));
    for (int i = 0; i < 100; ++i) {
      const TransportRay ray = ray_1d(cone, T, unif(a, b));
      worst = std::min(worst, concavity_margin(cone, cd, ray, unif(0.0, 1.0)));
    }
  }
  double homothety = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double lambda = unif(0.2, 5.0), a = unif(0.05, 2.0), b = a + unif(0.1, 3.0);
    const TransportMap1D T = TransportMap1D::homothety(a, b, 0.0, lambda);
    for (int i = 0; i < 100; ++i) {
      const TransportRay ray = ray_1d(cone, T, unif(a, b));
      homothety = std::max(homothety, std::abs(concavity_margin(cone, cd, ray, unif(0.0, 1.0))));
    }
  }
  report(4, worst >= -1e-6 && homothety <= 1e-8, "concavity margin on cone transports",
         fmt("min margin over 200x100 = %.3e, max |margin| on homotheties = %.3e", worst, homothety));
}

void monge_ampere() {
  const auto e1 = ModelSpace::euclidean(1);
  Vec a(1);
  a << 0.7;
  const WeightedSpace ws(e1, Weight::linear(a, 0.2));
  const double mu = 0.8, sigma = 1.7, t = 0.5;
  const Density1D g0 = Density1D::gaussian(ws, 0.0, 1.0);
  const Density1D g1 = Density1D::gaussian(ws, mu, sigma);
  const TransportMap1D T = optimal_map_1d(ws, g0, g1);
  const Density1D gt = Density1D::gaussian(ws, t * mu, (1 - t) + t * sigma);
  const double res = monge_ampere_residual(ws, g0, gt, T, t, 1000);
  report(5, res < 1e-5, "Monge-Ampere residual, Gaussian affine transport", fmt("residual = %.3e", res));
}

double jacobi_component(double k, double c, double t) {
  if (k > 0) return std::cos(std::sqrt(k) * t) - c * std::sin(std::sqrt(k) * t) / std::sqrt(k);
  if (k < 0) return std::cosh(std::sqrt(-k) * t) - c * std::sinh(std::sqrt(-k) * t) / std::sqrt(-k);
  return 1.0 - c * t;
}

void jacobi_closed_forms() {
  std::string detail;
  bool ok = true;
  for (double sec : {1.0, 0.0, -1.0}) {
    JacobiSystem sys;
    sys.n = 3;
    sys.r = 1.0;
    sys.sec = sec;
    sys.hess_psi0 = Eigen::Vector3d(0.1, 0.2, 0.2).asDiagonal();
    const RiccatiTrace tr = integrate_jacobi(sys, 4096);
    double err = 0.0;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      const double t = tr.t[i];
      err = std::max(err, std::abs(tr.J[i] - (1 - 0.1 * t) * std::pow(jacobi_component(sec, 0.2, t), 2)));
    }
    ok = ok && err < 1e-8 && tr.t.size() == 4096;
    detail += fmt("sec=%+.0f sup err=%.2e; ", sec, err);
  }
  report(6, ok, "Jacobi determinants vs constant-curvature closed forms", detail);
}

void weight_ode() {
  using State = std::array<double, 2>;
  namespace oi = boost::numeric::odeint;
  std::string detail;
  bool ok = true;
  for (double K : {1.0, 0.0, -1.0}) {
    const WeightProfile p{K, 3.0, 2.0, 1.0, 0.3, 1.0};
    const double k = K * p.r * p.r / (p.N - 1);
    const double slope = K == 0.0 ? p.C0 : p.C0 * std::sqrt(std::abs(k));
    State x{p.C1, slope};
    auto rhs = [&](const State& s, State& d, double) {
      d[0] = s[1];
      d[1] = -k * s[0];
    };
    auto stepper = oi::make_dense_output(1e-14, 1e-14, oi::runge_kutta_dopri5<State>());
    double err = 0.0;
    std::vector<double> times;
    for (int i = 0; i <= 1000; ++i) times.push_back(i / 1000.0);
    oi::integrate_times(stepper, rhs, x, times.begin(), times.end(), 1e-3, [&](const State& s, double t) {
      err = std::max(err, std::abs(std::pow(s[0], p.N - p.n) - weight_closed_form(p, t)));
    });
    ok = ok && err < 1e-8;
    detail += fmt("K=%+.0f sup err=%.2e; ", K, err);
  }
  report(7, ok, "weight ODE vs closed-form profile (N,n,r)=(3,2,1)", detail);
}

void propagation() {
  const auto cd = CurvatureDimension::make(1, 3);
  const double r = 1.0;
  const int m = 512;
  std::vector<double> u(m), bump(m);
  for (int i = 0; i < m; ++i) {
    const double t = static_cast<double>(i) / (m - 1);
    const double w = comparison_solution(cd, r, 1.25, 0.8, t);
    u[i] = w * w;
    const double wb = w + 1e-3 * std::sin(std::numbers::pi * t);
    bump[i] = wb * wb;
  }
  const PropagationResult eq = equality_propagation(u, cd, r, 0.3, 1e-6);
  const PropagationResult bp = equality_propagation(bump, cd, r, 0.3, 1e-6);
  const bool ok = eq.propagated && eq.max_deviation < 1e-7 && !bp.propagated;
  report(8, ok, "equality propagation on a 512 grid, t0 = 0.3",
         fmt("propagated=%d max deviation=%.2e; bump propagated=%d (deviation at t0 %.2e)", eq.propagated ? 1 : 0,
             eq.max_deviation, bp.propagated ? 1 : 0, bp.deviation_at_t0));
}

void sphere_strict() {
  const auto start = Clock::now();
  const VerificationReport rep = verify_bm(catalog_bm("sphere-caps", 0.5), 100000, 4096, 99);
  RigidityOptions opt;
  opt.n_samples = 100000;
  const RigidityDiagnosis d = rigidity_scan(catalog_bm("sphere-caps", 0.5), {0.25, 0.5, 0.75}, 16, 99, opt);
  const double secs = seconds_since(start);
  const bool ok = rep.pass && rep.margin > 3 * rep.std_err &&
                  d.conclusion == RigidityDiagnosis::Conclusion::NoEquality && secs < 60.0;
  report(9, ok, "sphere caps strict BM and NoEquality",
         fmt("margin=%.4e 3se=%.2e conclusion=%s %.1fs", rep.margin, 3 * rep.std_err, to_string(d.conclusion).c_str(),
             secs));
}

void halfspace_rigidity() {
  const BMInstance inst = catalog_bm("halfspace-example", 0.5);
  // Radial rays from the scaling centre: density |x| is affine in t.
  std::mt19937_64 rng(5);
  double direct = 0.0;
  for (int k = 0; k < 32; ++k) {
    const Point x0 = inst.A.sample(rng);
    const TransportRay ray = homothety_ray(inst.ws, inst.homothety->center, inst.homothety->ratio, x0);
    std::vector<std::pair<double, double>> samples;
    const double d0 = inst.ws.density(x0);
    for (int i = 0; i < 16; ++i) {
      const double t = i / 15.0;
      samples.emplace_back(t, inst.ws.density(ray.interpolant(t)) / d0);
    }
    direct = std::max(direct, fit_weight_profile(samples, 0.0, 3.0, 2.0, ray.r).residual);
  }
  const RigidityDiagnosis d = rigidity_scan(inst, {0.25, 0.5, 0.75}, 16, 7);
  const bool ok = direct < 1e-3 && d.max_fit_residual < 1e-3 &&
                  d.conclusion == RigidityDiagnosis::Conclusion::EqualityConsistentWithRigidity &&
                  std::abs(d.inferred_sec - d.expected_sec) <= 1e-6 && d.expected_sec == 0.0;
  report(10, ok, "half-space rigidity diagnostics",
         fmt("radial fit residual=%.2e scan fit residual=%.2e inferred_sec=%.2e expected=%.1f conclusion=%s", direct,
             d.max_fit_residual, d.inferred_sec, d.expected_sec, to_string(d.conclusion).c_str()));
}

}  // namespace

int main() {
  const std::array<void (*)(), 10> criteria = {halfspace_ratio, cone_quadrature, flat_beta_bitwise, cone_concavity,
                                               monge_ampere,    jacobi_closed_forms, weight_ode, propagation,
                                               sphere_strict,   halfspace_rigidity};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, "criterion", std::string("threw: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
