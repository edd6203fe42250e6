#include "bbl/verify.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "bbl/errors.hpp"
#include "bbl/random.hpp"

namespace bbl {

namespace {

bool is_line_interval(const ModelSpace& space, const Region& R) {
  return space.kind() == SpaceKind::Euclidean && space.dim() == 1 && R.shape() == Region::Shape::Interval &&
         R.bounded();
}

double quad_1d(const WeightedSpace& ws, const ScalarField& f, double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  auto g = [&](double x) {
    const Point p = make_point({x});
    const double d = ws.density(p);
    return d == 0.0 ? 0.0 : f(p) * d;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, lo, hi, 20, 1e-15);
}

// d(x^{1/N}) = x^{1/N - 1}/N dx.
double root_se(double x, double se, double N) {
  if (x <= 0.0 || se == 0.0) return 0.0;
  return std::pow(x, 1.0 / N - 1.0) / N * se;
}

double pmean_partial(PMeanExponent p, double t, double a, double b, bool wrt_a) {
  const double base = wrt_a ? a : b;
  const double d = 1e-6 * std::max(std::abs(base), 1e-300);
  if (base - d <= 0.0) return 0.0;
  const double up = wrt_a ? p_mean(p, t, a + d, b) : p_mean(p, t, a, b + d);
  const double dn = wrt_a ? p_mean(p, t, a - d, b) : p_mean(p, t, a, b - d);
  return (up - dn) / (2.0 * d);
}

// Extremum of sign * d(x, y) over A x B: sampled pairs, then compass search
// in the joint parameters.
double sampled_extremal_distance(const ModelSpace& space, const Region& A, const Region& B, double sign,
                                 long n_pairs, std::uint64_t seed) {
  if (!A.bounded() || !B.bounded()) {
    return sign > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int na = A.param_dim(), nb = B.param_dim();
  auto draw = [&](const Region& R, int n) {
    Vec cube(n), u(n);
    for (int attempt = 0; attempt < 256; ++attempt) {
      for (int i = 0; i < n; ++i) cube(i) = unif(rng);
      if (R.param_from_unit_cube(cube, u)) return u;
    }
    (void)R.param_from_unit_cube(Vec::Constant(n, 0.5), u);
    return u;
  };
  auto objective = [&](const Vec& ua, const Vec& ub) {
    return sign * distance(space, A.from_param(ua), B.from_param(ub));
  };
  Vec best_a = draw(A, na), best_b = draw(B, nb);
  double best = objective(best_a, best_b);
  for (long k = 1; k < std::max<long>(n_pairs, 1); ++k) {
    const Vec ua = draw(A, na), ub = draw(B, nb);
    const double v = objective(ua, ub);
    if (v > best) {
      best = v;
      best_a = ua;
      best_b = ub;
    }
  }
  double step = 0.25 * std::max(A.param_scale(), B.param_scale());
  const double min_step = 1e-12 * std::max(A.param_scale(), B.param_scale());
  while (step > min_step) {
    bool improved = false;
    for (int i = 0; i < na + nb; ++i) {
      for (double dir : {1.0, -1.0}) {
        Vec ua = best_a, ub = best_b;
        if (i < na) {
          ua(i) += dir * step;
          ua = A.clamp_param(ua);
        } else {
          ub(i - na) += dir * step;
          ub = B.clamp_param(ub);
        }
        const double v = objective(ua, ub);
        if (v > best) {
          best = v;
          best_a = ua;
          best_b = ub;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return sign * best;
}

bool axis_aligned(const Region& R) { return R.shape() == Region::Shape::Box || R.shape() == Region::Shape::Interval; }

}  // namespace

void classify(VerificationReport& rep, const VerifyOptions& opt) {
  rep.margin = rep.lhs - rep.rhs;
  const double band = 3.0 * rep.std_err;
  rep.pass = rep.margin >= -band;
  rep.equality = rep.pass && std::abs(rep.margin) <= opt.equality_tol_rel * std::abs(rep.rhs) + band;
  const bool strict = rep.margin > band;
  const bool violated = rep.margin < -band;
  const bool sharp_equality = rep.equality && band <= opt.inconclusive_rel * std::abs(rep.rhs);
  rep.inconclusive = !(strict || violated || sharp_equality);
}

std::vector<HypothesisViolation> check_bbl_hypothesis(const BBLInstance& inst, long n_pairs, std::uint64_t seed) {
  if (n_pairs < 1) throw DomainError("check_bbl_hypothesis: n_pairs must be >= 1");
  if (!(inst.t > 0.0 && inst.t < 1.0)) throw DomainError("check_bbl_hypothesis: t must lie in (0,1)");
  const ModelSpace& space = inst.ws.space();
  Rng rng(seed);
  std::vector<HypothesisViolation> out;
  for (long k = 0; k < n_pairs; ++k) {
    const Point x = inst.support0.sample(rng);
    const Point y = inst.support1.sample(rng);
    const Point z = intermediate_point(space, x, y, inst.t);
    const double d = distance(space, x, y);
    const double a = inst.f0(x) / beta(inst.cd, 1.0 - inst.t, d);
    const double b = inst.f1(y) / beta(inst.cd, inst.t, d);
    const double required = p_mean(inst.p, inst.t, a, b);
    const double h = inst.h(z);
    if (h < required - 1e-9) out.push_back({x, y, z, h, required});
  }
  return out;
}

VerificationReport verify_bbl(const BBLInstance& inst, long n_samples, std::uint64_t seed, long hypothesis_pairs,
                              const VerifyOptions& opt) {
  if (!(inst.t > 0.0 && inst.t < 1.0)) throw DomainError("verify_bbl: t must lie in (0,1)");
  VerificationReport rep;
  rep.kind = "bbl";
  rep.t = inst.t;
  rep.seed = seed;
  rep.samples = n_samples;
  if (hypothesis_pairs > 0) {
    const auto violations = check_bbl_hypothesis(inst, hypothesis_pairs, derive_seed(seed, 0));
    rep.hypothesis_checked = true;
    rep.hypothesis_violations = static_cast<long>(violations.size());
    if (!violations.empty()) {
      std::ostringstream os;
      os << "verify_bbl: hypothesis fails at " << violations.size() << " of " << hypothesis_pairs << " sampled pairs";
      throw PreconditionError(os.str());
    }
  } else {
    rep.notes.push_back("hypothesis check skipped");
  }

  const ModelSpace& space = inst.ws.space();
  const bool deterministic = is_line_interval(space, inst.support0) && is_line_interval(space, inst.support1) &&
                             is_line_interval(space, inst.support_h);
  if (deterministic) {
    rep.method = "quadrature";
    rep.first = {quad_1d(inst.ws, inst.f0, inst.support0.lo()(0), inst.support0.hi()(0)), 0.0};
    rep.second = {quad_1d(inst.ws, inst.f1, inst.support1.lo()(0), inst.support1.hi()(0)), 0.0};
    rep.combined = {quad_1d(inst.ws, inst.h, inst.support_h.lo()(0), inst.support_h.hi()(0)), 0.0};
  } else {
    if (n_samples < 1000) throw DomainError("verify_bbl: need at least 1000 samples");
    rep.method = "monte-carlo";
    auto wrap = [](const ScalarField& f) { return [f](const Point& p, std::uint64_t) { return f(p); }; };
    rep.first = integrate(inst.ws, wrap(inst.f0), inst.support0, n_samples, derive_seed(seed, 1), opt.threads);
    rep.second = integrate(inst.ws, wrap(inst.f1), inst.support1, n_samples, derive_seed(seed, 2), opt.threads);
    rep.combined = integrate(inst.ws, wrap(inst.h), inst.support_h, n_samples, derive_seed(seed, 3), opt.threads);
  }
  if (!(rep.first.value > 0.0) || !(rep.second.value > 0.0)) {
    throw DomainError("verify_bbl: int f0 dm and int f1 dm must be positive");
  }
  const PMeanExponent q = bbl_exponent(inst.p, inst.cd.N);
  rep.lhs = rep.combined.value;
  rep.rhs = p_mean(q, inst.t, rep.first.value, rep.second.value);
  const double da = pmean_partial(q, inst.t, rep.first.value, rep.second.value, true);
  const double db = pmean_partial(q, inst.t, rep.first.value, rep.second.value, false);
  rep.std_err = std::sqrt(rep.combined.std_err * rep.combined.std_err + da * da * rep.first.std_err * rep.first.std_err +
                          db * db * rep.second.std_err * rep.second.std_err);
  classify(rep, opt);
  return rep;
}

double theta(const ModelSpace& space, const Region& A, const Region& B, double K, long n_pairs, std::uint64_t seed) {
  const bool inf = K >= 0.0;
  if (A.shape() == Region::Shape::Ball && B.shape() == Region::Shape::Ball) {
    const double d = distance(space, A.ball_center(), B.ball_center());
    const double ra = A.ball_radius(), rb = B.ball_radius();
    if (inf) return std::max(0.0, d - ra - rb);
    const double sup = d + ra + rb;
    return space.kind() == SpaceKind::Sphere ? std::min(sup, std::numbers::pi * space.radius()) : sup;
  }
  if (space.kind() == SpaceKind::Euclidean && axis_aligned(A) && axis_aligned(B)) {
    double acc = 0.0;
    for (int i = 0; i < space.dim(); ++i) {
      const double alo = A.lo()(i), ahi = A.hi()(i), blo = B.lo()(i), bhi = B.hi()(i);
      const double g = inf ? std::max({0.0, blo - ahi, alo - bhi}) : std::max(std::abs(bhi - alo), std::abs(ahi - blo));
      acc += g * g;
    }
    return std::sqrt(acc);
  }
  return sampled_extremal_distance(space, A, B, inf ? -1.0 : 1.0, n_pairs, seed);
}

Region z_bounding_ball(const ModelSpace& space, const Region& A, const Region& B, double t) {
  if (!A.bounded() || !B.bounded()) throw DomainError("z_bounding_ball: regions must be bounded");
  const Point ca = A.center(), cb = B.center();
  const double ra = A.circumradius(), rb = B.circumradius();
  const Point ct = intermediate_point(space, ca, cb, t);
  double rho = (1.0 - t) * ra + t * rb;
  if (space.kind() == SpaceKind::Sphere) {
    const double R = space.radius();
    const double th = (distance(space, ca, cb) + ra + rb) / R;
    if (th >= std::numbers::pi) throw DomainError("z_bounding_ball: regions are not within a hemisphere-safe range");
    if (th > 1e-12) {
      const double s = std::sin(th);
      rho = std::max(1.0 - t, std::sin((1.0 - t) * th) / s) * ra + std::max(t, std::sin(t * th) / s) * rb;
    }
  }
  rho *= 1.0 + 1e-9;
  if (!(rho > 0.0)) rho = 1e-12;
  return Region::ball(space, ct, rho);
}

BBLInstance bbl_from_bm(const BMInstance& inst, PMeanExponent p, int z_trials) {
  const ModelSpace& space = inst.ws.space();
  const double th = theta(space, inst.A, inst.B, inst.cd.K);
  const double b0 = beta(inst.cd, 1.0 - inst.t, th);
  const double b1 = beta(inst.cd, inst.t, th);
  const Region A = inst.A, B = inst.B;
  const double t = inst.t;
  Region bounding = inst.bounding ? *inst.bounding : z_bounding_ball(space, A, B, t);
  BBLInstance out{inst.ws,
                  inst.cd,
                  [A, b0](const Point& x) { return A.contains(x) ? b0 : 0.0; },
                  [B, b1](const Point& y) { return B.contains(y) ? b1 : 0.0; },
                  [space, A, B, t, z_trials](const Point& z) { return z_membership(space, A, B, t, z, z_trials) ? 1.0 : 0.0; },
                  t,
                  p,
                  A,
                  B,
                  bounding};
  if (is_line_interval(space, A) && is_line_interval(space, B)) {
    const double lo = (1.0 - t) * A.lo()(0) + t * B.lo()(0);
    const double hi = (1.0 - t) * A.hi()(0) + t * B.hi()(0);
    out.support_h = Region::interval(space, lo, hi);
    out.h = [](const Point&) { return 1.0; };
  }
  return out;
}

VerificationReport verify_bm(const BMInstance& inst, long n_samples, int z_trials, std::uint64_t seed,
                             const VerifyOptions& opt) {
  const ModelSpace& space = inst.ws.space();
  const CurvatureDimension& cd = inst.cd;
  if (!(inst.t > 0.0 && inst.t < 1.0)) throw DomainError("verify_bm: t must lie in (0,1)");
  if (!(inst.A.space() == space) || !(inst.B.space() == space)) throw DomainError("verify_bm: A and B must live in the weighted space");
  if (!inst.A.bounded() || !inst.B.bounded()) throw DomainError("verify_bm: A and B must be bounded");
  if (cd.N < space.dim()) throw DomainError("verify_bm: requires N >= dim");
  if (cd.N == space.dim() && !inst.ws.psi().is_constant()) {
    throw DomainError("verify_bm: N = dim requires a constant weight");
  }

  VerificationReport rep;
  rep.kind = "bm";
  rep.t = inst.t;
  rep.seed = seed;
  rep.samples = n_samples;

  const double dmax = theta(space, inst.A, inst.B, -1.0, 4096, derive_seed(seed, 4));
  if (space.kind() == SpaceKind::Sphere && dmax >= std::numbers::pi * space.radius() * (1.0 - 1e-12)) {
    throw DomainError("verify_bm: A and B contain (nearly) antipodal pairs");
  }
  if (cd.K > 0.0 && dmax >= cd.conjugate_radius()) {
    std::ostringstream os;
    os << "verify_bm: sup distance " << dmax << " between A and B exceeds the conjugate radius "
       << cd.conjugate_radius() << " of CD(" << cd.K << "," << cd.N << ")";
    throw DomainError(os.str());
  }
  rep.theta = theta(space, inst.A, inst.B, cd.K, 4096, derive_seed(seed, 5));
  const double t = inst.t;

  if (is_line_interval(space, inst.A) && is_line_interval(space, inst.B) && !inst.bounding) {
    rep.method = "quadrature";
    const double alo = inst.A.lo()(0), ahi = inst.A.hi()(0), blo = inst.B.lo()(0), bhi = inst.B.hi()(0);
    rep.first = {measure_interval_quadrature(inst.ws, alo, ahi), 0.0};
    rep.second = {measure_interval_quadrature(inst.ws, blo, bhi), 0.0};
    rep.combined = {measure_interval_quadrature(inst.ws, (1.0 - t) * alo + t * blo, (1.0 - t) * ahi + t * bhi), 0.0};
  } else {
    rep.method = "monte-carlo";
    const Region A = inst.A, B = inst.B;
    rep.first = measure(inst.ws, [&](const Point& p) { return A.contains(p); }, A, n_samples, derive_seed(seed, 1), opt.threads);
    rep.second = measure(inst.ws, [&](const Point& p) { return B.contains(p); }, B, n_samples, derive_seed(seed, 2), opt.threads);
    const Region bounding = inst.bounding ? *inst.bounding : z_bounding_ball(space, A, B, t);
    rep.combined = integrate(
        inst.ws,
        [&](const Point& z, std::uint64_t key) { return z_membership(space, A, B, t, z, z_trials, key) ? 1.0 : 0.0; },
        bounding, n_samples, derive_seed(seed, 3), opt.threads);
    rep.notes.push_back(
        "Z_t membership is one-sided, so lhs may slightly underestimate; a small negative margin can be a "
        "membership false negative (raise z_trials)");
  }
  if (!(rep.first.value > 0.0) || !(rep.second.value > 0.0)) throw DomainError("verify_bm: m(A) and m(B) must be positive");

  const double N = cd.N;
  const double c0 = (1.0 - t) * std::pow(beta(cd, 1.0 - t, rep.theta), 1.0 / N);
  const double c1 = t * std::pow(beta(cd, t, rep.theta), 1.0 / N);
  rep.lhs = std::pow(rep.combined.value, 1.0 / N);
  rep.rhs = c0 * std::pow(rep.first.value, 1.0 / N) + c1 * std::pow(rep.second.value, 1.0 / N);
  const double sl = root_se(rep.combined.value, rep.combined.std_err, N);
  const double sa = c0 * root_se(rep.first.value, rep.first.std_err, N);
  const double sb = c1 * root_se(rep.second.value, rep.second.std_err, N);
  rep.std_err = std::sqrt(sl * sl + sa * sa + sb * sb);
  classify(rep, opt);
  return rep;
}

std::string to_string(RigidityDiagnosis::Conclusion c) {
  switch (c) {
    case RigidityDiagnosis::Conclusion::NoEquality: return "NoEquality";
    case RigidityDiagnosis::Conclusion::EqualityConsistentWithRigidity: return "EqualityConsistentWithRigidity";
    case RigidityDiagnosis::Conclusion::EqualityInconsistent: return "EqualityInconsistent";
    case RigidityDiagnosis::Conclusion::Inconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

double infer_sec(const ModelSpace& space, const Point& x) {
  if (space.dim() < 2) return space.sec();
  const auto frame = space.tangent_frame(x);
  const double eps = 0.1 * std::min(1.0, space.radius());
  return estimate_sectional_curvature(space, x, frame[0], frame[1], eps);
}

RayFit fit_ray(const BMInstance& inst, const Point& x0, const Point& x1, const std::function<Point(double)>& gamma) {
  const WeightedSpace& ws = inst.ws;
  const double N = inst.cd.N;
  const double n = ws.space().dim();
  RayFit rf{x0, x1, {}};
  const double r = distance(ws.space(), x0, x1);
  rf.fit.profile = WeightProfile{inst.cd.K, N, n, r, 0.0, 1.0};
  std::vector<std::pair<double, double>> samples;
  const double psi0 = ws.psi().value(x0);
  for (int j = 0; j < 16; ++j) {
    const double t = j / 15.0;
    const Point p = gamma(t);
    if (!ws.in_domain(p)) {
      rf.fit.residual = std::numeric_limits<double>::infinity();
      return rf;
    }
    samples.emplace_back(t, std::exp(psi0 - ws.psi().value(p)));
  }
  if (N == n) {
    for (const auto& [t, rho] : samples) rf.fit.residual = std::max(rf.fit.residual, std::abs(rho - 1.0));
    return rf;
  }
  try {
    rf.fit = fit_weight_profile(samples, inst.cd.K, N, n, r);
  } catch (const Error&) {
    rf.fit.residual = std::numeric_limits<double>::infinity();
  }
  return rf;
}

}  // namespace

RigidityDiagnosis rigidity_scan(const BMInstance& inst, const std::vector<double>& t_grid, int ray_samples,
                                std::uint64_t seed, const RigidityOptions& opt) {
  if (t_grid.empty()) throw DomainError("rigidity_scan: empty t grid");
  if (ray_samples < 1) throw DomainError("rigidity_scan: ray_samples must be >= 1");
  if (!(inst.cd.N > 1.0)) throw DomainError("rigidity_scan: requires N > 1");
  const ModelSpace& space = inst.ws.space();
  RigidityDiagnosis diag;
  diag.t_grid = t_grid;
  diag.expected_sec = inst.cd.K / (inst.cd.N - 1.0);

  bool inconclusive = false;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    BMInstance at = inst;
    at.t = t_grid[i];
    if (inst.bounding && inst.t != at.t) at.bounding.reset();
    VerificationReport rep = verify_bm(at, opt.n_samples, opt.z_trials, derive_seed(seed, i), opt.verify);
    if (rep.inconclusive) {
      inconclusive = true;
      std::ostringstream os;
      os << "t = " << at.t << ": std_err " << rep.std_err << " too large to decide equality";
      diag.findings.push_back(os.str());
    }
    if (rep.equality) diag.equality_times.push_back(at.t);
    diag.reports.push_back(std::move(rep));
  }

  // Sectional curvature from geodesic distances at the centres of A and B.
  diag.inferred_sec = infer_sec(space, inst.A.center());
  const double sec_b = infer_sec(space, inst.B.center());
  if (std::abs(sec_b - diag.expected_sec) > std::abs(diag.inferred_sec - diag.expected_sec)) diag.inferred_sec = sec_b;

  Rng rng(derive_seed(seed, 1000));
  for (int k = 0; k < ray_samples; ++k) {
    const Point x0 = inst.A.sample(rng);
    if (inst.homothety) {
      if (space.kind() != SpaceKind::Euclidean) throw DomainError("rigidity_scan: homotheties need Euclidean space");
      const Homothety hm = *inst.homothety;
      const Point x1{hm.center.coords + hm.ratio * (x0.coords - hm.center.coords)};
      diag.weight_fits.push_back(fit_ray(inst, x0, x1, [hm, x0](double t) {
        return Point{hm.center.coords + (1.0 + t * (hm.ratio - 1.0)) * (x0.coords - hm.center.coords)};
      }));
    } else {
      const Point y0 = inst.B.sample(rng);
      diag.weight_fits.push_back(
          fit_ray(inst, x0, y0, [&space, x0, y0](double t) { return intermediate_point(space, x0, y0, t); }));
    }
    diag.max_fit_residual = std::max(diag.max_fit_residual, diag.weight_fits.back().fit.residual);
  }

  using C = RigidityDiagnosis::Conclusion;
  if (inconclusive) {
    diag.conclusion = C::Inconclusive;
    return diag;
  }
  if (diag.equality_times.empty()) {
    diag.conclusion = C::NoEquality;
    return diag;
  }

  bool consistent = true;
  if (diag.equality_times.size() != t_grid.size()) {
    consistent = false;
    for (const auto& rep : diag.reports) {
      if (!rep.equality) {
        std::ostringstream os;
        os << "equality at t = " << diag.equality_times.front() << " does not propagate to t = " << rep.t;
        diag.findings.push_back(os.str());
      }
    }
  }
  if (std::abs(diag.inferred_sec - diag.expected_sec) > opt.sec_tol) {
    consistent = false;
    std::ostringstream os;
    os << "inferred sectional curvature " << diag.inferred_sec << " differs from K/(N-1) = " << diag.expected_sec;
    diag.findings.push_back(os.str());
  }
  if (diag.max_fit_residual > opt.fit_tol) {
    consistent = false;
    std::ostringstream os;
    os << "weight profile residual " << diag.max_fit_residual << " exceeds " << opt.fit_tol;
    diag.findings.push_back(os.str());
  }
  if (inst.cd.K < 0.0) {
    consistent = false;
    diag.findings.push_back("equality with K < 0 cannot occur for sets of positive measure");
  }
  if (inst.cd.K > 0.0) {
    diag.sym_diff = check_equal_sets(inst.ws, inst.A, inst.B, opt.n_samples, derive_seed(seed, 2000), opt.verify.threads);
    const double allowance = 3.0 * diag.sym_diff->std_err + opt.verify.equality_tol_rel * diag.reports.front().first.value;
    if (diag.sym_diff->value > allowance) {
      consistent = false;
      std::ostringstream os;
      os << "K > 0 equality requires A = B up to null sets, but m(A delta B) = " << diag.sym_diff->value;
      diag.findings.push_back(os.str());
    }
  }
  diag.conclusion = consistent ? C::EqualityConsistentWithRigidity : C::EqualityInconsistent;
  return diag;
}

Estimate check_equal_sets(const WeightedSpace& ws, const Region& A, const Region& B, long n_samples, std::uint64_t seed,
                          unsigned threads) {
  const Estimate a = measure(ws, [&](const Point& p) { return !B.contains(p); }, A, n_samples, derive_seed(seed, 1), threads);
  const Estimate b = measure(ws, [&](const Point& p) { return !A.contains(p); }, B, n_samples, derive_seed(seed, 2), threads);
  return {a.value + b.value, std::sqrt(a.std_err * a.std_err + b.std_err * b.std_err)};
}

}  // namespace bbl
