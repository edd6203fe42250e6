#include "bbl/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "bbl/errors.hpp"

namespace bbl {

namespace {

struct State {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;  // A'
  double lambda = 1.0;
};

State operator+(const State& a, const State& b) { return {a.A + b.A, a.B + b.B, a.lambda + b.lambda}; }
State operator*(double s, const State& a) { return {s * a.A, s * a.B, s * a.lambda}; }

class JacobiRhs {
 public:
  JacobiRhs(int n, double curvature) : proj_(Eigen::MatrixXd::Identity(n, n)), curvature_(curvature) {
    proj_(0, 0) = 0.0;
    e0_ = Eigen::VectorXd::Unit(n, 0);
  }

  State operator()(const State& s) const {
    const Eigen::VectorXd col = s.A.partialPivLu().solve(e0_);
    return {s.B, -curvature_ * (proj_ * s.A), s.B.row(0).dot(col)};
  }

 private:
  Eigen::MatrixXd proj_;
  Eigen::VectorXd e0_;
  double curvature_;
};

State rk4_step(const JacobiRhs& rhs, const State& s, double h) {
  const State k1 = rhs(s);
  const State k2 = rhs(s + (0.5 * h) * k1);
  const State k3 = rhs(s + (0.5 * h) * k2);
  const State k4 = rhs(s + h * k3);
  return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_focal(const State& s, double t) {
  if (!(s.A.determinant() > 0.0)) {
    std::ostringstream os;
    os << "focal point: det A_t <= 0 at t = " << t;
    throw FocalPointError(os.str());
  }
}

// (sin, cos), (t, 1) or (sinh, cosh) at frequency omega.
struct Basis {
  double K, omega;
  double s(double t) const {
    if (K > 0) return std::sin(omega * t);
    if (K < 0) return std::sinh(omega * t);
    return t;
  }
  double c(double t) const {
    if (K > 0) return std::cos(omega * t);
    if (K < 0) return std::cosh(omega * t);
    return 1.0;
  }
};

Basis basis_for(double K, double N, double r) {
  if (N <= 1.0) return {0.0, 0.0};
  return {K, std::sqrt(std::abs(K) / (N - 1.0)) * r};
}

std::vector<double> uniform_grid(std::size_t m) {
  std::vector<double> t(m);
  for (std::size_t i = 0; i < m; ++i) t[i] = i + 1 == m ? 1.0 : static_cast<double>(i) / static_cast<double>(m - 1);
  return t;
}

}  // namespace

std::string RiccatiTrace::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,J,J_psi,f,u,alpha\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << t[i] << ',' << J[i] << ',' << J_psi[i] << ',' << f[i] << ',' << u[i] << ',' << alpha[i] << '\n';
  }
  return os.str();
}

RiccatiTrace integrate_jacobi(const JacobiSystem& sys, int grid) {
  if (grid < 64) throw DomainError("integrate_jacobi: grid must be >= 64");
  if (sys.n < 1) throw DomainError("integrate_jacobi: n must be >= 1");
  if (!(sys.r >= 0.0)) throw DomainError("integrate_jacobi: r must be >= 0");
  const int n = sys.n;
  Eigen::MatrixXd hess = sys.hess_psi0.size() == 0 ? Eigen::MatrixXd::Zero(n, n) : sys.hess_psi0;
  if (hess.rows() != n || hess.cols() != n) throw DomainError("integrate_jacobi: hess_psi0 must be n x n");
  if ((hess - hess.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw DomainError("integrate_jacobi: hess_psi0 must be symmetric");
  }

  const JacobiRhs rhs(n, sys.sec * sys.r * sys.r);
  const auto m = static_cast<std::size_t>(grid);
  const double h = 1.0 / static_cast<double>(grid - 1);

  RiccatiTrace tr;
  tr.n = n;
  tr.r = sys.r;
  tr.sec = sys.sec;
  tr.t = uniform_grid(m);

  State coarse{Eigen::MatrixXd::Identity(n, n), -hess, 1.0};
  State fine = coarse;
  std::vector<State> states;
  states.reserve(m);
  states.push_back(coarse);
  double err = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    coarse = rk4_step(rhs, coarse, h);
    fine = rk4_step(rhs, rk4_step(rhs, fine, 0.5 * h), 0.5 * h);
    State best = (16.0 / 15.0) * fine + (-1.0 / 15.0) * coarse;
    check_focal(best, tr.t[i]);
    err = std::max({err, (fine.A - coarse.A).cwiseAbs().maxCoeff() / 15.0,
                    (fine.B - coarse.B).cwiseAbs().maxCoeff() / 15.0, std::abs(fine.lambda - coarse.lambda) / 15.0});
    states.push_back(std::move(best));
  }
  tr.error_estimate = err;

  const double psi0 = sys.psi_along ? sys.psi_along(0.0) : 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const State& s = states[i];
    const double psi = sys.psi_along ? sys.psi_along(tr.t[i]) : 0.0;
    const double J = s.A.determinant();
    tr.U.push_back(s.B * s.A.inverse());
    tr.lambda.push_back(s.lambda);
    tr.f.push_back(std::exp(s.lambda));
    tr.J.push_back(J);
    tr.psi.push_back(psi);
    tr.J_psi.push_back(std::exp(psi0 - psi) * J);
    tr.y.push_back(std::log(J));
    tr.y_psi.push_back(psi0 - psi + std::log(J));
    tr.alpha.push_back(tr.y_psi.back() - s.lambda);
    tr.u.push_back(std::exp(tr.alpha.back()));
  }
  return tr;
}

std::vector<double> fd_first(const std::vector<double>& v, double h) {
  const std::size_t m = v.size();
  if (m < 3) throw DomainError("fd_first: need at least 3 samples");
  std::vector<double> d(m);
  d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
  d[m - 1] = (3.0 * v[m - 1] - 4.0 * v[m - 2] + v[m - 3]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < m; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
  return d;
}

std::vector<double> fd_second(const std::vector<double>& v, double h) {
  const std::size_t m = v.size();
  if (m < 4) throw DomainError("fd_second: need at least 4 samples");
  std::vector<double> d(m);
  const double h2 = h * h;
  d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
  d[m - 1] = (2.0 * v[m - 1] - 5.0 * v[m - 2] + 4.0 * v[m - 3] - v[m - 4]) / h2;
  for (std::size_t i = 1; i + 1 < m; ++i) d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
  return d;
}

double cs_inequality_residual(const RiccatiTrace& trace, const CurvatureDimension& cd,
                              const std::function<double(double)>& ricci_along) {
  if (cd.N < trace.n) throw DomainError("cs_inequality_residual: requires N >= n");
  if (cd.N <= 1.0) throw DomainError("cs_inequality_residual: requires N > 1");
  const double h = trace.h();
  const auto d1 = fd_first(trace.alpha, h);
  const auto d2 = fd_second(trace.alpha, h);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    const double bound = -ricci_along(trace.t[i]) - d1[i] * d1[i] / (cd.N - 1.0);
    worst = std::min(worst, bound - d2[i]);
  }
  return worst;
}

double comparison_solution(const CurvatureDimension& cd, double r, double w0, double w1, double t) {
  const Basis b = basis_for(cd.K, cd.N, r);
  if (b.K > 0 && b.omega >= std::numbers::pi) throw DomainError("comparison solution: sqrt(K/(N-1)) r must be < pi");
  if (t == 0.0) return w0;
  if (t == 1.0) return w1;
  if (b.K == 0.0 || b.omega == 0.0) return (1.0 - t) * w0 + t * w1;
  const double s1 = b.s(1.0);
  return w0 * (b.s(1.0 - t) / s1) + w1 * (b.s(t) / s1);
}

ConcavityCheck u_concavity_check(const std::vector<double>& u, const CurvatureDimension& cd, double r) {
  if (u.size() < 4) throw DomainError("u_concavity_check: need at least 4 samples");
  if (cd.N <= 1.0) throw DomainError("u_concavity_check: requires N > 1");
  ConcavityCheck out;
  out.t = uniform_grid(u.size());
  const double e = 1.0 / (cd.N - 1.0);
  for (double v : u) {
    if (!(v > 0.0)) throw DomainError("u_concavity_check: u must be positive");
    out.w.push_back(std::pow(v, e));
  }
  const double h = out.t[1] - out.t[0];
  const double kappa = cd.K * r * r / (cd.N - 1.0);
  const auto d2 = fd_second(out.w, h);
  out.min_differential = std::numeric_limits<double>::infinity();
  out.min_chord = std::numeric_limits<double>::infinity();
  const double w0 = out.w.front(), w1 = out.w.back();
  for (std::size_t i = 0; i < u.size(); ++i) {
    out.differential_margin.push_back(-kappa * out.w[i] - d2[i]);
    out.chord_margin.push_back(out.w[i] - comparison_solution(cd, r, w0, w1, out.t[i]));
    if (i > 0 && i + 1 < u.size()) out.min_differential = std::min(out.min_differential, out.differential_margin[i]);
    out.min_chord = std::min(out.min_chord, out.chord_margin[i]);
  }
  return out;
}

ConcavityCheck u_concavity_check(const RiccatiTrace& trace, const CurvatureDimension& cd) {
  return u_concavity_check(trace.u, cd, trace.r);
}

PropagationResult equality_propagation(const std::vector<double>& u, const CurvatureDimension& cd, double r,
                                       double t0, double tol) {
  if (!(t0 >= 0.0 && t0 <= 1.0)) throw DomainError("equality_propagation: t0 must lie in [0,1]");
  if (!(tol > 0.0)) throw DomainError("equality_propagation: tol must be > 0");
  const ConcavityCheck c = u_concavity_check(u, cd, r);
  if (c.min_differential < -tol) {
    std::ostringstream os;
    os << "equality_propagation: u violates the differential inequality by " << -c.min_differential;
    throw PreconditionError(os.str());
  }
  PropagationResult res;
  const std::size_t m = u.size();
  const double pos = t0 * static_cast<double>(m - 1);
  const auto i0 = static_cast<std::size_t>(std::lround(pos));
  if (std::abs(pos - static_cast<double>(i0)) < 1e-9) {
    res.deviation_at_t0 = std::abs(c.chord_margin[i0]);
  } else {
    const auto j = static_cast<std::size_t>(std::floor(pos));
    const double s = pos - static_cast<double>(j);
    res.deviation_at_t0 = std::abs((1.0 - s) * c.chord_margin[j] + s * c.chord_margin[j + 1]);
  }
  for (double d : c.chord_margin) res.max_deviation = std::max(res.max_deviation, std::abs(d));
  res.equality_at_t0 = res.deviation_at_t0 <= tol;
  res.propagated = res.equality_at_t0 && res.max_deviation <= 10.0 * tol;
  return res;
}

double holder_recombination_margin(const RiccatiTrace& trace, const CurvatureDimension& cd) {
  if (cd.N <= 1.0) throw DomainError("holder_recombination_margin: requires N > 1");
  const double inv_n = 1.0 / cd.N;
  const double f0 = trace.f.front();
  const double f1 = trace.f.back() / f0;
  const double w1 = std::pow(trace.u.back() * f0, 1.0 / (cd.N - 1.0));
  const double j1 = std::pow(trace.J_psi.back(), inv_n);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    const double t = trace.t[i];
    const double phi = comparison_solution(cd, trace.r, 1.0, w1, t);
    const double mid = std::pow((1.0 - t) + t * f1, inv_n) * std::pow(phi, (cd.N - 1.0) * inv_n);
    double rhs = 0.0;
    if (t < 1.0) rhs += (1.0 - t) * std::pow(beta(cd, 1.0 - t, trace.r), inv_n);
    if (t > 0.0) rhs += t * std::pow(beta(cd, t, trace.r), inv_n) * j1;
    const double lhs = std::pow(trace.J_psi[i], inv_n);
    worst = std::min({worst, lhs - mid, mid - rhs});
  }
  return worst;
}

double weight_bracket(const WeightProfile& p, double t) {
  const Basis b = basis_for(p.K, p.N, p.r);
  return p.C0 * b.s(t) + p.C1 * b.c(t);
}

double weight_closed_form(const WeightProfile& p, double t) {
  if (p.N < p.n) throw DomainError("weight_closed_form: requires N >= n");
  if (p.N == p.n) return 1.0;
  const double bracket = weight_bracket(p, t);
  if (!(bracket > 0.0)) {
    std::ostringstream os;
    os << "weight_closed_form: profile vanishes or changes sign at t = " << t;
    throw DomainError(os.str());
  }
  return std::pow(bracket, p.N - p.n);
}

WeightProfile profile_from_initial(double psi_x, double dpsi_x, double K, double N, double n, double r) {
  if (N < n) throw DomainError("profile_from_initial: requires N >= n");
  if (N == n) throw DomainError("profile_from_initial: N = n has a constant weight (no profile ODE)");
  WeightProfile p{K, N, n, r, 0.0, 0.0};
  p.C1 = std::exp(-psi_x / (N - n));
  p.C0 = (-dpsi_x / (N - n)) * p.C1;
  // The bracket's slope at 0 is C0 omega when K != 0.
  const Basis b = basis_for(K, N, r);
  if (K != 0.0 && b.omega > 0.0) p.C0 /= b.omega;
  return p;
}

ProfileFit fit_weight_profile(const std::vector<std::pair<double, double>>& samples, double K, double N,
                              double n, double r) {
  if (samples.size() < 8) throw DomainError("fit_weight_profile: need at least 8 samples");
  if (!(N > n)) throw DomainError("fit_weight_profile: requires N > n");
  const Basis b = basis_for(K, N, r);
  const auto m = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd X(m, 2);
  Eigen::VectorXd v(m);
  const double e = 1.0 / (N - n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& [t, rho] = samples[static_cast<std::size_t>(i)];
    if (!(rho > 0.0)) throw DomainError("fit_weight_profile: densities must be positive");
    X(i, 0) = b.s(t);
    X(i, 1) = b.c(t);
    v(i) = std::pow(rho, e);
  }
  const Eigen::Matrix2d gram = X.transpose() * X;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(gram);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) throw IllConditionedError("fit_weight_profile: basis Gram matrix is ill-conditioned");
  const Eigen::VectorXd c = X.colPivHouseholderQr().solve(v);
  ProfileFit fit;
  fit.profile = WeightProfile{K, N, n, r, c(0), c(1)};
  for (const auto& [t, rho] : samples) {
    const double bracket = std::max(weight_bracket(fit.profile, t), 0.0);
    fit.residual = std::max(fit.residual, std::abs(std::pow(bracket, N - n) - rho));
  }
  return fit;
}

IsotropyDiagnosis diagnose_isotropy(const RiccatiTrace& trace, const CurvatureDimension& cd, double tol) {
  IsotropyDiagnosis d;
  const int k = trace.n - 1;
  const auto dpsi = fd_first(trace.psi, trace.h());
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    double xi = 0.0;
    if (k > 0) {
      const Eigen::MatrixXd V = trace.U[i].bottomRightCorner(k, k);
      const double tr = V.trace();
      const double fro2 = V.squaredNorm();
      xi = tr / k;
      if (fro2 > 0.0) d.min_cs_ratio = std::min(d.min_cs_ratio, tr * tr / (k * fro2));
    }
    d.max_weight_mismatch = std::max(d.max_weight_mismatch, std::abs(-dpsi[i] - (cd.N - trace.n) * xi));
  }
  d.isotropic = (1.0 - d.min_cs_ratio) <= tol && d.max_weight_mismatch <= tol;
  return d;
}

}  // namespace bbl
