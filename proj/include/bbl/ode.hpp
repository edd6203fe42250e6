#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bbl/distortion.hpp"

namespace bbl {

// Matrix Jacobi equation A'' + sec r^2 P A = 0 along a geodesic gamma on
// [0,1] with |gamma'| = r, in a parallel frame whose first vector is
// gamma'/r (P = diag(0, 1, ..., 1)). A(0) = Id, A'(0) = -hess_psi0.
struct JacobiSystem {
  int n = 1;
  double r = 1.0;
  double sec = 0.0;
  Eigen::MatrixXd hess_psi0;
  std::function<double(double)> psi_along;  // t -> psi(gamma(t)); empty means psi = 0
};

struct RiccatiTrace {
  std::vector<double> t;
  std::vector<Eigen::MatrixXd> U;  // A' A^{-1}
  std::vector<double> lambda;      // 1 + int_0^t U_00
  std::vector<double> f;           // exp(lambda)
  std::vector<double> J;           // det A
  std::vector<double> J_psi;       // exp(psi(0) - psi(t)) J
  std::vector<double> y;           // log J
  std::vector<double> y_psi;       // log J_psi
  std::vector<double> alpha;       // y_psi - lambda
  std::vector<double> u;           // exp(alpha) = J_psi / f
  std::vector<double> psi;         // psi(gamma(t))
  int n = 1;
  double r = 1.0;
  double sec = 0.0;
  double error_estimate = 0.0;  // Richardson estimate of the RK4 error

  double h() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
  // Columns t,J,J_psi,f,u,alpha.
  std::string to_csv() const;
};

// Fixed-step RK4 on `grid` equally spaced points of [0,1] with one
// Richardson extrapolation against the half step. Throws FocalPointError
// once det A <= 0.
RiccatiTrace integrate_jacobi(const JacobiSystem& sys, int grid);

// Derivatives of samples on a uniform grid: second order, central inside,
// one-sided at the ends.
std::vector<double> fd_first(const std::vector<double>& v, double h);
std::vector<double> fd_second(const std::vector<double>& v, double h);

// min over the grid of [-Ric(t) - alpha'^2/(N-1)] - alpha''.
double cs_inequality_residual(const RiccatiTrace& trace, const CurvatureDimension& cd,
                              const std::function<double(double)>& ricci_along);

// Solution of w'' = -(K r^2/(N-1)) w with w(0) = w0, w(1) = w1.
double comparison_solution(const CurvatureDimension& cd, double r, double w0, double w1, double t);

struct ConcavityCheck {
  std::vector<double> t;
  std::vector<double> w;                    // u^{1/(N-1)}
  std::vector<double> differential_margin;  // -(K r^2/(N-1)) w - w''
  std::vector<double> chord_margin;         // w - comparison solution
  double min_differential = 0.0;            // over interior points
  double min_chord = 0.0;
};

ConcavityCheck u_concavity_check(const RiccatiTrace& trace, const CurvatureDimension& cd);
// u sampled on the uniform grid of [0,1] with u.size() points.
ConcavityCheck u_concavity_check(const std::vector<double>& u, const CurvatureDimension& cd, double r);

struct PropagationResult {
  bool propagated = false;
  bool equality_at_t0 = false;
  double deviation_at_t0 = 0.0;
  double max_deviation = 0.0;
};

// Equality at t0 between w = u^{1/(N-1)} and its comparison solution,
// propagated to the whole grid: propagated iff the deviation at t0 is
// <= tol and the largest deviation is <= 10 tol. Throws PreconditionError
// if w violates w'' <= -(K r^2/(N-1)) w by more than tol inside (0,1).
PropagationResult equality_propagation(const std::vector<double>& u, const CurvatureDimension& cd, double r,
                                       double t0, double tol);

// (J^psi_t)^{1/N} >= (1-t+t f(1))^{1/N} phi^{(N-1)/N} >= (1-t) beta_{1-t}^{1/N} + t beta_t^{1/N}
// (J^psi_1)^{1/N}, with f normalised to f(0) = 1 and phi the comparison
// solution for u f(0). Returns the smaller of the two margins over the grid.
double holder_recombination_margin(const RiccatiTrace& trace, const CurvatureDimension& cd);

struct WeightProfile {
  double K = 0.0;
  double N = 1.0;
  double n = 1.0;
  double r = 1.0;
  double C0 = 0.0;
  double C1 = 1.0;
};

// [C0 s(t) + C1 c(t)]^{N-n}, with (s, c) = (sin, cos), (t, 1) or (sinh, cosh)
// at frequency sqrt(|K|/(N-1)) r. Equals 1 when N = n.
double weight_closed_form(const WeightProfile& p, double t);
// Bracket C0 s(t) + C1 c(t), i.e. exp(-psi(gamma(t))/(N-n)).
double weight_bracket(const WeightProfile& p, double t);

WeightProfile profile_from_initial(double psi_x, double dpsi_x, double K, double N, double n, double r);

struct ProfileFit {
  WeightProfile profile;
  double residual = 0.0;  // max |reconstructed density - sample|
};

ProfileFit fit_weight_profile(const std::vector<std::pair<double, double>>& samples, double K, double N,
                              double n, double r);

// Cauchy-Schwarz structure of an equality trace: V is the transverse block
// of U, xi = tr V/(n-1); equality needs V = xi Id and -psi' = (N-n) xi.
struct IsotropyDiagnosis {
  double min_cs_ratio = 1.0;          // (tr V)^2 / ((n-1) |V|_F^2), 1 iff isotropic
  double max_weight_mismatch = 0.0;   // max |-psi' - (N-n) xi|
  bool isotropic = false;
};

IsotropyDiagnosis diagnose_isotropy(const RiccatiTrace& trace, const CurvatureDimension& cd, double tol);

}  // namespace bbl
