#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bbl/distortion.hpp"
#include "bbl/means.hpp"
#include "bbl/measure.hpp"
#include "bbl/model_spaces.hpp"
#include "bbl/ode.hpp"
#include "bbl/region.hpp"

namespace bbl {

using ScalarField = std::function<double(const Point&)>;

struct BBLInstance {
  WeightedSpace ws;
  CurvatureDimension cd;
  ScalarField f0, f1, h;
  double t = 0.5;
  PMeanExponent p = PMeanExponent::pos_inf();
  Region support0, support1, support_h;
};

// Euclidean homothety x -> center + ratio (x - center) carrying A onto B.
struct Homothety {
  Point center;
  double ratio = 1.0;
};

struct BMInstance {
  std::string name;
  WeightedSpace ws;
  CurvatureDimension cd;
  Region A, B;
  double t = 0.5;
  std::optional<Homothety> homothety;
  // Region known to contain Z_t(A,B); by default a ball from the geometry.
  std::optional<Region> bounding;
};

struct VerifyOptions {
  double equality_tol_rel = 1e-4;  // relative part of the equality band
  double inconclusive_rel = 1e-2;  // 3 std_err above this fraction of rhs leaves equality undecided
  unsigned threads = 0;
};

struct VerificationReport {
  std::string kind;  // "bm" or "bbl"
  std::string method;  // "monte-carlo" or "quadrature"
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double std_err = 0.0;
  bool pass = false;
  bool equality = false;
  bool inconclusive = false;
  long samples = 0;
  std::uint64_t seed = 0;
  double theta = 0.0;
  // Measures behind lhs/rhs: m(A), m(B), m(Z_t) for BM; int f0, int f1, int h for BBL.
  Estimate first, second, combined;
  bool hypothesis_checked = false;
  long hypothesis_violations = 0;
  std::vector<std::string> notes;
};

// margin, pass, equality and inconclusive from lhs, rhs and std_err.
void classify(VerificationReport& rep, const VerifyOptions& opt);

struct HypothesisViolation {
  Point x, y, z;
  double h = 0.0;
  double required = 0.0;
};

std::vector<HypothesisViolation> check_bbl_hypothesis(const BBLInstance& inst, long n_pairs, std::uint64_t seed);

// `hypothesis_pairs` > 0 runs check_bbl_hypothesis first and records it.
VerificationReport verify_bbl(const BBLInstance& inst, long n_samples, std::uint64_t seed,
                              long hypothesis_pairs = 0, const VerifyOptions& opt = {});

// f0 = beta_{1-t}(Theta) 1_A, f1 = beta_t(Theta) 1_B, h = 1_{Z_t(A,B)}.
BBLInstance bbl_from_bm(const BMInstance& inst, PMeanExponent p, int z_trials = 4096);

// inf (K >= 0) or sup (K < 0) of d(x, y) over A x B.
double theta(const ModelSpace& space, const Region& A, const Region& B, double K, long n_pairs = 4096,
             std::uint64_t seed = 0);

// Ball around the t-intermediate point of the circumscribed centres that
// contains Z_t(A, B).
Region z_bounding_ball(const ModelSpace& space, const Region& A, const Region& B, double t);

VerificationReport verify_bm(const BMInstance& inst, long n_samples, int z_trials, std::uint64_t seed,
                             const VerifyOptions& opt = {});

struct RayFit {
  Point x0, x1;
  ProfileFit fit;
};

struct RigidityDiagnosis {
  enum class Conclusion { NoEquality, EqualityConsistentWithRigidity, EqualityInconsistent, Inconclusive };

  std::vector<double> t_grid;
  std::vector<VerificationReport> reports;
  std::vector<double> equality_times;
  double inferred_sec = 0.0;
  double expected_sec = 0.0;  // K/(N-1)
  std::vector<RayFit> weight_fits;
  double max_fit_residual = 0.0;
  std::optional<Estimate> sym_diff;  // m(A delta B), K > 0 with equality
  Conclusion conclusion = Conclusion::NoEquality;
  std::vector<std::string> findings;
};

std::string to_string(RigidityDiagnosis::Conclusion c);

struct RigidityOptions {
  long n_samples = 100000;
  int z_trials = 4096;
  double sec_tol = 1e-6;
  double fit_tol = 1e-3;
  VerifyOptions verify;
};

RigidityDiagnosis rigidity_scan(const BMInstance& inst, const std::vector<double>& t_grid, int ray_samples,
                                std::uint64_t seed, const RigidityOptions& opt = {});

// Monte Carlo m(A delta B) = m(A \ B) + m(B \ A).
Estimate check_equal_sets(const WeightedSpace& ws, const Region& A, const Region& B, long n_samples,
                          std::uint64_t seed, unsigned threads = 0);

}  // namespace bbl
