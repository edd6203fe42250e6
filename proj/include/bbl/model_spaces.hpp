#pragma once

#include <Eigen/Dense>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bbl/distortion.hpp"

namespace bbl {

// Ambient coordinates live on the stack; curved spaces of dimension n use
// R^{n+1}, so n <= kMaxAmbientDim - 1 for them.
inline constexpr int kMaxAmbientDim = 9;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbientDim, 1>;

struct Point {
  Vec coords;
};

Point make_point(std::initializer_list<double> coords);
Point make_point(const Vec& coords);

enum class SpaceKind { Euclidean, Sphere, Hyperbolic };

std::string to_string(SpaceKind kind);
SpaceKind space_kind_from_string(const std::string& name);

// Constant-curvature model geometry. The sphere of curvature sec is the
// radius 1/sqrt(sec) sphere in R^{n+1}; the hyperbolic space of curvature
// sec < 0 is the upper sheet of <x,x> = -1/|sec| for the Minkowski product
// with the time coordinate stored last.
class ModelSpace {
 public:
  static ModelSpace euclidean(int n);
  static ModelSpace sphere(int n, double sec = 1.0);
  static ModelSpace hyperbolic(int n, double sec = -1.0);
  static ModelSpace make(SpaceKind kind, int n, double sec);

  SpaceKind kind() const { return kind_; }
  int dim() const { return n_; }
  int ambient_dim() const { return kind_ == SpaceKind::Euclidean ? n_ : n_ + 1; }
  double sec() const { return sec_; }
  // Curvature radius 1/sqrt(|sec|); +inf for Euclidean space.
  double radius() const;

  // Ambient bilinear form: dot product, or Minkowski product for hyperbolic.
  double inner(const Vec& a, const Vec& b) const;

  bool is_valid(const Point& p) const;
  void validate(const Point& p) const;  // throws DomainError
  // Nearest model point (renormalisation onto the sphere/hyperboloid).
  Point project(const Vec& v) const;
  // Euclidean origin, sphere north pole, hyperboloid vertex.
  Point base_point() const;

  Vec project_tangent(const Point& x, const Vec& v) const;
  double tangent_norm(const Vec& v) const;
  // Orthonormal basis of the tangent space at x, length dim().
  std::vector<Vec> tangent_frame(const Point& x) const;

  Point exp(const Point& x, const Vec& v) const;
  // Tangent vector at x of length d(x,y) pointing to y.
  Vec log(const Point& x, const Point& y) const;

  friend bool operator==(const ModelSpace&, const ModelSpace&) = default;

 private:
  ModelSpace(SpaceKind k, int n, double sec) : kind_(k), n_(n), sec_(sec) {}

  SpaceKind kind_ = SpaceKind::Euclidean;
  int n_ = 1;
  double sec_ = 0.0;
};

double distance(const ModelSpace& space, const Point& x, const Point& y);

// z on the geodesic from x to y with d(x,z) = t d(x,y).
Point intermediate_point(const ModelSpace& space, const Point& x, const Point& y, double t);

// y with z = intermediate_point(x, y, 1/s): the geodesic through x and z,
// continued to s times the length d(x,z).
Point extend(const ModelSpace& space, const Point& x, const Point& z, double s);

// Velocity at time t of the constant-speed geodesic from x (t=0) to y (t=1).
Vec geodesic_velocity(const ModelSpace& space, const Point& x, const Point& y, double t);

// Sectional curvature recovered from distances alone: for orthonormal
// tangent vectors v, w at x, the right geodesic triangle with legs eps solves
// sin(sqrt(k) c / 2) = sin(sqrt(k) eps) / sqrt(2) (and its hyperbolic and
// flat analogues) for k.
double estimate_sectional_curvature(const ModelSpace& space, const Point& x, const Vec& v,
                                    const Vec& w, double eps);

// Smooth potential psi with m = exp(-psi) vol. Directional derivatives are
// taken along the geodesic s -> exp_p(s v).
class Weight {
 public:
  using ValueFn = std::function<double(const Point&)>;
  using DirFn = std::function<double(const Point&, const Vec&)>;

  Weight(std::string name, ValueFn value, DirFn first, DirFn second, bool constant);

  static Weight zero();
  static Weight constant(double c);
  // psi(x) = a.x + b on Euclidean space.
  static Weight linear(const Vec& a, double b);
  // psi(x) = c |x|^2 / 2 on Euclidean space.
  static Weight quadratic(double c);
  // Density |x|^alpha, i.e. psi(x) = -alpha log |x|, on Euclidean space.
  static Weight power_norm(double alpha);

  double value(const Point& p) const { return value_(p); }
  double density(const Point& p) const;
  double directional(const Point& p, const Vec& v) const { return first_(p, v); }
  double second_directional(const Point& p, const Vec& v) const { return second_(p, v); }
  bool is_constant() const { return constant_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  ValueFn value_;
  DirFn first_;
  DirFn second_;
  bool constant_ = false;
};

class Region;

class WeightedSpace {
 public:
  WeightedSpace(ModelSpace space, Weight psi);
  WeightedSpace(ModelSpace space, Weight psi, Region domain);

  const ModelSpace& space() const { return space_; }
  const Weight& psi() const { return psi_; }
  const Region* domain() const;
  bool in_domain(const Point& p) const;
  // exp(-psi(p)) inside the domain, 0 outside.
  double density(const Point& p) const;

  // Largest discrepancy between the supplied directional derivatives and
  // central differences of psi along exp_p(s v), step h.
  double derivative_consistency(const Point& p, const Vec& v, double h = 1e-4) const;

 private:
  ModelSpace space_;
  Weight psi_;
  std::shared_ptr<const Region> domain_;
};

// Ric_{m,N}(gamma') at gamma(t) for the geodesic x0 -> x1 parametrised on
// [0,1], so |gamma'| = d(x0, x1).
double n_ricci_along(const WeightedSpace& ws, const CurvatureDimension& cd, const Point& x0,
                     const Point& x1, double t);

}  // namespace bbl
