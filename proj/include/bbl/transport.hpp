#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "bbl/distortion.hpp"
#include "bbl/model_spaces.hpp"

namespace bbl {

// Density with respect to m = exp(-psi) dx on an interval of the weighted
// line. Named constructors describe the density relative to m:
//   uniform  rho constant on [lo, hi] (so mu = m restricted, normalised)
//   power    rho proportional to x^k on [lo, hi]
//   gaussian the law N(mu, sigma^2), truncated at mu +/- width*sigma,
//            i.e. rho = phi_{mu,sigma} exp(psi)
class Density1D {
 public:
  using Fn = std::function<double(double)>;

  // rho with total mass computed by quadrature against m.
  static Density1D from_function(const WeightedSpace& ws, double lo, double hi, Fn rho);
  static Density1D uniform(const WeightedSpace& ws, double lo, double hi);
  static Density1D power(const WeightedSpace& ws, double lo, double hi, double k);
  static Density1D gaussian(const WeightedSpace& ws, double mu, double sigma, double width = 12.0);

  double operator()(double x) const { return (x < lo_ || x > hi_) ? 0.0 : rho_(x); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double total_mass() const { return total_mass_; }

 private:
  Density1D(double lo, double hi, Fn rho, double mass)
      : lo_(lo), hi_(hi), rho_(std::move(rho)), total_mass_(mass) {}

  double lo_ = 0.0;
  double hi_ = 1.0;
  Fn rho_;
  double total_mass_ = 1.0;
};

// int_lo^hi rho exp(-psi) dx by composite Gauss-Legendre quadrature.
double mass_1d(const WeightedSpace& ws, const Density1D::Fn& rho, double lo, double hi,
               int panels = 256);

// Monotone map T with derivative T', defined on the support of the source.
class TransportMap1D {
 public:
  using Fn = std::function<double(double)>;

  TransportMap1D(double lo, double hi, Fn map, Fn derivative)
      : lo_(lo), hi_(hi), map_(std::move(map)), derivative_(std::move(derivative)) {}

  static TransportMap1D identity(double lo, double hi);
  // x -> center + ratio (x - center), ratio > 0.
  static TransportMap1D homothety(double lo, double hi, double center, double ratio);
  static TransportMap1D translation(double lo, double hi, double shift);

  double operator()(double x) const { return map_(x); }
  double derivative(double x) const { return derivative_(x); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_, hi_;
  Fn map_, derivative_;
};

// Monotone rearrangement CDF_1(T(x)) = CDF_0(x) on a grid of `grid` cells.
// T' comes from the density ratio rho0 exp(-psi) = rho1(T) exp(-psi(T)) T'.
TransportMap1D optimal_map_1d(const WeightedSpace& ws, const Density1D& rho0, const Density1D& rho1,
                              int grid = 4096);

// F_t(x) = (1 - t) x + t T(x).
double interpolate(const TransportMap1D& T, double x, double t);

// J^psi_t(x) = exp(psi(x) - psi(F_t(x))) ((1 - t) + t T'(x)).
double weighted_jacobian_1d(const WeightedSpace& ws, const TransportMap1D& T, double x, double t);

// Density of (F_t)# (rho0 m) with respect to m, obtained by inverting F_t.
Density1D pushforward_density(const WeightedSpace& ws, const Density1D& rho0, const TransportMap1D& T,
                              double t);

// max over a uniform grid of |rho0(x) - rho_t(F_t(x)) J^psi_t(x)|.
double monge_ampere_residual(const WeightedSpace& ws, const Density1D& rho0, const Density1D& rho_t,
                             const TransportMap1D& T, double t, int grid = 1000);

// One transport geodesic t -> F_t(x0) with its weighted Jacobian.
struct TransportRay {
  Point x0;
  Point x1;
  double r = 0.0;
  std::function<Point(double)> interpolant;
  std::function<double(double)> jacobian;
};

TransportRay ray_1d(const WeightedSpace& ws, const TransportMap1D& T, double x);
// Radial ray of the Euclidean homothety x -> c + ratio (x - c).
TransportRay homothety_ray(const WeightedSpace& ws, const Point& center, double ratio, const Point& x0);

// J_t^{1/N} - [(1-t) beta_{1-t}(r)^{1/N} + t beta_t(r)^{1/N} J_1^{1/N}].
double concavity_margin(const WeightedSpace& ws, const CurvatureDimension& cd, const TransportRay& ray,
                        double t);

double n_ricci_along(const WeightedSpace& ws, const CurvatureDimension& cd, const TransportRay& ray,
                     double t);

}  // namespace bbl
