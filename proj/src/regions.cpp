#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bbl/errors.hpp"
#include "bbl/region.hpp"

namespace bbl {

namespace {

constexpr double kPi = std::numbers::pi;

// Volume of the unit sphere S^{n-1} in R^n.
double unit_sphere_area(int n) {
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

// Radial volume density factor s_k(rho) for the model of curvature sec.
double radial_factor(const ModelSpace& space, double rho) {
  switch (space.kind()) {
    case SpaceKind::Euclidean: return rho;
    case SpaceKind::Sphere: return space.radius() * std::sin(rho / space.radius());
    case SpaceKind::Hyperbolic: return space.radius() * std::sinh(rho / space.radius());
  }
  return rho;
}

double ball_volume(const ModelSpace& space, double rho) {
  const int n = space.dim();
  if (n == 1) return 2.0 * rho;
  if (space.kind() == SpaceKind::Euclidean) {
    return std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0) * std::pow(rho, n);
  }
  const double R = space.radius();
  if (n == 2) {
    const double a = rho / R;
    // 1 - cos a = 2 sin^2(a/2), cosh a - 1 = 2 sinh^2(a/2)
    const double h = space.kind() == SpaceKind::Sphere ? std::sin(0.5 * a) : std::sinh(0.5 * a);
    return 4.0 * kPi * R * R * h * h;
  }
  auto f = [&](double s) { return std::pow(radial_factor(space, s), n - 1); };
  const double radial = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, rho, 15, 1e-14);
  return unit_sphere_area(n) * radial;
}

Vec gaussian_vector(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec g(n);
  double nrm = 0.0;
  do {
    for (int i = 0; i < n; ++i) g(i) = normal(rng);
    nrm = g.norm();
  } while (!(nrm > 1e-300));
  return g / nrm;
}

}  // namespace

Region Region::ball(const ModelSpace& space, const Point& center, double radius) {
  space.validate(center);
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("ball radius must be finite and > 0");
  if (space.kind() == SpaceKind::Sphere && radius >= kPi * space.radius()) {
    throw DomainError("spherical ball radius must be below pi/sqrt(sec)");
  }
  Region r(space);
  r.shape_ = Shape::Ball;
  r.center_ = center;
  r.radius_ = radius;
  r.frame_ = space.tangent_frame(center);
  return r;
}

Region Region::box(const ModelSpace& space, const Vec& lo, const Vec& hi) {
  if (space.kind() != SpaceKind::Euclidean) throw DomainError("boxes are only defined in Euclidean space");
  if (lo.size() != space.dim() || hi.size() != space.dim()) throw DomainError("box corner dimension mismatch");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (std::isnan(lo(i)) || std::isnan(hi(i)) || !(lo(i) < hi(i))) {
      throw DomainError("box requires corner_lo < corner_hi in every coordinate");
    }
  }
  Region r(space);
  r.shape_ = Shape::Box;
  r.lo_ = lo;
  r.hi_ = hi;
  return r;
}

Region Region::interval(const ModelSpace& space, double lo, double hi) {
  if (space.kind() != SpaceKind::Euclidean || space.dim() != 1) {
    throw DomainError("intervals are only defined on the Euclidean line");
  }
  if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) throw DomainError("interval requires lo < hi");
  Region r(space);
  r.shape_ = Shape::Interval;
  r.lo_ = Vec::Constant(1, lo);
  r.hi_ = Vec::Constant(1, hi);
  return r;
}

bool Region::bounded() const {
  if (shape_ == Shape::Ball) return true;
  return lo_.allFinite() && hi_.allFinite();
}

double Region::excess(const Point& p) const {
  if (shape_ == Shape::Ball) return distance(space_, center_, p) - radius_;
  if (p.coords.size() != lo_.size()) throw DomainError("region: point dimension mismatch");
  double e = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < lo_.size(); ++i) {
    e = std::max(e, std::max(lo_(i) - p.coords(i), p.coords(i) - hi_(i)));
  }
  return e;
}

double Region::volume() const {
  if (shape_ == Shape::Ball) return ball_volume(space_, radius_);
  return (hi_ - lo_).prod();
}

Point Region::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = space_.dim();
  if (shape_ != Shape::Ball) {
    if (!bounded()) throw RangeError("cannot sample an unbounded region");
    Vec p(n);
    for (int i = 0; i < n; ++i) p(i) = lo_(i) + unif(rng) * (hi_(i) - lo_(i));
    return Point{p};
  }
  // Radius with density proportional to s_k(rho)^(n-1): propose from rho^(n-1)
  // and accept with (s_k(rho)/rho)^(n-1) relative to its maximum.
  double rho = 0.0;
  const double inv_n = 1.0 / n;
  if (space_.kind() == SpaceKind::Euclidean || n == 1) {
    rho = radius_ * std::pow(unif(rng), inv_n);
  } else {
    const double ceiling =
        space_.kind() == SpaceKind::Sphere ? 1.0 : std::pow(radial_factor(space_, radius_) / radius_, n - 1);
    for (;;) {
      rho = radius_ * std::pow(unif(rng), inv_n);
      const double ratio = rho > 0.0 ? radial_factor(space_, rho) / rho : 1.0;
      if (unif(rng) * ceiling <= std::pow(ratio, n - 1)) break;
    }
  }
  const Vec dir = gaussian_vector(n, rng);
  Vec u = rho * dir;
  return from_param(u);
}

Point Region::center() const {
  if (shape_ == Shape::Ball) return center_;
  if (!bounded()) throw RangeError("unbounded region has no centre");
  return Point{0.5 * (lo_ + hi_)};
}

double Region::circumradius() const {
  if (shape_ == Shape::Ball) return radius_;
  if (!bounded()) return std::numeric_limits<double>::infinity();
  return 0.5 * (hi_ - lo_).norm();
}

Point Region::from_param(const Vec& u) const {
  if (u.size() != param_dim()) throw DomainError("region parameter dimension mismatch");
  if (shape_ != Shape::Ball) return Point{u};
  if (space_.kind() == SpaceKind::Euclidean) return Point{center_.coords + u};
  Vec v = Vec::Zero(space_.ambient_dim());
  for (Eigen::Index i = 0; i < u.size(); ++i) v += u(i) * frame_[static_cast<std::size_t>(i)];
  return space_.exp(center_, v);
}

Vec Region::clamp_param(const Vec& u) const {
  if (shape_ == Shape::Ball) {
    const double nrm = u.norm();
    if (nrm > radius_) return u * (radius_ / nrm);
    return u;
  }
  return u.cwiseMax(lo_).cwiseMin(hi_);
}

double Region::param_scale() const {
  if (shape_ == Shape::Ball) return radius_;
  if (!bounded()) throw RangeError("unbounded region has no parameter scale");
  return 0.5 * (hi_ - lo_).maxCoeff();
}

bool Region::param_from_unit_cube(const Vec& cube, Vec& u) const {
  if (shape_ == Shape::Ball) {
    u = radius_ * (2.0 * cube.array() - 1.0).matrix();
    return u.norm() <= radius_;
  }
  if (!bounded()) throw RangeError("unbounded region has no parametrisation");
  u = lo_ + cube.cwiseProduct(hi_ - lo_);
  return true;
}

std::string Region::describe() const {
  std::ostringstream os;
  os.precision(10);
  auto vec = [&](const Vec& v) {
    os << '(';
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
    os << ')';
  };
  switch (shape_) {
    case Shape::Ball:
      os << "ball center=";
      vec(center_.coords);
      os << " radius=" << radius_;
      break;
    case Shape::Box:
      os << "box lo=";
      vec(lo_);
      os << " hi=";
      vec(hi_);
      break;
    case Shape::Interval: os << "interval [" << lo_(0) << ", " << hi_(0) << "]"; break;
  }
  return os.str();
}

}  // namespace bbl
