#include "bbl/model_spaces.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "bbl/errors.hpp"
#include "bbl/region.hpp"

namespace bbl {

namespace {

constexpr double kPi = std::numbers::pi;

// Gap kept from the antipode before a sphere geodesic counts as ambiguous.
constexpr double kAntipodalGap = 1e-9;

}  // namespace

Point make_point(std::initializer_list<double> coords) {
  if (coords.size() == 0 || coords.size() > static_cast<std::size_t>(kMaxAmbientDim)) {
    throw DomainError("point dimension out of range");
  }
  Point p{Vec(static_cast<Eigen::Index>(coords.size()))};
  Eigen::Index i = 0;
  for (double c : coords) p.coords(i++) = c;
  return p;
}

Point make_point(const Vec& coords) { return Point{coords}; }

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::Euclidean: return "euclidean";
    case SpaceKind::Sphere: return "sphere";
    case SpaceKind::Hyperbolic: return "hyperbolic";
  }
  return "unknown";
}

SpaceKind space_kind_from_string(const std::string& name) {
  if (name == "euclidean") return SpaceKind::Euclidean;
  if (name == "sphere") return SpaceKind::Sphere;
  if (name == "hyperbolic") return SpaceKind::Hyperbolic;
  throw DomainError("unknown space kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// ModelSpace

ModelSpace ModelSpace::euclidean(int n) { return make(SpaceKind::Euclidean, n, 0.0); }
ModelSpace ModelSpace::sphere(int n, double sec) { return make(SpaceKind::Sphere, n, sec); }
ModelSpace ModelSpace::hyperbolic(int n, double sec) { return make(SpaceKind::Hyperbolic, n, sec); }

ModelSpace ModelSpace::make(SpaceKind kind, int n, double sec) {
  if (n < 1) throw DomainError("model space dimension must be >= 1");
  if (!std::isfinite(sec)) throw DomainError("sectional curvature must be finite");
  switch (kind) {
    case SpaceKind::Euclidean:
      if (n > kMaxAmbientDim) throw DomainError("Euclidean dimension too large");
      if (sec != 0.0) throw DomainError("Euclidean space has sec = 0");
      break;
    case SpaceKind::Sphere:
      if (n > kMaxAmbientDim - 1) throw DomainError("sphere dimension too large");
      if (!(sec > 0.0)) throw DomainError("sphere requires sec > 0");
      break;
    case SpaceKind::Hyperbolic:
      if (n > kMaxAmbientDim - 1) throw DomainError("hyperbolic dimension too large");
      if (!(sec < 0.0)) throw DomainError("hyperbolic space requires sec < 0");
      break;
  }
  return ModelSpace(kind, n, sec);
}

double ModelSpace::radius() const {
  if (kind_ == SpaceKind::Euclidean) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(std::abs(sec_));
}

double ModelSpace::inner(const Vec& a, const Vec& b) const {
  if (kind_ != SpaceKind::Hyperbolic) return a.dot(b);
  const Eigen::Index last = a.size() - 1;
  return a.head(last).dot(b.head(last)) - a(last) * b(last);
}

bool ModelSpace::is_valid(const Point& p) const {
  if (p.coords.size() != ambient_dim()) return false;
  if (!p.coords.allFinite()) return false;
  switch (kind_) {
    case SpaceKind::Euclidean: return true;
    case SpaceKind::Sphere: {
      const double r2 = 1.0 / sec_;
      return std::abs(p.coords.squaredNorm() - r2) <= 1e-12 * std::max(1.0, r2);
    }
    case SpaceKind::Hyperbolic: {
      const double r2 = -1.0 / sec_;
      const Eigen::Index last = p.coords.size() - 1;
      if (!(p.coords(last) > 0.0)) return false;
      return std::abs(inner(p.coords, p.coords) + r2) <= 1e-12 * (r2 + p.coords.squaredNorm());
    }
  }
  return false;
}

void ModelSpace::validate(const Point& p) const {
  if (!is_valid(p)) {
    throw DomainError("point does not satisfy the embedding constraint of the " + to_string(kind_) +
                      " model");
  }
}

Point ModelSpace::project(const Vec& v) const {
  if (v.size() != ambient_dim()) throw DomainError("project: wrong ambient dimension");
  switch (kind_) {
    case SpaceKind::Euclidean: return Point{v};
    case SpaceKind::Sphere: {
      const double nrm = v.norm();
      if (!(nrm > 0.0)) throw DomainError("project: zero vector has no spherical projection");
      return Point{v * (radius() / nrm)};
    }
    case SpaceKind::Hyperbolic: {
      const double q = -inner(v, v);
      const Eigen::Index last = v.size() - 1;
      if (!(q > 0.0) || !(v(last) > 0.0)) throw DomainError("project: vector is not future timelike");
      return Point{v * (radius() / std::sqrt(q))};
    }
  }
  return Point{v};
}

Point ModelSpace::base_point() const {
  Vec v = Vec::Zero(ambient_dim());
  if (kind_ != SpaceKind::Euclidean) v(ambient_dim() - 1) = radius();
  return Point{v};
}

Vec ModelSpace::project_tangent(const Point& x, const Vec& v) const {
  switch (kind_) {
    case SpaceKind::Euclidean: return v;
    case SpaceKind::Sphere: return v - (x.coords.dot(v) * sec_) * x.coords;
    case SpaceKind::Hyperbolic:
      // <x,x> = -R^2, so the orthogonal projection adds <v,x>/R^2 x.
      return v + (inner(v, x.coords) * (-sec_)) * x.coords;
  }
  return v;
}

double ModelSpace::tangent_norm(const Vec& v) const {
  return std::sqrt(std::max(0.0, inner(v, v)));
}

std::vector<Vec> ModelSpace::tangent_frame(const Point& x) const {
  std::vector<Vec> frame;
  frame.reserve(static_cast<std::size_t>(n_));
  const int amb = ambient_dim();
  // Project the ambient axes in order and orthonormalise (Gram-Schmidt, twice).
  for (int i = 0; i < amb && static_cast<int>(frame.size()) < n_; ++i) {
    Vec e = project_tangent(x, Vec::Unit(amb, i));
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec& f : frame) e -= inner(e, f) * f;
    }
    const double nrm = tangent_norm(e);
    if (nrm > 1e-6) frame.push_back(e / nrm);
  }
  if (static_cast<int>(frame.size()) != n_) throw DomainError("tangent_frame: degenerate point");
  return frame;
}

Point ModelSpace::exp(const Point& x, const Vec& v) const {
  if (kind_ == SpaceKind::Euclidean) return Point{x.coords + v};
  const double s = tangent_norm(v);
  if (s == 0.0) return x;
  const double R = radius();
  const double theta = s / R;
  Vec out;
  if (kind_ == SpaceKind::Sphere) {
    out = std::cos(theta) * x.coords + (R * std::sin(theta) / s) * v;
  } else {
    out = std::cosh(theta) * x.coords + (R * std::sinh(theta) / s) * v;
  }
  return project(out);
}

Vec ModelSpace::log(const Point& x, const Point& y) const {
  const Vec diff = y.coords - x.coords;
  if (kind_ == SpaceKind::Euclidean) return diff;
  const double d = distance(*this, x, y);
  if (d == 0.0) return Vec::Zero(ambient_dim());
  if (kind_ == SpaceKind::Sphere && d >= kPi * radius() * (1.0 - kAntipodalGap)) {
    throw AmbiguityError("log: antipodal points have no unique geodesic");
  }
  // Tangential part of y - x; <x, y - x> is small and accurate for close points.
  const Vec w = project_tangent(x, diff);
  const double wn = tangent_norm(w);
  if (!(wn > 0.0)) throw AmbiguityError("log: tangent direction is undefined");
  return w * (d / wn);
}

// ---------------------------------------------------------------------------
// Geodesic operations

double distance(const ModelSpace& space, const Point& x, const Point& y) {
  if (x.coords.size() != space.ambient_dim() || y.coords.size() != space.ambient_dim()) {
    throw DomainError("distance: point dimension does not match the space");
  }
  switch (space.kind()) {
    case SpaceKind::Euclidean: return (x.coords - y.coords).norm();
    case SpaceKind::Sphere: {
      const double a = (x.coords - y.coords).norm();
      const double b = (x.coords + y.coords).norm();
      return 2.0 * space.radius() * std::atan2(a, b);
    }
    case SpaceKind::Hyperbolic: {
      const Vec diff = x.coords - y.coords;
      const double q = std::max(0.0, space.inner(diff, diff));
      const double R = space.radius();
      return 2.0 * R * std::asinh(std::sqrt(q) / (2.0 * R));
    }
  }
  return 0.0;
}

Point intermediate_point(const ModelSpace& space, const Point& x, const Point& y, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("intermediate_point: t must lie in [0,1]");
  if (t == 0.0) return x;
  if (t == 1.0) return y;
  if (space.kind() == SpaceKind::Euclidean) return Point{(1.0 - t) * x.coords + t * y.coords};
  const Vec v = space.log(x, y);
  return space.exp(x, t * v);
}

Point extend(const ModelSpace& space, const Point& x, const Point& z, double s) {
  if (!(s >= 1.0) || !std::isfinite(s)) throw DomainError("extend: s must be finite and >= 1");
  if (s == 1.0) return z;
  if (space.kind() == SpaceKind::Euclidean) return Point{x.coords + s * (z.coords - x.coords)};
  const double d = distance(space, x, z);
  if (d == 0.0) return x;
  if (space.kind() == SpaceKind::Sphere && s * d >= kPi * space.radius() * (1.0 - kAntipodalGap)) {
    throw RangeError("extend: extension leaves the unique-geodesic range of the sphere");
  }
  const Vec v = space.log(x, z);
  return space.exp(x, s * v);
}

Vec geodesic_velocity(const ModelSpace& space, const Point& x, const Point& y, double t) {
  if (space.kind() == SpaceKind::Euclidean) return y.coords - x.coords;
  const Vec v = space.log(x, y);
  const double d = space.tangent_norm(v);
  if (d == 0.0) return v;
  const double R = space.radius();
  const double theta = d / R;
  const Vec unit = v / d;
  if (space.kind() == SpaceKind::Sphere) {
    return d * (-std::sin(t * theta) / R * x.coords + std::cos(t * theta) * unit);
  }
  return d * (std::sinh(t * theta) / R * x.coords + std::cosh(t * theta) * unit);
}

namespace {

// Hypotenuse of the right geodesic triangle with legs eps in curvature k.
double right_hypotenuse(double k, double eps) {
  if (k == 0.0) return std::sqrt(2.0) * eps;
  if (k > 0.0) {
    const double a = std::sqrt(k);
    return 2.0 / a * std::asin(std::sin(a * eps) / std::sqrt(2.0));
  }
  const double a = std::sqrt(-k);
  return 2.0 / a * std::asinh(std::sinh(a * eps) / std::sqrt(2.0));
}

}  // namespace

double estimate_sectional_curvature(const ModelSpace& space, const Point& x, const Vec& v,
                                    const Vec& w, double eps) {
  if (space.dim() < 2) throw DomainError("sectional curvature needs dimension >= 2");
  if (!(eps > 0.0)) throw DomainError("estimate_sectional_curvature: eps must be > 0");
  const Vec vt = space.project_tangent(x, v);
  Vec wt = space.project_tangent(x, w);
  const double vn = space.tangent_norm(vt);
  if (!(vn > 0.0)) throw DomainError("estimate_sectional_curvature: zero direction");
  const Vec e1 = vt / vn;
  wt -= space.inner(wt, e1) * e1;
  const double wn = space.tangent_norm(wt);
  if (!(wn > 0.0)) throw DomainError("estimate_sectional_curvature: parallel directions");
  const Vec e2 = wt / wn;
  const Point p1 = space.exp(x, eps * e1);
  const Point p2 = space.exp(x, eps * e2);
  const double c = distance(space, p1, p2);
  // c(k) is strictly decreasing in k; bracket and bisect.
  double lo = -std::pow(20.0 / eps, 2);
  double hi = std::pow(kPi / (2.0 * eps), 2) * 0.999;
  if (c >= right_hypotenuse(lo, eps) || c <= right_hypotenuse(hi, eps)) {
    throw DomainError("estimate_sectional_curvature: curvature outside measurable range");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (right_hypotenuse(mid, eps) > c) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Weights

Weight::Weight(std::string name, ValueFn value, DirFn first, DirFn second, bool constant)
    : name_(std::move(name)),
      value_(std::move(value)),
      first_(std::move(first)),
      second_(std::move(second)),
      constant_(constant) {}

double Weight::density(const Point& p) const { return std::exp(-value_(p)); }

Weight Weight::zero() { return constant(0.0); }

Weight Weight::constant(double c) {
  return Weight(
      c == 0.0 ? "zero" : "constant", [c](const Point&) { return c; },
      [](const Point&, const Vec&) { return 0.0; }, [](const Point&, const Vec&) { return 0.0; },
      true);
}

Weight Weight::linear(const Vec& a, double b) {
  return Weight(
      "linear", [a, b](const Point& p) { return a.dot(p.coords) + b; },
      [a](const Point&, const Vec& v) { return a.dot(v); },
      [](const Point&, const Vec&) { return 0.0; }, a.isZero(0.0));
}

Weight Weight::quadratic(double c) {
  return Weight(
      "quadratic", [c](const Point& p) { return 0.5 * c * p.coords.squaredNorm(); },
      [c](const Point& p, const Vec& v) { return c * p.coords.dot(v); },
      [c](const Point&, const Vec& v) { return c * v.squaredNorm(); }, c == 0.0);
}

Weight Weight::power_norm(double alpha) {
  return Weight(
      "power_norm",
      [alpha](const Point& p) {
        const double r = p.coords.norm();
        if (r == 0.0) return alpha > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        return -alpha * std::log(r);
      },
      [alpha](const Point& p, const Vec& v) {
        return -alpha * p.coords.dot(v) / p.coords.squaredNorm();
      },
      [alpha](const Point& p, const Vec& v) {
        const double r2 = p.coords.squaredNorm();
        const double xv = p.coords.dot(v);
        return -alpha * (v.squaredNorm() / r2 - 2.0 * xv * xv / (r2 * r2));
      },
      alpha == 0.0);
}

// ---------------------------------------------------------------------------
// WeightedSpace

WeightedSpace::WeightedSpace(ModelSpace space, Weight psi)
    : space_(space), psi_(std::move(psi)) {}

WeightedSpace::WeightedSpace(ModelSpace space, Weight psi, Region domain)
    : space_(space), psi_(std::move(psi)), domain_(std::make_shared<const Region>(std::move(domain))) {
  if (!(domain_->space() == space_)) throw DomainError("domain region lives in a different space");
}

const Region* WeightedSpace::domain() const { return domain_.get(); }

bool WeightedSpace::in_domain(const Point& p) const { return !domain_ || domain_->contains(p); }

double WeightedSpace::density(const Point& p) const {
  if (!in_domain(p)) return 0.0;
  return psi_.density(p);
}

double WeightedSpace::derivative_consistency(const Point& p, const Vec& v, double h) const {
  const Vec vt = space_.project_tangent(p, v);
  const double f0 = psi_.value(p);
  const double fp = psi_.value(space_.exp(p, h * vt));
  const double fm = psi_.value(space_.exp(p, -h * vt));
  const double d1 = (fp - fm) / (2.0 * h);
  const double d2 = (fp - 2.0 * f0 + fm) / (h * h);
  return std::max(std::abs(d1 - psi_.directional(p, vt)),
                  std::abs(d2 - psi_.second_directional(p, vt)));
}

double n_ricci_along(const WeightedSpace& ws, const CurvatureDimension& cd, const Point& x0,
                     const Point& x1, double t) {
  const ModelSpace& space = ws.space();
  const double n = space.dim();
  if (cd.N < n) throw DomainError("n_ricci_along: N must be >= n");
  if (cd.N == n && !ws.psi().is_constant()) {
    throw DomainError("n_ricci_along: N = n requires a constant weight");
  }
  const Point g = intermediate_point(space, x0, x1, t);
  const Vec v = geodesic_velocity(space, x0, x1, t);
  const double speed2 = space.inner(v, v);
  double ric = (n - 1.0) * space.sec() * speed2 + ws.psi().second_directional(g, v);
  if (cd.N > n) {
    const double d = ws.psi().directional(g, v);
    ric -= d * d / (cd.N - n);
  }
  return ric;
}

}  // namespace bbl
