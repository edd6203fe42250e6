#include "bbl/transport.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "bbl/errors.hpp"

namespace bbl {

namespace {

using Gauss20 = boost::math::quadrature::gauss<double, 20>;

double psi_at(const WeightedSpace& ws, double x) { return ws.psi().value(make_point({x})); }

void require_line(const WeightedSpace& ws) {
  if (ws.space().kind() != SpaceKind::Euclidean || ws.space().dim() != 1) {
    throw DomainError("1-D transport requires the weighted Euclidean line");
  }
}

// Cumulative mass of rho exp(-psi) on a uniform node grid, with exact
// sub-cell integrals and both left and right tails so that quantiles near
// either end keep their relative precision.
class CdfTable {
 public:
  CdfTable(const WeightedSpace& ws, const Density1D& rho, int cells)
      : ws_(ws), rho_(rho), lo_(rho.lo()), hi_(rho.hi()), cells_(cells) {
    h_ = (hi_ - lo_) / cells_;
    left_.assign(static_cast<std::size_t>(cells_) + 1, 0.0);
    std::vector<double> cell(static_cast<std::size_t>(cells_));
    for (int i = 0; i < cells_; ++i) cell[static_cast<std::size_t>(i)] = integral(node(i), node(i + 1));
    for (int i = 0; i < cells_; ++i) left_[static_cast<std::size_t>(i) + 1] = left_[static_cast<std::size_t>(i)] + cell[static_cast<std::size_t>(i)];
    right_.assign(static_cast<std::size_t>(cells_) + 1, 0.0);
    for (int i = cells_ - 1; i >= 0; --i) right_[static_cast<std::size_t>(i)] = right_[static_cast<std::size_t>(i) + 1] + cell[static_cast<std::size_t>(i)];
  }

  double total() const { return left_.back(); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double mass_density(double x) const {
    const double r = rho_(x);
    return r == 0.0 ? 0.0 : r * std::exp(-psi_at(ws_, x));
  }

  double left(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return total();
    const int j = cell_of(x);
    return left_[static_cast<std::size_t>(j)] + integral(node(j), x);
  }

  double right(double x) const {
    if (x <= lo_) return total();
    if (x >= hi_) return 0.0;
    const int j = cell_of(x);
    return right_[static_cast<std::size_t>(j) + 1] + integral(x, node(j + 1));
  }

  // y with left(y) = c.
  double inverse_left(double c) const {
    if (c <= 0.0) return lo_;
    if (c >= total()) return hi_;
    // first j with left_[j+1] > c
    const auto it = std::upper_bound(left_.begin(), left_.end(), c);
    const int j = std::clamp(static_cast<int>(it - left_.begin()) - 1, 0, cells_ - 1);
    const double guess = pchip_guess(left_, j, c);
    const double base = left_[static_cast<std::size_t>(j)];
    return polish(j, guess, [&](double y) { return base + integral(node(j), y) - c; }, +1.0);
  }

  // y with right(y) = s.
  double inverse_right(double s) const {
    if (s <= 0.0) return hi_;
    if (s >= total()) return lo_;
    // right_ is nonincreasing; first j with right_[j+1] < s
    int a = 0, b = cells_;
    while (b - a > 1) {
      const int mid = (a + b) / 2;
      if (right_[static_cast<std::size_t>(mid)] >= s) {
        a = mid;
      } else {
        b = mid;
      }
    }
    const int j = a;
    const double guess = pchip_guess(right_, j, s);
    const double base = right_[static_cast<std::size_t>(j) + 1];
    return polish(j, guess, [&](double y) { return base + integral(y, node(j + 1)) - s; }, -1.0);
  }

 private:
  double node(int i) const { return i == cells_ ? hi_ : lo_ + h_ * i; }

  int cell_of(double x) const {
    const int j = static_cast<int>(std::floor((x - lo_) / h_));
    return std::clamp(j, 0, cells_ - 1);
  }

  double integral(double a, double b) const {
    if (b <= a) return 0.0;
    return Gauss20::integrate([this](double x) { return mass_density(x); }, a, b);
  }

  // Monotone cubic Hermite (Fritsch-Carlson) estimate of the node
  // coordinate as a function of the cumulative value, restricted to cell j.
  double pchip_guess(const std::vector<double>& cum, int j, double c) const {
    const double c0 = cum[static_cast<std::size_t>(j)];
    const double c1 = cum[static_cast<std::size_t>(j) + 1];
    const double x0 = node(j), x1 = node(j + 1);
    const double dc = c1 - c0;
    if (dc == 0.0) return 0.5 * (x0 + x1);
    auto secant = [&](int k) -> double {
      if (k < 0 || k >= cells_) return std::numeric_limits<double>::quiet_NaN();
      const double d = cum[static_cast<std::size_t>(k) + 1] - cum[static_cast<std::size_t>(k)];
      return d == 0.0 ? std::numeric_limits<double>::quiet_NaN() : (node(k + 1) - node(k)) / d;
    };
    const double s_mid = (x1 - x0) / dc;
    auto slope = [&](double s_side) {
      if (!std::isfinite(s_side) || s_side * s_mid <= 0.0) return 0.0;
      return 2.0 * s_side * s_mid / (s_side + s_mid);
    };
    const double m0 = slope(secant(j - 1));
    const double m1 = slope(secant(j + 1));
    const double u = (c - c0) / dc;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    const double guess = h00 * x0 + h10 * dc * m0 + h01 * x1 + h11 * dc * m1;
    return std::clamp(guess, std::min(x0, x1), std::max(x0, x1));
  }

  // Safeguarded Newton on cell j; g is increasing for sign = +1 and
  // decreasing for sign = -1, with |g'| = mass_density.
  template <class G>
  double polish(int j, double y, const G& g, double sign) const {
    double a = node(j), b = node(j + 1);
    for (int it = 0; it < 100; ++it) {
      const double gy = g(y);
      if (gy == 0.0) return y;
      if (sign * gy > 0.0) {
        b = y;
      } else {
        a = y;
      }
      const double d = sign * mass_density(y);
      double next = (d != 0.0) ? y - gy / d : 0.5 * (a + b);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(y));
      if (std::abs(next - y) <= tol || b - a <= tol) return next;
      y = next;
    }
    return y;
  }

  WeightedSpace ws_;
  Density1D rho_;
  double lo_, hi_, h_;
  int cells_;
  std::vector<double> left_, right_;
};

}  // namespace

double mass_1d(const WeightedSpace& ws, const Density1D::Fn& rho, double lo, double hi, int panels) {
  require_line(ws);
  if (lo == hi) return 0.0;
  if (!(lo < hi)) throw DomainError("mass_1d: reversed interval");
  const double h = (hi - lo) / panels;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = lo + h * i;
    const double b = i + 1 == panels ? hi : lo + h * (i + 1);
    sum += Gauss20::integrate(
        [&](double x) {
          const double r = rho(x);
          return r == 0.0 ? 0.0 : r * std::exp(-psi_at(ws, x));
        },
        a, b);
  }
  return sum;
}

Density1D Density1D::from_function(const WeightedSpace& ws, double lo, double hi, Fn rho) {
  require_line(ws);
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("density support must be a finite interval");
  const double mass = mass_1d(ws, rho, lo, hi);
  return Density1D(lo, hi, std::move(rho), mass);
}

Density1D Density1D::uniform(const WeightedSpace& ws, double lo, double hi) {
  require_line(ws);
  if (!(lo < hi)) throw DomainError("uniform density needs lo < hi");
  const double m = mass_1d(ws, [](double) { return 1.0; }, lo, hi);
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("uniform density: interval has no finite positive mass");
  return from_function(ws, lo, hi, [c = 1.0 / m](double) { return c; });
}

Density1D Density1D::power(const WeightedSpace& ws, double lo, double hi, double k) {
  require_line(ws);
  if (!(lo > 0.0) || !(lo < hi)) throw DomainError("power density needs 0 < lo < hi");
  const double z = mass_1d(ws, [k](double x) { return std::pow(x, k); }, lo, hi);
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("power density: not normalisable");
  return from_function(ws, lo, hi, [k, z](double x) { return std::pow(x, k) / z; });
}

Density1D Density1D::gaussian(const WeightedSpace& ws, double mu, double sigma, double width) {
  require_line(ws);
  if (!(sigma > 0.0) || !(width > 0.0)) throw DomainError("gaussian density needs sigma > 0 and width > 0");
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  auto rho = [ws, mu, sigma, norm](double x) {
    const double z = (x - mu) / sigma;
    return norm * std::exp(-0.5 * z * z + psi_at(ws, x));
  };
  return from_function(ws, mu - width * sigma, mu + width * sigma, rho);
}

TransportMap1D TransportMap1D::identity(double lo, double hi) {
  return TransportMap1D(lo, hi, [](double x) { return x; }, [](double) { return 1.0; });
}

TransportMap1D TransportMap1D::homothety(double lo, double hi, double center, double ratio) {
  if (!(ratio > 0.0)) throw DomainError("homothety ratio must be > 0");
  return TransportMap1D(
      lo, hi, [center, ratio](double x) { return center + ratio * (x - center); },
      [ratio](double) { return ratio; });
}

TransportMap1D TransportMap1D::translation(double lo, double hi, double shift) {
  return TransportMap1D(lo, hi, [shift](double x) { return x + shift; }, [](double) { return 1.0; });
}

TransportMap1D optimal_map_1d(const WeightedSpace& ws, const Density1D& rho0, const Density1D& rho1, int grid) {
  require_line(ws);
  if (grid < 2) throw DomainError("optimal_map_1d: grid must be >= 2");
  if (std::abs(rho0.total_mass() - rho1.total_mass()) > 1e-6) {
    throw MassMismatchError("optimal_map_1d: total masses differ by more than 1e-6");
  }
  auto src = std::make_shared<const CdfTable>(ws, rho0, grid);
  auto dst = std::make_shared<const CdfTable>(ws, rho1, grid);
  if (!(src->total() > 0.0) || !(dst->total() > 0.0)) throw DomainError("optimal_map_1d: zero mass");
  const double scale = dst->total() / src->total();

  auto map = [src, dst, scale](double x) {
    if (x <= src->lo()) return dst->lo();
    if (x >= src->hi()) return dst->hi();
    const double c = src->left(x);
    if (c <= 0.5 * src->total()) return dst->inverse_left(c * scale);
    return dst->inverse_right(src->right(x) * scale);
  };
  auto derivative = [src, dst, scale, map](double x) {
    const double num = src->mass_density(x) * scale;
    const double den = dst->mass_density(map(x));
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
  };
  return TransportMap1D(rho0.lo(), rho0.hi(), map, derivative);
}

double interpolate(const TransportMap1D& T, double x, double t) {
  if (t == 0.0) return x;
  if (t == 1.0) return T(x);
  return (1.0 - t) * x + t * T(x);
}

double weighted_jacobian_1d(const WeightedSpace& ws, const TransportMap1D& T, double x, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("weighted_jacobian_1d: t must lie in [0,1]");
  if (t == 0.0) return 1.0;
  const double jac = (1.0 - t) + t * T.derivative(x);
  if (!(jac > 0.0) || !std::isfinite(jac)) throw DegenerateMapError("weighted_jacobian_1d: (1-t) + t T'(x) <= 0");
  const double ft = interpolate(T, x, t);
  return std::exp(psi_at(ws, x) - psi_at(ws, ft)) * jac;
}

Density1D pushforward_density(const WeightedSpace& ws, const Density1D& rho0, const TransportMap1D& T, double t) {
  require_line(ws);
  const double lo = interpolate(T, rho0.lo(), t);
  const double hi = interpolate(T, rho0.hi(), t);
  auto inverse = [T, t, a0 = rho0.lo(), b0 = rho0.hi()](double z) {
    double a = a0, b = b0;
    double x = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
      const double fx = interpolate(T, x, t) - z;
      if (fx == 0.0) return x;
      if (fx > 0.0) {
        b = x;
      } else {
        a = x;
      }
      const double d = (1.0 - t) + t * T.derivative(x);
      double next = (d > 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (a + b);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return next;
      x = next;
    }
    return x;
  };
  auto rho_t = [ws, rho0, T, t, inverse](double z) {
    const double x = inverse(z);
    const double r0 = rho0(x);
    if (r0 == 0.0) return 0.0;
    return r0 / weighted_jacobian_1d(ws, T, x, t);
  };
  return Density1D::from_function(ws, lo, hi, rho_t);
}

double monge_ampere_residual(const WeightedSpace& ws, const Density1D& rho0, const Density1D& rho_t,
                             const TransportMap1D& T, double t, int grid) {
  if (grid < 1) throw DomainError("monge_ampere_residual: grid must be >= 1");
  const double h = (rho0.hi() - rho0.lo()) / grid;
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double x = rho0.lo() + (i + 0.5) * h;
    const double lhs = rho0(x);
    const double rhs = rho_t(interpolate(T, x, t)) * weighted_jacobian_1d(ws, T, x, t);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

TransportRay ray_1d(const WeightedSpace& ws, const TransportMap1D& T, double x) {
  require_line(ws);
  TransportRay ray;
  const double y = T(x);
  ray.x0 = make_point({x});
  ray.x1 = make_point({y});
  ray.r = std::abs(y - x);
  ray.interpolant = [T, x](double t) { return make_point({interpolate(T, x, t)}); };
  ray.jacobian = [ws, T, x](double t) { return weighted_jacobian_1d(ws, T, x, t); };
  return ray;
}

TransportRay homothety_ray(const WeightedSpace& ws, const Point& center, double ratio, const Point& x0) {
  if (ws.space().kind() != SpaceKind::Euclidean) throw DomainError("homothety rays need Euclidean space");
  if (!(ratio > 0.0)) throw DomainError("homothety ratio must be > 0");
  const int n = ws.space().dim();
  TransportRay ray;
  ray.x0 = x0;
  ray.x1 = Point{center.coords + ratio * (x0.coords - center.coords)};
  ray.r = (ray.x1.coords - x0.coords).norm();
  auto at = [center, ratio, x0](double t) {
    return Point{center.coords + (1.0 + t * (ratio - 1.0)) * (x0.coords - center.coords)};
  };
  ray.interpolant = at;
  ray.jacobian = [ws, at, ratio, x0, n](double t) {
    if (t == 0.0) return 1.0;
    const double scale = 1.0 + t * (ratio - 1.0);
    return std::exp(ws.psi().value(x0) - ws.psi().value(at(t))) * std::pow(scale, n);
  };
  return ray;
}

double concavity_margin(const WeightedSpace& ws, const CurvatureDimension& cd, const TransportRay& ray, double t) {
  (void)ws;
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("concavity_margin: t must lie in [0,1]");
  const double inv_n = 1.0 / cd.N;
  const double jt = std::pow(ray.jacobian(t), inv_n);
  const double j1 = std::pow(ray.jacobian(1.0), inv_n);
  double rhs = 0.0;
  if (t < 1.0) rhs += (1.0 - t) * std::pow(beta(cd, 1.0 - t, ray.r), inv_n);
  if (t > 0.0) rhs += t * std::pow(beta(cd, t, ray.r), inv_n) * j1;
  return jt - rhs;
}

double n_ricci_along(const WeightedSpace& ws, const CurvatureDimension& cd, const TransportRay& ray, double t) {
  return n_ricci_along(ws, cd, ray.x0, ray.x1, t);
}

}  // namespace bbl
