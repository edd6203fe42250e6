#pragma once

#include <string>

#include "bbl/model_spaces.hpp"
#include "bbl/random.hpp"

namespace bbl {

// Measurable set used as A, B or a sampling domain. Balls live in any model
// space; boxes in Euclidean space (bounds may be infinite, which is how a
// half-space domain is written); intervals on the Euclidean line.
class Region {
 public:
  enum class Shape { Ball, Box, Interval };

  static Region ball(const ModelSpace& space, const Point& center, double radius);
  static Region box(const ModelSpace& space, const Vec& lo, const Vec& hi);
  static Region interval(const ModelSpace& space, double lo, double hi);

  Shape shape() const { return shape_; }
  const ModelSpace& space() const { return space_; }
  bool bounded() const;

  bool contains(const Point& p) const { return excess(p) <= 0.0; }
  // Signed slack: <= 0 exactly on the region. For balls, d(center,p) - radius.
  double excess(const Point& p) const;

  // Riemannian volume.
  double volume() const;
  // Uniform sample with respect to Riemannian volume.
  Point sample(Rng& rng) const;

  // Centre and a radius of a ball containing the region.
  Point center() const;
  double circumradius() const;

  // Parametrisation for searches over the region. Parameters u live in a
  // ball (radius) or box of R^n; from_param is onto the region.
  int param_dim() const { return space_.dim(); }
  Point from_param(const Vec& u) const;
  Vec clamp_param(const Vec& u) const;
  double param_scale() const;
  // Map a point of [0,1)^n into the parameter domain; false if rejected.
  bool param_from_unit_cube(const Vec& cube, Vec& u) const;

  // Ball data (valid for Shape::Ball).
  const Point& ball_center() const { return center_; }
  double ball_radius() const { return radius_; }
  // Box / interval bounds (valid for Shape::Box and Shape::Interval).
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }

  std::string describe() const;

 private:
  explicit Region(const ModelSpace& space) : space_(space) {}

  ModelSpace space_;
  Shape shape_ = Shape::Ball;
  Point center_;
  double radius_ = 0.0;
  std::vector<Vec> frame_;
  Vec lo_, hi_;
};

}  // namespace bbl
