#pragma once

#include <cmath>
#include <random>

#include "bbl/model_spaces.hpp"

namespace bbl::test {

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random point of the model space within distance `spread` of the base point.
inline Point random_point(const ModelSpace& space, std::mt19937_64& rng, double spread) {
  const Point base = space.base_point();
  const auto frame = space.tangent_frame(base);
  Vec v = Vec::Zero(space.ambient_dim());
  for (const Vec& e : frame) v += uniform(rng, -1.0, 1.0) * e;
  const double len = v.norm();
  if (len == 0.0) return base;
  const double d = uniform(rng, 0.0, spread);
  return space.exp(base, (d / space.tangent_norm(v)) * v);
}

}  // namespace bbl::test
