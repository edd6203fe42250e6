#pragma once

#include <cstdint>
#include <functional>

#include "bbl/model_spaces.hpp"
#include "bbl/region.hpp"

namespace bbl {

struct Estimate {
  double value = 0.0;
  double std_err = 0.0;
};

// Integrand of a Monte Carlo estimate. `key` is a per-sample counter-derived
// value that integrands needing their own randomness may use as a seed.
using SampleIntegrand = std::function<double(const Point& p, std::uint64_t key)>;
using Indicator = std::function<bool(const Point& p)>;

// Worker cap for Monte Carlo sharding; 0 means hardware concurrency. The
// environment variable BBL_THREADS sets the initial value.
void set_default_threads(unsigned threads);
unsigned default_threads();

// Unbiased estimate of int g exp(-psi) dvol over `bounding` (restricted to
// the domain of ws). Deterministic for a given (seed, n_samples) whatever the
// worker count: samples are grouped in fixed blocks with their own seeds.
Estimate integrate(const WeightedSpace& ws, const SampleIntegrand& g, const Region& bounding,
                   long n_samples, std::uint64_t seed, unsigned threads = 0);

// m(indicator) = int 1_indicator dm. Requires n_samples >= 1000.
Estimate measure(const WeightedSpace& ws, const Indicator& indicator, const Region& bounding,
                 long n_samples, std::uint64_t seed, unsigned threads = 0);

// Deterministic int_lo^hi exp(-psi(x)) dx on the weighted line.
double measure_interval_quadrature(const WeightedSpace& ws, double lo, double hi);

// One-sided membership test for Z_t(A,B): true only when a witness x in A
// with extend(x, z, 1/t) in B was found. The search evaluates low-discrepancy
// candidates, refines the best one by projected descent on B's excess, and
// restarts from seeded uniform points for near misses; `trials` caps the
// total number of candidate evaluations.
bool z_membership(const ModelSpace& space, const Region& A, const Region& B, double t,
                  const Point& z, int trials = 4096, std::uint64_t seed = 0);

}  // namespace bbl
