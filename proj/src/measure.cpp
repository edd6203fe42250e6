#include "bbl/measure.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>
#include <vector>

#include "bbl/errors.hpp"

namespace bbl {

namespace {

constexpr long kBlockSize = 4096;

unsigned initial_threads() {
  if (const char* env = std::getenv("BBL_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 0;
}

std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> value{initial_threads()};
  return value;
}

// Running mean / M2 of one block, merged in block order (Chan et al.).
struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.count == 0.0) return;
    const double total = count + o.count;
    const double d = o.mean - mean;
    mean += d * o.count / total;
    m2 += o.m2 + d * d * count * o.count / total;
    count = total;
  }
};

}  // namespace

void set_default_threads(unsigned threads) { thread_setting().store(threads); }

unsigned default_threads() { return thread_setting().load(); }

Estimate integrate(const WeightedSpace& ws, const SampleIntegrand& g, const Region& bounding,
                   long n_samples, std::uint64_t seed, unsigned threads) {
  if (n_samples < 2) throw DomainError("integrate: need at least 2 samples");
  if (!(bounding.space() == ws.space())) throw DomainError("integrate: bounding region lives in another space");
  const double volume = bounding.volume();
  if (!(volume > 0.0) || !std::isfinite(volume)) {
    throw DomainError("integrate: bounding region must have finite positive volume");
  }
  const long n_blocks = (n_samples + kBlockSize - 1) / kBlockSize;
  std::vector<Moments> blocks(static_cast<std::size_t>(n_blocks));

  auto run_block = [&](long b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    const long begin = b * kBlockSize;
    const long end = std::min(n_samples, begin + kBlockSize);
    Moments m;
    for (long i = begin; i < end; ++i) {
      const Point p = bounding.sample(rng);
      double v = 0.0;
      if (ws.in_domain(p)) {
        const double w = ws.psi().density(p);
        if (w != 0.0) {
          const std::uint64_t key = derive_seed(~seed, static_cast<std::uint64_t>(i));
          v = g(p, key) * w;
        }
      }
      m.add(v);
    }
    blocks[static_cast<std::size_t>(b)] = m;
  };

  unsigned workers = threads != 0 ? threads : default_threads();
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<long>(workers, n_blocks));
  if (workers <= 1) {
    for (long b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (long b = next++; b < n_blocks && !failed; b = next++) run_block(b);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  Moments total;
  for (const Moments& m : blocks) total.merge(m);
  const double n = total.count;
  const double var = n > 1.0 ? total.m2 / (n - 1.0) : 0.0;
  return Estimate{volume * total.mean, volume * std::sqrt(var / n)};
}

Estimate measure(const WeightedSpace& ws, const Indicator& indicator, const Region& bounding,
                 long n_samples, std::uint64_t seed, unsigned threads) {
  if (n_samples < 1000) throw DomainError("measure: need at least 1000 samples");
  return integrate(
      ws, [&](const Point& p, std::uint64_t) { return indicator(p) ? 1.0 : 0.0; }, bounding, n_samples,
      seed, threads);
}

double measure_interval_quadrature(const WeightedSpace& ws, double lo, double hi) {
  if (ws.space().kind() != SpaceKind::Euclidean || ws.space().dim() != 1) {
    throw DomainError("measure_interval_quadrature: requires the Euclidean line");
  }
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("measure_interval_quadrature: bad interval");
  }
  if (lo == hi) return 0.0;
  auto f = [&](double x) { return ws.density(make_point({x})); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-15);
}

namespace {

class WitnessSearch {
 public:
  WitnessSearch(const ModelSpace& space, const Region& A, const Region& B, double t, const Point& z,
                int budget)
      : space_(space), A_(A), B_(B), s_(1.0 / t), z_(z), budget_(budget) {}

  bool exhausted() const { return evals_ >= budget_; }

  double score(const Vec& u) {
    ++evals_;
    const Point x = A_.from_param(u);
    try {
      return B_.excess(extend(space_, x, z_, s_));
    } catch (const RangeError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const AmbiguityError&) {
      return std::numeric_limits<double>::infinity();
    }
  }

  // Projected descent along a forward-difference gradient with backtracking.
  // Returns the best excess found; u/f are updated in place.
  double refine(Vec& u, double f) {
    const double scale = A_.param_scale();
    const double h = 1e-7 * scale;
    const double min_step = 1e-11 * scale;
    double step = 0.5 * scale;
    const int n = static_cast<int>(u.size());
    while (!exhausted() && step > min_step && f > 0.0 && std::isfinite(f)) {
      Vec grad(n);
      for (int i = 0; i < n; ++i) {
        Vec up = u;
        up(i) += h;
        grad(i) = (score(up) - f) / h;
      }
      const double gn = grad.norm();
      if (!(gn > 0.0) || !std::isfinite(gn)) break;
      const Vec dir = -grad / gn;
      bool improved = false;
      while (!exhausted() && step > min_step) {
        const Vec trial = A_.clamp_param(u + step * dir);
        const double ft = score(trial);
        if (ft < f) {
          u = trial;
          f = ft;
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
      step *= 2.0;
    }
    return f;
  }

 private:
  const ModelSpace& space_;
  const Region& A_;
  const Region& B_;
  double s_;
  const Point& z_;
  int budget_;
  int evals_ = 0;
};

}  // namespace

bool z_membership(const ModelSpace& space, const Region& A, const Region& B, double t,
                  const Point& z, int trials, std::uint64_t seed) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("z_membership: t must lie in (0,1)");
  if (trials < 1) throw DomainError("z_membership: trials must be >= 1");
  if (!(A.space() == space) || !(B.space() == space)) throw DomainError("z_membership: regions live in another space");
  if (!A.bounded() || !B.bounded()) throw DomainError("z_membership: regions must be bounded");
  const int n = A.param_dim();
  WitnessSearch search(space, A, B, t, z, trials);

  Vec best_u;
  (void)A.param_from_unit_cube(Vec::Constant(n, 0.5), best_u);
  double best = search.score(best_u);
  if (best <= 0.0) return true;

  // Low-discrepancy candidates with a seeded Cranley-Patterson shift.
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec shift(n);
  for (int i = 0; i < n; ++i) shift(i) = unif(rng);
  const int ld_count = std::min(trials / 4, 64);
  Vec cube(n), u(n);
  for (int k = 1, accepted = 0; accepted < ld_count && k < 8 * ld_count + 8 && !search.exhausted(); ++k) {
    for (int i = 0; i < n; ++i) {
      const double c = halton(static_cast<std::uint64_t>(k), i) + shift(i);
      cube(i) = c - std::floor(c);
    }
    if (!A.param_from_unit_cube(cube, u)) continue;
    ++accepted;
    const double f = search.score(u);
    if (f <= 0.0) return true;
    if (f < best) {
      best = f;
      best_u = u;
    }
  }

  best = search.refine(best_u, best);
  if (best <= 0.0) return true;

  // Near misses get restarts from uniform points of the parameter domain.
  const double near = 0.05 * std::max(B.circumradius(), A.circumradius());
  for (int restart = 0; restart < 2 && best < near && !search.exhausted(); ++restart) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (int i = 0; i < n; ++i) cube(i) = unif(rng);
      if (A.param_from_unit_cube(cube, u)) break;
    }
    const double f0 = search.score(u);
    if (f0 <= 0.0) return true;
    const double f = search.refine(u, f0);
    if (f <= 0.0) return true;
    best = std::min(best, f);
  }
  return false;
}

}  // namespace bbl
