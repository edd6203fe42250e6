#include "bbl/cli/catalog.hpp"

#include <cmath>
#include <limits>

#include "bbl/errors.hpp"

namespace bbl::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RegionConfig ball(std::vector<double> c, double r) { return RegionConfig{"ball", std::move(c), r, {}, {}}; }
RegionConfig interval(double lo, double hi) { return RegionConfig{"interval", {}, 0.0, {lo}, {hi}}; }

Vec to_vec(const std::vector<double>& v, const std::string& what) {
  if (v.empty() || static_cast<int>(v.size()) > kMaxAmbientDim) throw ConfigError(what + ": bad coordinate count");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"halfspace-example", "cone-halfline", "sphere-caps", "hyperbolic-balls", "euclid-homothety"};
}

ExperimentConfig halfspace_config(const HalfspaceConfig& h) {
  if (h.n < 1) throw ConfigError("halfspace: n must be >= 1");
  if (!(h.N >= h.n)) throw ConfigError("halfspace: requires N >= n");
  if (!(h.r > 0.0 && h.r < 1.0)) throw ConfigError("halfspace: r must lie in (0,1) so that A stays in the half-space");
  ExperimentConfig c;
  c.instance = "halfspace-example";
  SpaceConfig s;
  s.kind = "euclidean";
  s.n = h.n;
  s.weight = WeightConfig{"power_norm", 0.0, {}, 0.0, h.N - h.n};
  std::vector<double> lo(static_cast<std::size_t>(h.n), -kInf), hi(static_cast<std::size_t>(h.n), kInf);
  lo.back() = 0.0;
  s.domain = h.n == 1 ? interval(0.0, kInf) : RegionConfig{"box", {}, 0.0, lo, hi};
  c.space = s;
  c.cd = CDConfig{0.0, h.N};
  std::vector<double> ca(static_cast<std::size_t>(h.n), 0.0), cb(static_cast<std::size_t>(h.n), 0.0);
  ca.back() = 1.0;
  cb.back() = 2.0;
  c.A = ball(ca, h.r);
  c.B = ball(cb, 2.0 * h.r);
  c.homothety = HomothetyConfig{std::vector<double>(static_cast<std::size_t>(h.n), 0.0), 2.0};
  c.t = 0.5;
  c.t_grid = {0.25, 0.5, 0.75};
  c.halfspace = h;
  return c;
}

ExperimentConfig catalog_config(const std::string& name) {
  if (name == "halfspace-example") return halfspace_config(HalfspaceConfig{});
  ExperimentConfig c;
  c.instance = name;
  c.t = 0.5;
  c.t_grid = {0.25, 0.5, 0.75};
  if (name == "cone-halfline") {
    // m = x^{N-1} dx on (0, inf), N = 3.
    c.space = SpaceConfig{"euclidean", 1, std::nullopt, WeightConfig{"power_norm", 0.0, {}, 0.0, 2.0}, interval(0.0, kInf)};
    c.cd = CDConfig{0.0, 3.0};
    c.A = interval(0.0, 0.7);
    c.B = interval(0.0, 1.3);
    c.homothety = HomothetyConfig{{0.0}, 1.3 / 0.7};
  } else if (name == "sphere-caps") {
    c.space = SpaceConfig{"sphere", 2, 1.0, WeightConfig{}, std::nullopt};
    c.cd = CDConfig{1.0, 2.0};
    c.A = ball({0.0, 0.0, 1.0}, 0.3);
    c.B = ball({std::sin(1.2), 0.0, std::cos(1.2)}, 0.5);
  } else if (name == "hyperbolic-balls") {
    c.space = SpaceConfig{"hyperbolic", 2, -1.0, WeightConfig{}, std::nullopt};
    c.cd = CDConfig{-1.0, 2.0};
    c.A = ball({0.0, 0.0, 1.0}, 0.3);
    c.B = ball({std::sinh(1.0), 0.0, std::cosh(1.0)}, 0.4);
  } else if (name == "euclid-homothety") {
    c.space = SpaceConfig{"euclidean", 2, std::nullopt, WeightConfig{}, std::nullopt};
    c.cd = CDConfig{0.0, 2.0};
    c.A = ball({0.0, 0.0}, 0.5);
    c.B = ball({1.0, 0.0}, 1.0);
    c.homothety = HomothetyConfig{{-1.0, 0.0}, 2.0};
  } else {
    std::string known;
    for (const auto& n : catalog_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown instance '" + name + "' (known: " + known + ")");
  }
  return c;
}

ExperimentConfig resolve(const ExperimentConfig& user) {
  if (!user.instance) return user;
  ExperimentConfig c = catalog_config(*user.instance);
  if (user.halfspace && *user.instance == "halfspace-example") c = halfspace_config(*user.halfspace);
  if (user.space) c.space = user.space;
  if (user.cd) c.cd = user.cd;
  if (user.A) c.A = user.A;
  if (user.B) c.B = user.B;
  if (user.homothety) c.homothety = user.homothety;
  if (user.t) {
    c.t = user.t;
    c.t_grid.clear();
  }
  if (!user.t_grid.empty()) c.t_grid = user.t_grid;
  c.p = user.p;
  c.sampling = user.sampling;
  c.tolerances = user.tolerances;
  c.transport = user.transport;
  c.jacobi = user.jacobi;
  c.pmean = user.pmean;
  c.distortion = user.distortion;
  c.output = user.output;
  return c;
}

ModelSpace build_model_space(const SpaceConfig& s) {
  const SpaceKind kind = space_kind_from_string(s.kind);
  const double def = kind == SpaceKind::Sphere ? 1.0 : kind == SpaceKind::Hyperbolic ? -1.0 : 0.0;
  return ModelSpace::make(kind, s.n, s.sec.value_or(def));
}

WeightedSpace build_space(const SpaceConfig& s) {
  const ModelSpace space = build_model_space(s);
  const WeightConfig& w = s.weight;
  Weight psi = Weight::zero();
  if (w.name == "constant") {
    psi = Weight::constant(w.c);
  } else if (w.name == "linear") {
    if (static_cast<int>(w.a.size()) != space.ambient_dim()) throw ConfigError("space.weight.a: wrong dimension");
    psi = Weight::linear(to_vec(w.a, "space.weight.a"), w.b);
  } else if (w.name == "quadratic") {
    psi = Weight::quadratic(w.c);
  } else if (w.name == "power_norm") {
    psi = Weight::power_norm(w.alpha);
  } else if (w.name != "zero") {
    throw ConfigError("space.weight.name: unknown weight '" + w.name + "'");
  }
  if (s.domain) return WeightedSpace(space, psi, build_region(space, *s.domain, "space.domain"));
  return WeightedSpace(space, psi);
}

CurvatureDimension build_cd(const CDConfig& c) { return CurvatureDimension::make(c.K, c.N); }

Region build_region(const ModelSpace& space, const RegionConfig& r, const std::string& what) {
  if (r.type == "ball") {
    Point c = make_point(to_vec(r.center, what + ".center"));
    if (c.coords.size() != space.ambient_dim()) throw ConfigError(what + ".center: expected " + std::to_string(space.ambient_dim()) + " coordinates");
    // Decimal centres on a sphere or hyperboloid are snapped onto the model
    // when they are off by rounding only.
    if (space.kind() != SpaceKind::Euclidean) {
      const double target = space.kind() == SpaceKind::Sphere ? 1.0 / space.sec() : -1.0 / std::abs(space.sec());
      const double q = space.inner(c.coords, c.coords);
      if (std::abs(q - target) <= 1e-6 * std::abs(target) && (space.kind() == SpaceKind::Sphere || c.coords(space.dim()) > 0.0)) {
        c = space.project(c.coords);
      }
    }
    space.validate(c);
    return Region::ball(space, c, r.radius);
  }
  if (r.type == "box") return Region::box(space, to_vec(r.lo, what + ".lo"), to_vec(r.hi, what + ".hi"));
  if (r.type == "interval") {
    if (r.lo.size() != 1 || r.hi.size() != 1) throw ConfigError(what + ": interval needs scalar lo and hi");
    return Region::interval(space, r.lo[0], r.hi[0]);
  }
  throw ConfigError(what + ".type: unknown region type '" + r.type + "'");
}

BMInstance build_bm(const ExperimentConfig& cfg) {
  if (!cfg.space) throw ConfigError("missing 'space' block (or an 'instance' name)");
  if (!cfg.cd) throw ConfigError("missing 'cd' block");
  if (!cfg.A || !cfg.B) throw ConfigError("missing 'regions.A' / 'regions.B'");
  const WeightedSpace ws = build_space(*cfg.space);
  const ModelSpace& space = ws.space();
  BMInstance inst{cfg.instance.value_or("custom"),
                  ws,
                  build_cd(*cfg.cd),
                  build_region(space, *cfg.A, "regions.A"),
                  build_region(space, *cfg.B, "regions.B"),
                  cfg.t.value_or(0.5),
                  std::nullopt,
                  std::nullopt};
  if (cfg.homothety) {
    const Point c = make_point(to_vec(cfg.homothety->center, "homothety.center"));
    if (c.coords.size() != space.ambient_dim()) throw ConfigError("homothety.center: wrong dimension");
    if (!(cfg.homothety->ratio > 0.0)) throw ConfigError("homothety.ratio must be > 0");
    inst.homothety = Homothety{c, cfg.homothety->ratio};
  }
  return inst;
}

Density1D build_density(const WeightedSpace& ws, const DensityConfig& d) {
  if (d.type == "uniform") return Density1D::uniform(ws, d.lo, d.hi);
  if (d.type == "power") return Density1D::power(ws, d.lo, d.hi, d.k);
  if (d.type == "gaussian") return Density1D::gaussian(ws, d.mu, d.sigma, d.width);
  throw ConfigError("unknown density type '" + d.type + "'");
}

JacobiSystem build_jacobi(const JacobiConfig& j) {
  JacobiSystem sys;
  sys.n = j.n;
  sys.r = j.r;
  sys.sec = j.sec;
  if (j.n < 1 || j.n > 16) throw ConfigError("jacobi.n must lie in [1,16]");
  sys.hess_psi0 = Eigen::MatrixXd::Zero(j.n, j.n);
  if (!j.hess_psi0.empty()) {
    if (static_cast<int>(j.hess_psi0.size()) != j.n) throw ConfigError("jacobi.hess_psi0 must be n x n");
    for (int i = 0; i < j.n; ++i) {
      if (static_cast<int>(j.hess_psi0[static_cast<std::size_t>(i)].size()) != j.n) throw ConfigError("jacobi.hess_psi0 must be n x n");
      for (int k = 0; k < j.n; ++k) sys.hess_psi0(i, k) = j.hess_psi0[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
  }
  if (!j.psi_poly.empty()) {
    sys.psi_along = [c = j.psi_poly](double t) {
      double v = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
      return v;
    };
  }
  return sys;
}

VerifyOptions build_verify_options(const ExperimentConfig& cfg) {
  VerifyOptions o;
  o.equality_tol_rel = cfg.tolerances.equality_rel;
  o.inconclusive_rel = cfg.tolerances.inconclusive_rel;
  return o;
}

}  // namespace bbl::cli
