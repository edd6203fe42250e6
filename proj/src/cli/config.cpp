#include "bbl/cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "bbl/errors.hpp"

namespace bbl::cli {

namespace {

// Object view that remembers which keys were read so that leftovers can be
// reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double num(const std::string& key, double def) { return has(key) ? to_num(at(key), where(key)) : def; }

  long integer(const std::string& key, long def) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    return v.get<long>();
  }

  std::uint64_t uinteger(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(where(key) + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string str(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) {
      std::ostringstream os;
      os.precision(17);
      os << v.get<double>();
      return os.str();
    }
    throw ConfigError(where(key) + ": expected a string");
  }

  std::vector<double> nums(const std::string& key, const std::vector<double>& def) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_num(v[i], where(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) throw ConfigError("unknown config key '" + where(it.key()) + "'");
    }
  }

  static double to_num(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw ConfigError(where + ": expected a number (or \"inf\"/\"-inf\")");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json num_out(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return v;
}

json nums_out(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num_out(x));
  return a;
}

WeightConfig parse_weight(const json& j, const std::string& path) {
  Reader r(j, path);
  WeightConfig w;
  w.name = r.str("name", "zero");
  if (w.name == "constant" || w.name == "quadratic") {
    w.c = r.num("c", 0.0);
  } else if (w.name == "linear") {
    w.a = r.nums("a", {});
    w.b = r.num("b", 0.0);
  } else if (w.name == "power_norm") {
    w.alpha = r.num("alpha", 0.0);
  } else if (w.name != "zero") {
    throw ConfigError(path + ".name: unknown weight '" + w.name + "'");
  }
  r.finish();
  return w;
}

json weight_out(const WeightConfig& w) {
  json j{{"name", w.name}};
  if (w.name == "constant" || w.name == "quadratic") j["c"] = num_out(w.c);
  if (w.name == "linear") {
    j["a"] = nums_out(w.a);
    j["b"] = num_out(w.b);
  }
  if (w.name == "power_norm") j["alpha"] = num_out(w.alpha);
  return j;
}

RegionConfig parse_region(const json& j, const std::string& path) {
  Reader r(j, path);
  RegionConfig g;
  g.type = r.str("type", "ball");
  if (g.type == "ball") {
    g.center = r.nums("center", {});
    g.radius = r.num("radius", 0.0);
  } else if (g.type == "box") {
    g.lo = r.nums("lo", {});
    g.hi = r.nums("hi", {});
  } else if (g.type == "interval") {
    g.lo = {r.num("lo", 0.0)};
    g.hi = {r.num("hi", 1.0)};
  } else {
    throw ConfigError(path + ".type: unknown region type '" + g.type + "'");
  }
  r.finish();
  return g;
}

json region_out(const RegionConfig& g) {
  json j{{"type", g.type}};
  if (g.type == "ball") {
    j["center"] = nums_out(g.center);
    j["radius"] = num_out(g.radius);
  } else if (g.type == "box") {
    j["lo"] = nums_out(g.lo);
    j["hi"] = nums_out(g.hi);
  } else {
    j["lo"] = num_out(g.lo.empty() ? 0.0 : g.lo[0]);
    j["hi"] = num_out(g.hi.empty() ? 1.0 : g.hi[0]);
  }
  return j;
}

DensityConfig parse_density(const json& j, const std::string& path) {
  Reader r(j, path);
  DensityConfig d;
  d.type = r.str("type", "uniform");
  if (d.type == "uniform" || d.type == "power") {
    d.lo = r.num("lo", 0.0);
    d.hi = r.num("hi", 1.0);
    if (d.type == "power") d.k = r.num("k", 0.0);
  } else if (d.type == "gaussian") {
    d.mu = r.num("mu", 0.0);
    d.sigma = r.num("sigma", 1.0);
    d.width = r.num("width", 12.0);
  } else {
    throw ConfigError(path + ".type: unknown density '" + d.type + "'");
  }
  r.finish();
  return d;
}

json density_out(const DensityConfig& d) {
  json j{{"type", d.type}};
  if (d.type == "gaussian") {
    j["mu"] = num_out(d.mu);
    j["sigma"] = num_out(d.sigma);
    j["width"] = num_out(d.width);
  } else {
    j["lo"] = num_out(d.lo);
    j["hi"] = num_out(d.hi);
    if (d.type == "power") j["k"] = num_out(d.k);
  }
  return j;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  Reader top(j, "");
  ExperimentConfig c;
  if (top.has("instance")) c.instance = top.str("instance", "");
  if (top.has("space")) {
    Reader r(top.at("space"), "space");
    SpaceConfig s;
    s.kind = r.str("kind", "euclidean");
    s.n = static_cast<int>(r.integer("n", 2));
    if (r.has("sec")) s.sec = r.num("sec", 0.0);
    if (r.has("weight")) s.weight = parse_weight(r.at("weight"), "space.weight");
    if (r.has("domain")) s.domain = parse_region(r.at("domain"), "space.domain");
    r.finish();
    c.space = s;
  }
  if (top.has("cd")) {
    Reader r(top.at("cd"), "cd");
    c.cd = CDConfig{r.num("K", 0.0), r.num("N", 2.0)};
    r.finish();
  }
  if (top.has("regions")) {
    Reader r(top.at("regions"), "regions");
    if (r.has("A")) c.A = parse_region(r.at("A"), "regions.A");
    if (r.has("B")) c.B = parse_region(r.at("B"), "regions.B");
    r.finish();
  }
  if (top.has("homothety")) {
    Reader r(top.at("homothety"), "homothety");
    c.homothety = HomothetyConfig{r.nums("center", {}), r.num("ratio", 1.0)};
    r.finish();
  }
  if (top.has("t")) c.t = top.num("t", 0.5);
  c.t_grid = top.nums("t_grid", {});
  c.p = top.str("p", "inf");
  if (top.has("sampling")) {
    Reader r(top.at("sampling"), "sampling");
    SamplingConfig s;
    s.n_samples = r.integer("n_samples", s.n_samples);
    s.z_trials = static_cast<int>(r.integer("z_trials", s.z_trials));
    s.seed = r.uinteger("seed", s.seed);
    s.ray_samples = static_cast<int>(r.integer("ray_samples", s.ray_samples));
    s.hypothesis_pairs = r.integer("hypothesis_pairs", s.hypothesis_pairs);
    r.finish();
    c.sampling = s;
  }
  if (top.has("tolerances")) {
    Reader r(top.at("tolerances"), "tolerances");
    ToleranceConfig t;
    t.equality_rel = r.num("equality_rel", t.equality_rel);
    t.inconclusive_rel = r.num("inconclusive_rel", t.inconclusive_rel);
    t.sec = r.num("sec", t.sec);
    t.fit = r.num("fit", t.fit);
    t.margin = r.num("margin", t.margin);
    r.finish();
    c.tolerances = t;
  }
  if (top.has("transport")) {
    Reader r(top.at("transport"), "transport");
    TransportConfig t;
    if (r.has("rho0")) t.rho0 = parse_density(r.at("rho0"), "transport.rho0");
    if (r.has("rho1")) t.rho1 = parse_density(r.at("rho1"), "transport.rho1");
    t.grid = static_cast<int>(r.integer("grid", t.grid));
    t.residual_grid = static_cast<int>(r.integer("residual_grid", t.residual_grid));
    t.x_samples = static_cast<int>(r.integer("x_samples", t.x_samples));
    r.finish();
    c.transport = t;
  }
  if (top.has("jacobi")) {
    Reader r(top.at("jacobi"), "jacobi");
    JacobiConfig jc;
    jc.n = static_cast<int>(r.integer("n", jc.n));
    jc.r = r.num("r", jc.r);
    jc.sec = r.num("sec", jc.sec);
    if (r.has("hess_psi0")) {
      const json& h = r.at("hess_psi0");
      if (!h.is_array()) throw ConfigError("jacobi.hess_psi0: expected an array of rows");
      for (std::size_t i = 0; i < h.size(); ++i) {
        if (!h[i].is_array()) throw ConfigError("jacobi.hess_psi0: expected an array of rows");
        std::vector<double> row;
        for (std::size_t k = 0; k < h[i].size(); ++k) row.push_back(Reader::to_num(h[i][k], "jacobi.hess_psi0"));
        jc.hess_psi0.push_back(row);
      }
    }
    jc.psi_poly = r.nums("psi_poly", {});
    jc.grid = static_cast<int>(r.integer("grid", jc.grid));
    r.finish();
    c.jacobi = jc;
  }
  if (top.has("pmean")) {
    Reader r(top.at("pmean"), "pmean");
    PMeanConfig p;
    p.p = r.str("p", p.p);
    p.t = r.num("t", p.t);
    p.a = r.num("a", p.a);
    p.b = r.num("b", p.b);
    r.finish();
    c.pmean = p;
  }
  if (top.has("distortion")) {
    Reader r(top.at("distortion"), "distortion");
    DistortionConfig d;
    d.t = r.nums("t", d.t);
    d.r = r.nums("r", d.r);
    r.finish();
    c.distortion = d;
  }
  if (top.has("halfspace")) {
    Reader r(top.at("halfspace"), "halfspace");
    HalfspaceConfig h;
    h.N = r.num("N", h.N);
    h.n = static_cast<int>(r.integer("n", h.n));
    h.r = r.num("r", h.r);
    r.finish();
    c.halfspace = h;
  }
  if (top.has("output")) {
    Reader r(top.at("output"), "output");
    c.output = OutputConfig{r.str("report", ""), r.str("csv", "")};
    r.finish();
  }
  top.finish();
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const ExperimentConfig& c) {
  json j = json::object();
  if (c.instance) j["instance"] = *c.instance;
  if (c.space) {
    json s{{"kind", c.space->kind}, {"n", c.space->n}, {"weight", weight_out(c.space->weight)}};
    if (c.space->sec) s["sec"] = num_out(*c.space->sec);
    if (c.space->domain) s["domain"] = region_out(*c.space->domain);
    j["space"] = s;
  }
  if (c.cd) j["cd"] = {{"K", num_out(c.cd->K)}, {"N", num_out(c.cd->N)}};
  if (c.A || c.B) {
    json r = json::object();
    if (c.A) r["A"] = region_out(*c.A);
    if (c.B) r["B"] = region_out(*c.B);
    j["regions"] = r;
  }
  if (c.homothety) j["homothety"] = {{"center", nums_out(c.homothety->center)}, {"ratio", num_out(c.homothety->ratio)}};
  if (c.t) j["t"] = num_out(*c.t);
  j["t_grid"] = nums_out(c.t_grid);
  j["p"] = c.p;
  j["sampling"] = {{"n_samples", c.sampling.n_samples},
                   {"z_trials", c.sampling.z_trials},
                   {"seed", c.sampling.seed},
                   {"ray_samples", c.sampling.ray_samples},
                   {"hypothesis_pairs", c.sampling.hypothesis_pairs}};
  j["tolerances"] = {{"equality_rel", num_out(c.tolerances.equality_rel)},
                     {"inconclusive_rel", num_out(c.tolerances.inconclusive_rel)},
                     {"sec", num_out(c.tolerances.sec)},
                     {"fit", num_out(c.tolerances.fit)},
                     {"margin", num_out(c.tolerances.margin)}};
  if (c.transport) {
    j["transport"] = {{"rho0", density_out(c.transport->rho0)},
                      {"rho1", density_out(c.transport->rho1)},
                      {"grid", c.transport->grid},
                      {"residual_grid", c.transport->residual_grid},
                      {"x_samples", c.transport->x_samples}};
  }
  if (c.jacobi) {
    json h = json::array();
    for (const auto& row : c.jacobi->hess_psi0) h.push_back(nums_out(row));
    j["jacobi"] = {{"n", c.jacobi->n},          {"r", num_out(c.jacobi->r)},
                   {"sec", num_out(c.jacobi->sec)}, {"hess_psi0", h},
                   {"psi_poly", nums_out(c.jacobi->psi_poly)}, {"grid", c.jacobi->grid}};
  }
  if (c.pmean) {
    j["pmean"] = {{"p", c.pmean->p}, {"t", num_out(c.pmean->t)}, {"a", num_out(c.pmean->a)}, {"b", num_out(c.pmean->b)}};
  }
  if (c.distortion) j["distortion"] = {{"t", nums_out(c.distortion->t)}, {"r", nums_out(c.distortion->r)}};
  if (c.halfspace) j["halfspace"] = {{"N", num_out(c.halfspace->N)}, {"n", c.halfspace->n}, {"r", num_out(c.halfspace->r)}};
  j["output"] = {{"report", c.output.report}, {"csv", c.output.csv}};
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  ExperimentConfig canonical = cfg;
  canonical.output = OutputConfig{};
  const std::string text = to_json(canonical).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bbl::cli
