#include "bbl/cli/run.hpp"

#include <cmath>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "bbl/cli/catalog.hpp"
#include "bbl/cli/config.hpp"
#include "bbl/cli/report.hpp"
#include "bbl/errors.hpp"
#include "bbl/measure.hpp"

namespace bbl::cli {

namespace {

struct Options {
  std::string config;
  bool dry_run = false;
  bool no_timestamp = false;
  std::optional<unsigned> threads;
  std::string out, csv;
  std::optional<std::string> instance;
  std::optional<std::uint64_t> seed;
  std::optional<long> samples;
  std::optional<int> z_trials;
  std::optional<int> ray_samples;
  std::optional<long> hypothesis_pairs;
  std::vector<double> t;
  std::vector<double> r;
  std::optional<std::string> p;
  std::optional<double> a, b;
  std::optional<double> K, N;
  std::optional<int> n;
  std::optional<double> ray_r;
  std::optional<double> sec;
  std::optional<int> grid;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON experiment config");
  sub->add_flag("--dry-run", o.dry_run, "validate and print the resolved config without computing");
  sub->add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp from the report");
  sub->add_option("--threads", o.threads, "worker cap for Monte Carlo (default: BBL_THREADS or all cores)");
  sub->add_option("--out", o.out, "report file (default: stdout)");
  sub->add_option("--csv", o.csv, "CSV trace file");
  sub->add_option("--seed", o.seed, "random seed");
}

void add_instance(CLI::App* sub, Options& o) {
  sub->add_option("--instance", o.instance, "catalog instance name");
  sub->add_option("--samples", o.samples, "Monte Carlo samples");
  sub->add_option("--z-trials", o.z_trials, "witness search budget per Z_t membership test");
  sub->add_option("--K", o.K, "curvature bound K");
  sub->add_option("--N", o.N, "dimension bound N");
}

int exit_for(const std::vector<VerificationReport>& reps) {
  bool inconclusive = false;
  for (const auto& r : reps) {
    if (!r.pass) return kExitViolation;
    inconclusive = inconclusive || r.inconclusive;
  }
  return inconclusive ? kExitInconclusive : kExitPass;
}

std::vector<double> t_values(const ExperimentConfig& cfg, const std::vector<double>& fallback) {
  if (!cfg.t_grid.empty()) return cfg.t_grid;
  if (cfg.t) return {*cfg.t};
  return fallback;
}

// Flags override config fields.
ExperimentConfig apply_overrides(ExperimentConfig cfg, const Options& o, const std::string& cmd) {
  if (o.instance) cfg.instance = o.instance;
  if (o.seed) cfg.sampling.seed = *o.seed;
  if (o.samples) cfg.sampling.n_samples = *o.samples;
  if (o.z_trials) cfg.sampling.z_trials = *o.z_trials;
  if (o.ray_samples) cfg.sampling.ray_samples = *o.ray_samples;
  if (o.hypothesis_pairs) cfg.sampling.hypothesis_pairs = *o.hypothesis_pairs;
  if (!o.out.empty()) cfg.output.report = o.out;
  if (!o.csv.empty()) cfg.output.csv = o.csv;
  if (cmd == "pmean") {
    PMeanConfig p = cfg.pmean.value_or(PMeanConfig{});
    if (o.p) p.p = *o.p;
    if (!o.t.empty()) p.t = o.t.front();
    if (o.a) p.a = *o.a;
    if (o.b) p.b = *o.b;
    cfg.pmean = p;
    return cfg;
  }
  if (cmd == "distortion") {
    DistortionConfig d = cfg.distortion.value_or(DistortionConfig{});
    if (!o.t.empty()) d.t = o.t;
    if (!o.r.empty()) d.r = o.r;
    cfg.distortion = d;
  }
  if (cmd == "example-halfspace") {
    HalfspaceConfig h = cfg.halfspace.value_or(HalfspaceConfig{});
    if (o.N) h.N = *o.N;
    if (o.n) h.n = *o.n;
    if (o.ray_r) h.r = *o.ray_r;
    cfg.halfspace = h;
    cfg.instance = "halfspace-example";
  }
  if (cmd == "jacobi") {
    JacobiConfig j = cfg.jacobi.value_or(JacobiConfig{});
    if (o.n) j.n = *o.n;
    if (o.ray_r) j.r = *o.ray_r;
    if (o.sec) j.sec = *o.sec;
    if (o.grid) j.grid = *o.grid;
    cfg.jacobi = j;
  }
  if (cmd == "transport-1d" && o.grid) {
    TransportConfig tc = cfg.transport.value_or(TransportConfig{});
    tc.grid = *o.grid;
    cfg.transport = tc;
  }
  if (o.p) cfg.p = *o.p;
  cfg = resolve(cfg);
  if (o.t.size() == 1) {
    cfg.t = o.t.front();
    cfg.t_grid.clear();
  } else if (o.t.size() > 1) {
    cfg.t_grid = o.t;
  }
  if (o.K || o.N) {
    CDConfig cd = cfg.cd.value_or(CDConfig{});
    if (o.K) cd.K = *o.K;
    if (o.N && cmd != "example-halfspace") cd.N = *o.N;
    cfg.cd = cd;
  }
  return cfg;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

class Runner {
 public:
  Runner(std::string cmd, ExperimentConfig cfg, const Options& o) : cmd_(std::move(cmd)), cfg_(std::move(cfg)), o_(o) {}

  int go() {
    if (o_.dry_run) return dry_run();
    if (cmd_ == "pmean") return pmean();
    if (cmd_ == "distortion") return distortion();
    if (cmd_ == "transport-1d") return transport();
    if (cmd_ == "jacobi") return jacobi();
    if (cmd_ == "bm") return bm();
    if (cmd_ == "bbl") return bbl();
    if (cmd_ == "rigidity") return rigidity();
    if (cmd_ == "example-halfspace") return halfspace();
    throw ConfigError("unknown subcommand '" + cmd_ + "'");
  }

 private:
  json doc() const { return {{"provenance", provenance(cfg_, cmd_, !o_.no_timestamp)}}; }

  void finish(const json& d, const std::string& summary) const {
    emit_json(d, cfg_.output.report);
    if (!cfg_.output.report.empty()) std::cout << summary << "\n";
  }

  // Builds every object the command would use, without computing.
  int dry_run() {
    if (cmd_ == "bm" || cmd_ == "bbl" || cmd_ == "rigidity" || cmd_ == "example-halfspace") {
      (void)build_bm(cfg_);
      if (cmd_ == "bbl") (void)PMeanExponent::parse(cfg_.p);
    } else if (cmd_ == "transport-1d") {
      const WeightedSpace ws = build_space(cfg_.space.value_or(SpaceConfig{"euclidean", 1, std::nullopt, {}, {}}));
      const TransportConfig tc = cfg_.transport.value_or(TransportConfig{});
      (void)build_density(ws, tc.rho0);
      (void)build_density(ws, tc.rho1);
    } else if (cmd_ == "jacobi") {
      (void)build_jacobi(cfg_.jacobi.value_or(JacobiConfig{}));
    } else if (cmd_ == "pmean") {
      (void)PMeanExponent::parse(cfg_.pmean->p);
    } else if (cmd_ == "distortion") {
      (void)build_cd(cfg_.cd.value_or(CDConfig{}));
    }
    json d{{"command", cmd_}, {"dry_run", true}, {"config", to_json(cfg_)}, {"config_hash", config_hash(cfg_)}};
    std::cout << d.dump(2) << "\n";
    return kExitPass;
  }

  int pmean() {
    const PMeanConfig& p = *cfg_.pmean;
    const double v = p_mean(PMeanExponent::parse(p.p), p.t, p.a, p.b);
    if (!cfg_.output.report.empty()) {
      json d = doc();
      d["result"] = {{"p", p.p}, {"t", p.t}, {"a", p.a}, {"b", p.b}, {"value", v}};
      emit_json(d, cfg_.output.report);
    }
    std::cout << fmt(v) << "\n";
    return kExitPass;
  }

  int distortion() {
    const CurvatureDimension cd = build_cd(cfg_.cd.value_or(CDConfig{}));
    const DistortionConfig dc = cfg_.distortion.value_or(DistortionConfig{});
    json values = json::array();
    std::ostringstream csv;
    csv << "t,r,beta\n";
    for (double t : dc.t) {
      for (double r : dc.r) {
        const double b = beta(cd, t, r);
        values.push_back({{"t", t}, {"r", r}, {"beta", b}});
        csv << fmt(t) << ',' << fmt(r) << ',' << fmt(b) << '\n';
      }
    }
    json d = doc();
    d["result"] = {{"K", cd.K}, {"N", cd.N}, {"values", values}};
    if (!cfg_.output.csv.empty()) write_text(cfg_.output.csv, csv.str());
    finish(d, "distortion: " + std::to_string(values.size()) + " values");
    return kExitPass;
  }

  int transport() {
    const WeightedSpace ws = build_space(cfg_.space.value_or(SpaceConfig{"euclidean", 1, std::nullopt, {}, {}}));
    const CurvatureDimension cd = build_cd(cfg_.cd.value_or(CDConfig{0.0, 1.0}));
    const TransportConfig tc = cfg_.transport.value_or(TransportConfig{});
    const Density1D rho0 = build_density(ws, tc.rho0);
    const Density1D rho1 = build_density(ws, tc.rho1);
    const TransportMap1D T = optimal_map_1d(ws, rho0, rho1, tc.grid);
    json per_t = json::array();
    std::ostringstream csv;
    csv << "t,x,T,J_psi,margin\n";
    double worst = std::numeric_limits<double>::infinity();
    for (double t : t_values(cfg_, {0.5})) {
      const Density1D rho_t = pushforward_density(ws, rho0, T, t);
      const double residual = monge_ampere_residual(ws, rho0, rho_t, T, t, tc.residual_grid);
      double min_margin = std::numeric_limits<double>::infinity();
      const double h = (rho0.hi() - rho0.lo()) / tc.x_samples;
      for (int i = 0; i < tc.x_samples; ++i) {
        const double x = rho0.lo() + (i + 0.5) * h;
        const TransportRay ray = ray_1d(ws, T, x);
        const double m = concavity_margin(ws, cd, ray, t);
        min_margin = std::min(min_margin, m);
        csv << fmt(t) << ',' << fmt(x) << ',' << fmt(T(x)) << ',' << fmt(ray.jacobian(t)) << ',' << fmt(m) << '\n';
      }
      worst = std::min(worst, min_margin);
      per_t.push_back({{"t", t}, {"monge_ampere_residual", residual}, {"min_concavity_margin", min_margin},
                       {"mass_t", rho_t.total_mass()}});
    }
    json d = doc();
    d["result"] = {{"mass0", rho0.total_mass()}, {"mass1", rho1.total_mass()}, {"per_t", per_t},
                   {"min_concavity_margin", worst}};
    if (!cfg_.output.csv.empty()) write_text(cfg_.output.csv, csv.str());
    const bool ok = worst >= -cfg_.tolerances.margin;
    finish(d, std::string("transport-1d: min concavity margin ") + fmt(worst) + (ok ? " (pass)" : " (violated)"));
    return ok ? kExitPass : kExitViolation;
  }

  int jacobi() {
    const JacobiConfig jc = cfg_.jacobi.value_or(JacobiConfig{});
    const JacobiSystem sys = build_jacobi(jc);
    const CurvatureDimension cd = build_cd(cfg_.cd.value_or(CDConfig{(jc.n - 1) * jc.sec, static_cast<double>(std::max(jc.n, 2))}));
    const RiccatiTrace tr = integrate_jacobi(sys, jc.grid);
    // Ric_{m,N}(gamma') = (n-1) sec r^2 + psi'' - psi'^2/(N-n) with psi polynomial in t.
    const auto poly = jc.psi_poly;
    auto deriv = [&](double t, int order) {
      double v = 0.0;
      for (std::size_t k = static_cast<std::size_t>(order); k < poly.size(); ++k) {
        double c = poly[k];
        for (int m = 0; m < order; ++m) c *= static_cast<double>(k) - m;
        v += c * std::pow(t, static_cast<double>(k) - order);
      }
      return v;
    };
    const double gap = cd.N - jc.n;
    auto ricci = [&](double t) {
      const double d1 = deriv(t, 1);
      double v = (jc.n - 1) * jc.sec * jc.r * jc.r + deriv(t, 2);
      if (gap > 0.0) v -= d1 * d1 / gap;
      return v;
    };
    const double cs = cs_inequality_residual(tr, cd, ricci);
    // The differences are second order; halving the grid estimates their error on the minimum.
    const int coarse_grid = std::max(64, jc.grid / 2);
    const double cs_budget = std::abs(cs - cs_inequality_residual(integrate_jacobi(sys, coarse_grid), cd, ricci));
    const ConcavityCheck cc = u_concavity_check(tr, cd);
    const double holder = holder_recombination_margin(tr, cd);
    const IsotropyDiagnosis iso = diagnose_isotropy(tr, cd, 1e-6);
    json d = doc();
    d["result"] = {{"grid", jc.grid},
                   {"error_estimate", tr.error_estimate},
                   {"J_1", tr.J.back()},
                   {"J_psi_1", tr.J_psi.back()},
                   {"cs_residual", cs},
                   {"cs_fd_budget", cs_budget},
                   {"min_differential_margin", cc.min_differential},
                   {"min_chord_margin", cc.min_chord},
                   {"holder_margin", holder},
                   {"isotropy", {{"min_cs_ratio", iso.min_cs_ratio}, {"max_weight_mismatch", iso.max_weight_mismatch}, {"isotropic", iso.isotropic}}}};
    if (!cfg_.output.csv.empty()) write_text(cfg_.output.csv, tr.to_csv());
    const double tol = cfg_.tolerances.margin;
    const bool ok = cs >= -(tol + cs_budget) && cc.min_chord >= -tol && holder >= -tol;
    finish(d, std::string("jacobi: cs residual ") + fmt(cs) + ", holder margin " + fmt(holder) + (ok ? " (pass)" : " (violated)"));
    return ok ? kExitPass : kExitViolation;
  }

  int bm() {
    const BMInstance base = build_bm(cfg_);
    std::vector<VerificationReport> reps;
    json arr = json::array();
    const VerifyOptions opt = build_verify_options(cfg_);
    std::uint64_t k = 0;
    for (double t : t_values(cfg_, {0.5})) {
      BMInstance inst = base;
      inst.t = t;
      reps.push_back(verify_bm(inst, cfg_.sampling.n_samples, cfg_.sampling.z_trials, derive_seed(cfg_.sampling.seed, k++), opt));
      arr.push_back(report_json(reps.back()));
    }
    json d = doc();
    d["instance"] = base.name;
    d["reports"] = arr;
    const int code = exit_for(reps);
    finish(d, "bm: " + summary(reps));
    return code;
  }

  int bbl() {
    const BMInstance base = build_bm(cfg_);
    const PMeanExponent p = PMeanExponent::parse(cfg_.p);
    std::vector<VerificationReport> reps;
    json arr = json::array();
    const VerifyOptions opt = build_verify_options(cfg_);
    std::uint64_t k = 0;
    for (double t : t_values(cfg_, {0.5})) {
      BMInstance inst = base;
      inst.t = t;
      const BBLInstance b = bbl_from_bm(inst, p, cfg_.sampling.z_trials);
      reps.push_back(verify_bbl(b, cfg_.sampling.n_samples, derive_seed(cfg_.sampling.seed, k++), cfg_.sampling.hypothesis_pairs, opt));
      arr.push_back(report_json(reps.back()));
    }
    json d = doc();
    d["instance"] = base.name;
    d["p"] = p.to_string();
    d["reports"] = arr;
    const int code = exit_for(reps);
    finish(d, "bbl: " + summary(reps));
    return code;
  }

  int rigidity() {
    const BMInstance inst = build_bm(cfg_);
    RigidityOptions ro;
    ro.n_samples = cfg_.sampling.n_samples;
    ro.z_trials = cfg_.sampling.z_trials;
    ro.sec_tol = cfg_.tolerances.sec;
    ro.fit_tol = cfg_.tolerances.fit;
    ro.verify = build_verify_options(cfg_);
    const RigidityDiagnosis diag = rigidity_scan(inst, t_values(cfg_, {0.25, 0.5, 0.75}),
                                                 cfg_.sampling.ray_samples, cfg_.sampling.seed, ro);
    json d = doc();
    d["instance"] = inst.name;
    d["diagnosis"] = diagnosis_json(diag);
    if (!cfg_.output.csv.empty()) {
      std::ostringstream csv;
      csv << "t,lhs,rhs,margin,std_err,equality\n";
      for (const auto& r : diag.reports) {
        csv << fmt(r.t) << ',' << fmt(r.lhs) << ',' << fmt(r.rhs) << ',' << fmt(r.margin) << ',' << fmt(r.std_err) << ','
            << (r.equality ? 1 : 0) << '\n';
      }
      write_text(cfg_.output.csv, csv.str());
    }
    finish(d, "rigidity: " + to_string(diag.conclusion));
    switch (diag.conclusion) {
      case RigidityDiagnosis::Conclusion::EqualityInconsistent: return kExitViolation;
      case RigidityDiagnosis::Conclusion::Inconclusive: return kExitInconclusive;
      default: return kExitPass;
    }
  }

  int halfspace() {
    const BMInstance base = build_bm(cfg_);
    const double N = base.cd.N;
    std::vector<VerificationReport> reps;
    json arr = json::array();
    const VerifyOptions opt = build_verify_options(cfg_);
    std::uint64_t k = 0;
    std::ostringstream line;
    for (double t : t_values(cfg_, {0.25, 0.5, 0.75})) {
      BMInstance inst = base;
      inst.t = t;
      reps.push_back(verify_bm(inst, cfg_.sampling.n_samples, cfg_.sampling.z_trials, derive_seed(cfg_.sampling.seed, k++), opt));
      const VerificationReport& r = reps.back();
      const double ratio = r.combined.value / r.first.value;
      const double expected = std::pow(1.0 + t, N);
      json j = report_json(r);
      j["ratio"] = ratio;
      j["expected_ratio"] = expected;
      j["ratio_rel_error"] = std::abs(ratio - expected) / expected;
      arr.push_back(j);
      line << " t=" << t << " ratio=" << std::setprecision(6) << ratio << " (expected " << expected << ")";
    }
    json d = doc();
    d["instance"] = "halfspace-example";
    d["halfspace"] = {{"N", N}, {"n", base.ws.space().dim()}, {"r", base.A.ball_radius()}};
    d["reports"] = arr;
    const int code = exit_for(reps);
    finish(d, "example-halfspace:" + line.str());
    return code;
  }

  static std::string summary(const std::vector<VerificationReport>& reps) {
    std::ostringstream os;
    for (const auto& r : reps) {
      os << " t=" << r.t << " margin=" << std::setprecision(6) << r.margin << " (se " << r.std_err << ")"
         << (r.equality ? " equality" : r.pass ? " pass" : " VIOLATED") << (r.inconclusive ? " inconclusive" : "");
    }
    return os.str();
  }

  std::string cmd_;
  ExperimentConfig cfg_;
  const Options& o_;
};

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"bblrig: numerical checks of Borell-Brascamp-Lieb and Brunn-Minkowski inequalities under CD(K,N)", "bblrig"};
  app.set_version_flag("--version", BBL_VERSION);
  app.require_subcommand(1);
  Options o;

  auto* pm = app.add_subcommand("pmean", "weighted power mean M^p_t(a,b)");
  add_common(pm, o);
  pm->add_option("--p", o.p, "exponent: number, inf or -inf");
  pm->add_option("--t", o.t, "weight t")->expected(1);
  pm->add_option("--a", o.a);
  pm->add_option("--b", o.b);

  auto* di = app.add_subcommand("distortion", "distortion coefficients beta_t^{K,N}(r)");
  add_common(di, o);
  di->add_option("--K", o.K);
  di->add_option("--N", o.N);
  di->add_option("--t", o.t, "t values")->expected(1, -1);
  di->add_option("--r", o.r, "r values")->expected(1, -1);

  auto* tr = app.add_subcommand("transport-1d", "monotone transport on the weighted line");
  add_common(tr, o);
  tr->add_option("--t", o.t, "t values")->expected(1, -1);
  tr->add_option("--grid", o.grid);
  tr->add_option("--K", o.K);
  tr->add_option("--N", o.N);

  auto* ja = app.add_subcommand("jacobi", "Jacobi/Riccati trace along a geodesic");
  add_common(ja, o);
  ja->add_option("--n", o.n);
  ja->add_option("--r", o.ray_r);
  ja->add_option("--sec", o.sec);
  ja->add_option("--grid", o.grid);
  ja->add_option("--K", o.K);
  ja->add_option("--N", o.N);

  auto* bbl = app.add_subcommand("bbl", "Borell-Brascamp-Lieb check with Brunn-Minkowski functions");
  add_common(bbl, o);
  add_instance(bbl, o);
  bbl->add_option("--t", o.t, "t values")->expected(1, -1);
  bbl->add_option("--p", o.p);
  bbl->add_option("--hypothesis-pairs", o.hypothesis_pairs);

  auto* bm = app.add_subcommand("bm", "Brunn-Minkowski check");
  add_common(bm, o);
  add_instance(bm, o);
  bm->add_option("--t", o.t, "t values")->expected(1, -1);

  auto* rg = app.add_subcommand("rigidity", "equality/rigidity scan over a t grid");
  add_common(rg, o);
  add_instance(rg, o);
  rg->add_option("--t", o.t, "t grid")->expected(1, -1);
  rg->add_option("--ray-samples", o.ray_samples);

  auto* hs = app.add_subcommand("example-halfspace", "half-space example m(Z_t)/m(A) = (1+t)^N");
  add_common(hs, o);
  hs->add_option("--N", o.N);
  hs->add_option("--n", o.n);
  hs->add_option("--r", o.ray_r);
  hs->add_option("--t", o.t, "t values")->expected(1, -1);
  hs->add_option("--samples", o.samples);
  hs->add_option("--z-trials", o.z_trials);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInvalid;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  try {
    if (o.threads) set_default_threads(*o.threads);
    const ExperimentConfig base = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    const ExperimentConfig cfg = apply_overrides(base, o, cmd);
    Runner runner(cmd, cfg, o);
    return runner.go();
  } catch (const Error& e) {
    std::cerr << "bblrig " << cmd << ": error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "bblrig " << cmd << ": error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace bbl::cli
