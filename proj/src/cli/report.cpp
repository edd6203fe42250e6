#include "bbl/cli/report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>

#include "bbl/errors.hpp"

#ifndef BBL_VERSION
#define BBL_VERSION "0.0.0"
#endif

namespace bbl::cli {

namespace {

// JSON has no infinities or NaN; encode them as strings.
json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json point_json(const Point& p) {
  json a = json::array();
  for (Eigen::Index i = 0; i < p.coords.size(); ++i) a.push_back(num(p.coords(i)));
  return a;
}

}  // namespace

json estimate_json(const Estimate& e) { return {{"value", num(e.value)}, {"std_err", num(e.std_err)}}; }

json report_json(const VerificationReport& rep) {
  json j{{"kind", rep.kind},
         {"method", rep.method},
         {"t", num(rep.t)},
         {"lhs", num(rep.lhs)},
         {"rhs", num(rep.rhs)},
         {"margin", num(rep.margin)},
         {"std_err", num(rep.std_err)},
         {"pass", rep.pass},
         {"equality", rep.equality},
         {"inconclusive", rep.inconclusive},
         {"samples", rep.samples},
         {"seed", rep.seed},
         {"theta", num(rep.theta)},
         {"hypothesis_checked", rep.hypothesis_checked},
         {"hypothesis_violations", rep.hypothesis_violations},
         {"notes", rep.notes}};
  if (rep.kind == "bm") {
    j["m_A"] = estimate_json(rep.first);
    j["m_B"] = estimate_json(rep.second);
    j["m_Z"] = estimate_json(rep.combined);
  } else {
    j["int_f0"] = estimate_json(rep.first);
    j["int_f1"] = estimate_json(rep.second);
    j["int_h"] = estimate_json(rep.combined);
  }
  return j;
}

json diagnosis_json(const RigidityDiagnosis& diag) {
  json reports = json::array();
  for (const auto& r : diag.reports) reports.push_back(report_json(r));
  json fits = json::array();
  for (const auto& f : diag.weight_fits) {
    fits.push_back({{"x0", point_json(f.x0)},
                    {"x1", point_json(f.x1)},
                    {"C0", num(f.fit.profile.C0)},
                    {"C1", num(f.fit.profile.C1)},
                    {"r", num(f.fit.profile.r)},
                    {"residual", num(f.fit.residual)}});
  }
  json j{{"conclusion", to_string(diag.conclusion)},
         {"t_grid", diag.t_grid},
         {"equality_times", diag.equality_times},
         {"inferred_sec", num(diag.inferred_sec)},
         {"expected_sec", num(diag.expected_sec)},
         {"max_fit_residual", num(diag.max_fit_residual)},
         {"weight_fits", fits},
         {"reports", reports},
         {"findings", diag.findings}};
  if (diag.sym_diff) j["sym_diff"] = estimate_json(*diag.sym_diff);
  return j;
}

json provenance(const ExperimentConfig& cfg, const std::string& command, bool timestamp) {
  json j{{"tool", "bblrig"},
         {"version", BBL_VERSION},
         {"command", command},
         {"config_hash", config_hash(cfg)},
         {"seed", cfg.sampling.seed}};
  if (timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    j["timestamp"] = buf;
  }
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

void emit_json(const json& doc, const std::string& path) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

}  // namespace bbl::cli
