#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bbl/cli/catalog.hpp"
#include "bbl/cli/config.hpp"
#include "bbl/cli/run.hpp"
#include "bbl/errors.hpp"
#include "doctest.h"

using namespace bbl;
using namespace bbl::cli;
namespace fs = std::filesystem;

namespace {

struct Captured {
  int code;
  std::string out, err;
};

Captured run_captured(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = run(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / "bblrig_cli_test";
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = temp_dir() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("pmean subcommand") {
  auto r = run_captured({"pmean", "--p", "inf", "--t", "0.7", "--a", "2", "--b", "5"});
  CHECK(r.code == kExitPass);
  CHECK(r.out == "5\n");
  r = run_captured({"pmean", "--p", "1", "--t", "0.5", "--a", "2", "--b", "4"});
  CHECK(r.out == "3\n");
  r = run_captured({"pmean", "--p", "0", "--t", "0.5", "--a", "1", "--b", "4"});
  CHECK(r.out == "2\n");
  r = run_captured({"pmean", "--p", "abc", "--t", "0.5", "--a", "1", "--b", "4"});
  CHECK(r.code == kExitInvalid);
  CHECK(r.err.find("error") != std::string::npos);
  r = run_captured({"pmean", "--p", "1", "--t", "1.5", "--a", "1", "--b", "4"});
  CHECK(r.code == kExitInvalid);
}

TEST_CASE("argument errors map to invalid input") {
  CHECK(run_captured({}).code == kExitInvalid);
  CHECK(run_captured({"frobnicate"}).code == kExitInvalid);
  CHECK(run_captured({"bm", "--instance", "no-such-instance"}).code == kExitInvalid);
  CHECK(run_captured({"bm", "--config", "/nonexistent/cfg.json"}).code == kExitInvalid);
}

TEST_CASE("example-halfspace reproduces the ratio") {
  const fs::path out = temp_dir() / "hs.json";
  const auto r = run_captured({"example-halfspace", "--N", "3", "--n", "2", "--r", "0.4", "--t", "0.5", "--samples",
                               "1000000", "--seed", "7", "--no-timestamp", "--out", out.string()});
  CHECK(r.code == kExitPass);
  const json d = json::parse(slurp(out));
  REQUIRE(d["reports"].size() == 1);
  const json& rep = d["reports"][0];
  CHECK(rep["ratio"].get<double>() == doctest::Approx(3.375).epsilon(0.02));
  CHECK(rep["expected_ratio"].get<double>() == doctest::Approx(3.375));
  CHECK(rep["equality"].get<bool>());
  CHECK(d["provenance"]["seed"].get<int>() == 7);
  CHECK_FALSE(d["provenance"].contains("timestamp"));
}

TEST_CASE("conjugate radius violation is invalid input") {
  const std::string cfg = R"({
    "space": {"kind": "sphere", "n": 2, "sec": 1.0, "weight": {"name": "zero"}},
    "cd": {"K": 4.0, "N": 2.0},
    "regions": {"A": {"type": "ball", "center": [0, 0, 1], "radius": 0.3},
                "B": {"type": "ball", "center": [0.9320390859672263, 0, 0.3623577544766736], "radius": 0.5}},
    "t": 0.5,
    "sampling": {"n_samples": 2000}
  })";
  const fs::path p = write_file("conj.json", cfg);
  const auto r = run_captured({"bm", "--config", p.string(), "--no-timestamp"});
  CHECK(r.code == kExitInvalid);
  CHECK(r.err.find("conjugate radius") != std::string::npos);
}

TEST_CASE("config round trip and strictness") {
  for (const auto& name : catalog_names()) {
    const ExperimentConfig c = catalog_config(name);
    const ExperimentConfig back = parse_config(to_json(c));
    CHECK(back == c);
    CHECK(parse_config_text(to_json(back).dump()) == c);
  }
  ExperimentConfig rich = catalog_config("cone-halfline");
  rich.transport = TransportConfig{};
  rich.transport->rho1.type = "gaussian";
  rich.jacobi = JacobiConfig{};
  rich.jacobi->hess_psi0 = {{0.1, 0.0}, {0.0, 0.2}};
  rich.jacobi->psi_poly = {0.0, 0.5};
  rich.output.report = "r.json";
  CHECK(parse_config(to_json(rich)) == rich);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"sampling": {"n_sampels": 10}})"), doctest::Contains("n_sampels"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"t": "half"})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
  // Defaults for missing fields.
  const ExperimentConfig empty = parse_config_text("{}");
  CHECK(empty.sampling.n_samples == 100000);
  CHECK(empty.sampling.z_trials == 4096);
  CHECK(empty.tolerances.equality_rel == 1e-4);
  // Output paths do not change the hash.
  ExperimentConfig a = catalog_config("sphere-caps"), b = a;
  b.output.report = "elsewhere.json";
  CHECK(config_hash(a) == config_hash(b));
  b.sampling.seed = 3;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("dry run validates without computing") {
  for (const std::string cmd : {"bm", "bbl", "rigidity"}) {
    const auto r = run_captured({cmd, "--instance", "sphere-caps", "--dry-run"});
    CHECK(r.code == kExitPass);
    const json d = json::parse(r.out);
    CHECK(d["dry_run"].get<bool>());
    CHECK(d["config"]["cd"]["K"].get<double>() == 1.0);
  }
  for (const std::string cmd : {"pmean", "distortion", "jacobi", "example-halfspace"}) {
    CHECK(run_captured({cmd, "--dry-run"}).code == kExitPass);
  }
  const std::string tcfg = R"({"transport": {"rho0": {"type": "uniform", "lo": 0, "hi": 1},
                                             "rho1": {"type": "uniform", "lo": 0, "hi": 2}}})";
  CHECK(run_captured({"transport-1d", "--config", write_file("t.json", tcfg).string(), "--dry-run"}).code == kExitPass);
  // Invalid regions are caught by the dry run.
  const std::string bad = R"({"instance": "sphere-caps", "regions": {"A": {"type": "ball", "center": [0, 0, 2], "radius": 0.3}}})";
  CHECK(run_captured({"bm", "--config", write_file("bad.json", bad).string(), "--dry-run"}).code == kExitInvalid);
}

TEST_CASE("reports are byte-identical across runs") {
  const fs::path a = temp_dir() / "a.json", b = temp_dir() / "b.json";
  const std::vector<std::string> base = {"bm", "--instance", "sphere-caps", "--samples", "4000", "--z-trials", "512",
                                         "--seed", "11", "--no-timestamp", "--t", "0.5", "--out"};
  auto args = base;
  args.push_back(a.string());
  CHECK(run_captured(args).code == kExitPass);
  args = base;
  args.push_back(b.string());
  args.insert(args.end(), {"--threads", "3"});
  CHECK(run_captured(args).code == kExitPass);
  CHECK(slurp(a) == slurp(b));
  CHECK_FALSE(slurp(a).empty());
}

TEST_CASE("other subcommands") {
  auto r = run_captured({"distortion", "--K", "1", "--N", "2", "--t", "0.5", "--r", "1.5707963267948966",
                         "--no-timestamp"});
  CHECK(r.code == kExitPass);
  json d = json::parse(r.out);
  CHECK(d["result"]["values"][0]["beta"].get<double>() == doctest::Approx(std::sqrt(2.0)));

  const fs::path csv = temp_dir() / "trace.csv";
  r = run_captured({"jacobi", "--n", "3", "--sec", "1", "--r", "1", "--no-timestamp", "--csv", csv.string()});
  CHECK(r.code == kExitPass);
  CHECK(slurp(csv).rfind("t,J,J_psi,f,u,alpha\n", 0) == 0);

  const std::string cone = R"({
    "space": {"kind": "euclidean", "n": 1, "weight": {"name": "power_norm", "alpha": 2.0},
              "domain": {"type": "interval", "lo": 0.0, "hi": "inf"}},
    "cd": {"K": 0.0, "N": 3.0},
    "t_grid": [0.25, 0.5, 0.75],
    "transport": {"rho0": {"type": "uniform", "lo": 1, "hi": 2}, "rho1": {"type": "uniform", "lo": 2, "hi": 4}}
  })";
  r = run_captured({"transport-1d", "--config", write_file("cone.json", cone).string(), "--no-timestamp"});
  CHECK(r.code == kExitPass);
  d = json::parse(r.out);
  CHECK(d["result"]["min_concavity_margin"].get<double>() >= -1e-9);
  // N = 2 < 3 breaks the hypothesis on this cone, and the margin goes negative.
  r = run_captured({"transport-1d", "--config", write_file("cone.json", cone).string(), "--N", "1.2", "--no-timestamp"});
  CHECK(r.code == kExitViolation);

  r = run_captured({"bm", "--instance", "cone-halfline", "--no-timestamp"});
  CHECK(r.code == kExitPass);
  d = json::parse(r.out);
  for (const auto& rep : d["reports"]) {
    CHECK(rep["method"] == "quadrature");
    CHECK(std::abs(rep["margin"].get<double>()) < 1e-9);
  }
  r = run_captured({"rigidity", "--instance", "sphere-caps", "--samples", "20000", "--no-timestamp"});
  CHECK(r.code == kExitPass);
  d = json::parse(r.out);
  CHECK(d["diagnosis"]["conclusion"] == "NoEquality");
  r = run_captured({"bbl", "--instance", "euclid-homothety", "--samples", "5000", "--hypothesis-pairs", "200",
                    "--no-timestamp"});
  CHECK(r.code == kExitPass);
  // Too few samples for an equality instance leaves the verdict open.
  const std::string strict = R"({"instance": "halfspace-example", "tolerances": {"inconclusive_rel": 0.001}})";
  r = run_captured({"bm", "--config", write_file("strict.json", strict).string(), "--samples", "2000", "--t", "0.5",
                    "--no-timestamp"});
  CHECK(r.code == kExitInconclusive);
}
