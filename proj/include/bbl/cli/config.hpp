#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace bbl::cli {

using nlohmann::json;

struct WeightConfig {
  std::string name = "zero";  // zero | constant | linear | quadratic | power_norm
  double c = 0.0;             // constant, quadratic
  std::vector<double> a;      // linear: psi = a.x + b
  double b = 0.0;
  double alpha = 0.0;  // power_norm: density |x|^alpha
  friend bool operator==(const WeightConfig&, const WeightConfig&) = default;
};

struct RegionConfig {
  std::string type = "ball";  // ball | box | interval
  std::vector<double> center;
  double radius = 0.0;
  std::vector<double> lo, hi;  // box bounds; interval uses lo[0], hi[0]
  friend bool operator==(const RegionConfig&, const RegionConfig&) = default;
};

struct SpaceConfig {
  std::string kind = "euclidean";
  int n = 2;
  std::optional<double> sec;  // default +1 sphere, -1 hyperbolic, 0 euclidean
  WeightConfig weight;
  std::optional<RegionConfig> domain;
  friend bool operator==(const SpaceConfig&, const SpaceConfig&) = default;
};

struct CDConfig {
  double K = 0.0;
  double N = 2.0;
  friend bool operator==(const CDConfig&, const CDConfig&) = default;
};

struct HomothetyConfig {
  std::vector<double> center;
  double ratio = 1.0;
  friend bool operator==(const HomothetyConfig&, const HomothetyConfig&) = default;
};

struct SamplingConfig {
  long n_samples = 100000;
  int z_trials = 4096;
  std::uint64_t seed = 0;
  int ray_samples = 16;
  long hypothesis_pairs = 2000;
  friend bool operator==(const SamplingConfig&, const SamplingConfig&) = default;
};

struct ToleranceConfig {
  double equality_rel = 1e-4;
  double inconclusive_rel = 1e-2;
  double sec = 1e-6;
  double fit = 1e-3;
  double margin = 1e-6;  // allowed negative slack of deterministic margins
  friend bool operator==(const ToleranceConfig&, const ToleranceConfig&) = default;
};

struct DensityConfig {
  std::string type = "uniform";  // uniform | power | gaussian
  double lo = 0.0, hi = 1.0;
  double k = 0.0;
  double mu = 0.0, sigma = 1.0, width = 12.0;
  friend bool operator==(const DensityConfig&, const DensityConfig&) = default;
};

struct TransportConfig {
  DensityConfig rho0, rho1;
  int grid = 4096;
  int residual_grid = 1000;
  int x_samples = 100;
  friend bool operator==(const TransportConfig&, const TransportConfig&) = default;
};

struct JacobiConfig {
  int n = 2;
  double r = 1.0;
  double sec = 0.0;
  std::vector<std::vector<double>> hess_psi0;  // empty: zero
  std::vector<double> psi_poly;                // psi(gamma(t)) = sum c_k t^k
  int grid = 4096;
  friend bool operator==(const JacobiConfig&, const JacobiConfig&) = default;
};

struct PMeanConfig {
  std::string p = "0";
  double t = 0.5;
  double a = 1.0, b = 1.0;
  friend bool operator==(const PMeanConfig&, const PMeanConfig&) = default;
};

struct DistortionConfig {
  std::vector<double> t = {0.25, 0.5, 0.75};
  std::vector<double> r = {0.5, 1.0};
  friend bool operator==(const DistortionConfig&, const DistortionConfig&) = default;
};

struct HalfspaceConfig {
  double N = 3.0;
  int n = 2;
  double r = 0.4;
  friend bool operator==(const HalfspaceConfig&, const HalfspaceConfig&) = default;
};

struct OutputConfig {
  std::string report;  // empty: stdout
  std::string csv;     // empty: no CSV
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ExperimentConfig {
  std::optional<std::string> instance;
  std::optional<SpaceConfig> space;
  std::optional<CDConfig> cd;
  std::optional<RegionConfig> A, B;
  std::optional<HomothetyConfig> homothety;
  std::optional<double> t;
  std::vector<double> t_grid;
  std::string p = "inf";
  SamplingConfig sampling;
  ToleranceConfig tolerances;
  std::optional<TransportConfig> transport;
  std::optional<JacobiConfig> jacobi;
  std::optional<PMeanConfig> pmean;
  std::optional<DistortionConfig> distortion;
  std::optional<HalfspaceConfig> halfspace;
  OutputConfig output;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Strict parsing: unknown keys and ill-typed values throw ConfigError.
ExperimentConfig parse_config(const json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
json to_json(const ExperimentConfig& cfg);

// 64-bit FNV-1a of the canonical serialisation (output paths excluded), as
// 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace bbl::cli
