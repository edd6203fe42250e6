#pragma once

#include <string>

#include "bbl/cli/config.hpp"
#include "bbl/verify.hpp"

namespace bbl::cli {

json report_json(const VerificationReport& rep);
json diagnosis_json(const RigidityDiagnosis& diag);
json estimate_json(const Estimate& e);
// Config hash, seed, tool version and (optionally) a UTC timestamp.
json provenance(const ExperimentConfig& cfg, const std::string& command, bool timestamp);

// Pretty-printed JSON to `path`, or to stdout when path is empty.
void emit_json(const json& doc, const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace bbl::cli
