#pragma once

#include <string>
#include <vector>

#include "bbl/cli/config.hpp"
#include "bbl/ode.hpp"
#include "bbl/transport.hpp"
#include "bbl/verify.hpp"

namespace bbl::cli {

std::vector<std::string> catalog_names();
// Space, cd, regions, homothety and t values of a named instance.
ExperimentConfig catalog_config(const std::string& name);
// Half-space instance: weight |x|^{N-n} on {x_n >= 0}, A = B_r(e_n), B = 2A.
ExperimentConfig halfspace_config(const HalfspaceConfig& h);

// Fills the instance blocks from the catalog when `instance` is set; blocks
// present in the user config win.
ExperimentConfig resolve(const ExperimentConfig& user);

ModelSpace build_model_space(const SpaceConfig& s);
WeightedSpace build_space(const SpaceConfig& s);
CurvatureDimension build_cd(const CDConfig& c);
Region build_region(const ModelSpace& space, const RegionConfig& r, const std::string& what);
BMInstance build_bm(const ExperimentConfig& cfg);
Density1D build_density(const WeightedSpace& ws, const DensityConfig& d);
JacobiSystem build_jacobi(const JacobiConfig& j);
VerifyOptions build_verify_options(const ExperimentConfig& cfg);

}  // namespace bbl::cli
