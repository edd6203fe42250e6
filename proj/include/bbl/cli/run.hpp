#pragma once

#include <string>
#include <vector>

namespace bbl::cli {

// Exit codes: 0 pass, 1 inequality violated or rigidity inconsistent,
// 2 invalid input or config, 3 inconclusive.
inline constexpr int kExitPass = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitInconclusive = 3;

int run(int argc, char** argv);
// argv[0] excluded.
int run(const std::vector<std::string>& args);

}  // namespace bbl::cli
