#pragma once

namespace setdist::cli {

/// Exit codes: 0 ran, 2 input error, 3 pipeline error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitPipeline = 3;

int run(int argc, char** argv);

}  // namespace setdist::cli
