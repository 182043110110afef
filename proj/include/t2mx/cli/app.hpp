#pragma once

#include "t2mx/core/error.hpp"

namespace t2mx::cli {

/// Exit codes: 0 success, 1 other failure, 2 malformed input, 3 missing
/// dependency checkpoint, 4 empty text, 5 missing split, 6 configuration or usage.
int exit_code_for(ErrorCode code);

/// Entry point of the t2mx binary.
int run(int argc, char** argv);

}  // namespace t2mx::cli
