#pragma once

#include <ostream>

#include "velomule/config.hpp"

namespace velomule {

/// Entry point of the `velomule` tool. Exit codes: 0 success, 1 usage
/// error, 2 data error. Every error goes to `err` prefixed with "error:".
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
             const EnvLookup& env);

}  // namespace velomule
