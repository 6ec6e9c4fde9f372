#pragma once

#include <string>
#include <vector>

#include "manhattan/maps.hpp"

namespace manhattan::cli {

// "re+imi" literal ("0.05+0i", "-0.1+0.2i"), bare reals accepted too.
// Throws UsageError with the expected grammar on anything else.
cdouble parse_complex(const std::string& text);

// comma-separated list of complex literals
std::vector<cdouble> parse_waypoints(const std::string& text);

// "start:stop:count:geometric|linear" with stop > start, count >= 2
std::vector<double> parse_grid(const std::string& text);

// Whole command line minus the program name. Returns the process exit code:
// 0 success, 2 usage error, 3 numeric failure, 4 invariant failure.
int run(std::vector<std::string> args);

}  // namespace manhattan::cli
