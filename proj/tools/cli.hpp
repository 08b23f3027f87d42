#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "irbfn/clothoid.hpp"

namespace irbfn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs one `irbfn` invocation; args[0] is the program name. Returns the
// process exit code: 0 success, 1 runtime failure, 2 usage or config error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Static SVG with one polyline per trajectory and labelled axes.
std::string render_svg(std::span<const std::vector<TrajectorySample>> trajectories);

}  // namespace irbfn::cli
