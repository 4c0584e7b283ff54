#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sps::cli {

// Exit codes.
inline constexpr int kMember = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kSingularDesign = 2;
inline constexpr int kNotMember = 3;

/// Entry point of the `sps` tool. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sps::cli
