#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace eidcloud::cli {

/// Exit codes.
inline constexpr int kOk = 0;
/// Session aborted or denied, or an audit verdict of fail.
inline constexpr int kFailed = 1;
/// Bad arguments, invalid scenario, unreadable or unwritable files.
inline constexpr int kUsage = 2;
/// Audit requested on the test-double backend.
inline constexpr int kRefused = 3;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutEnv = "EIDCLOUD_OUT";

/// args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eidcloud::cli
