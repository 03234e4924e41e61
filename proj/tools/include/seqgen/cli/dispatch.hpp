#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seqgen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name.
int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
int dispatch(int argc, const char *const *argv);

} // namespace seqgen::cli
