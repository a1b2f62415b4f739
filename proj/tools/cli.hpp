#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bpcalc::cli {

enum ExitCode : int { kOk = 0, kFail = 1, kUsage = 2, kAccuracy = 3 };

/// Entry point of the bpcalc command line. argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace bpcalc::cli
