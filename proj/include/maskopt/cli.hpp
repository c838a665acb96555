#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace maskopt::cli {

// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kFormat = 2,     // unreadable or malformed files
    kConstraint = 3, // shape, pattern, budget or capacity violations
    kBound = 4,      // a rounding bound check failed
};

// Each command takes its own arguments (without the subcommand name),
// reports problems on `err` and returns an ExitCode.
int cmd_gen(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_prune(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_bench(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_oracle(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Dispatches on args[0] (gen | prune | bench | oracle).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// --threads default: MASKOPT_THREADS if set to a positive integer, else 1.
unsigned default_threads();

} // namespace maskopt::cli
