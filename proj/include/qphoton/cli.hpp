// cli.hpp
// Command-line front end: experiment table, argument/config parsing, runs.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qphoton::cli {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string experiment;
    // Experiment keys with defaults filled in; values are validated text.
    std::map<std::string, std::string> params;
    std::uint64_t seed = 42;
    std::uint64_t shots = 0;
    std::optional<std::string> out;
    int workers = 1;
};

// args excludes the program name: experiment first, then "--key value" or
// "--key=value" pairs. --config <path> reads flat key=value lines that
// flags override. Throws UsageError for unknown experiments or keys,
// malformed values and missing arguments.
RunConfig parse(const std::vector<std::string>& args);

// Runs an experiment, writes --out if given, prints one summary line to
// `out` and diagnostics to `err`. Returns 0 on success, 1 on a runtime
// failure or detected invariant violation.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

std::vector<std::string> experiment_names();
std::string usage();
// Usage for one experiment, listing its keys and defaults.
std::string usage(const std::string& experiment);

// Full entry point: parse + run, usage errors exit with status 2.
int main(int argc, char** argv);

}  // namespace qphoton::cli
