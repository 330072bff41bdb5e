#pragma once

// Conditional branches: every combination of taken / not-taken recovery
// calls is expanded into a straight-line program and verified on its own.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmfv/fluidics.hpp"
#include "dmfv/graph.hpp"
#include "dmfv/pins.hpp"

namespace dmfv {

class PathLimitExceeded : public std::runtime_error {
public:
    PathLimitExceeded(std::size_t branches, std::size_t limit);
    std::size_t branches() const { return branches_; }

private:
    std::size_t branches_;
};

/// Conditional calls in the main program, in program order.
std::size_t branch_count(const Program& program);

struct PathSpec {
    std::string label;        // one char per branch, '1' = recovery taken
    std::vector<bool> taken;
    Program program;          // main is flattened; recovery blocks are kept for reference only
};

/// Flattens one path. Taken branches splice the recovery lines after the
/// call; not-taken branches pull every later line back by the recovery span.
PathSpec expand_path(const Program& program, const std::vector<bool>& taken);
/// All 2^k paths in label order. Throws PathLimitExceeded when k > limit.
std::vector<PathSpec> enumerate_paths(const Program& program, std::size_t limit = 16);
/// Label like "010" to the taken vector; throws std::invalid_argument.
std::vector<bool> parse_path_label(const std::string& label, std::size_t branches);

struct PathOptions {
    bool stop_at_first = true;
    std::optional<int> t_max;
    const PinMap* pins = nullptr;
    const SeqGraph* input = nullptr;  // conformance reference
    bool ignore_waste = false;
};

struct PathResult {
    PathSpec spec;
    Verification verification;
    Report report;  // fluidic + pin + conformance rows for this path
};

/// The all-not-taken path gets full conformance; the others compare outputs only.
PathResult verify_path(PathSpec spec, const PathOptions& options);
std::vector<PathResult> verify_all_paths_serial(const std::vector<PathSpec>& paths, const PathOptions& options);
std::vector<PathResult> verify_all_paths_parallel(const std::vector<PathSpec>& paths, const PathOptions& options);

}  // namespace dmfv
