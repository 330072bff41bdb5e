#pragma once

// Pin-constrained chips: shared control pins must not split, stretch or
// stall droplets (Cases 1-3 plus the dispense rule).

#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dmfv/fluidics.hpp"

namespace dmfv {

class PinMapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PinMap {
public:
    PinMap() = default;
    PinMap(int rows, int cols, int fill = 0);

    /// One pin per electrode: cell (r,c) gets (r-1)*cols + c.
    static PinMap dedicated(int rows, int cols);
    /// Whitespace-separated integer grid, one chip row per text line; '#' starts a comment.
    static PinMap parse(std::string_view text);
    std::string serialize() const;

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool in_bounds(Loc l) const { return l.row >= 1 && l.row <= rows_ && l.col >= 1 && l.col <= cols_; }
    int pin(Loc l) const;
    void set(Loc l, int pin);

    bool operator==(const PinMap&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> pins_;
};

std::set<int> pins_of(const PinMap& map, const std::vector<Loc>& cells);
std::vector<Loc> n4(const PinMap& map, Loc loc);

struct PinFinding {
    std::string tag;          // "1", "2a".."2d", "3a", "3b", "dispense"
    std::set<int> shared;     // intersection
    std::vector<Loc> cells;   // electrodes carrying the shared pins (both sides)
    std::optional<Loc> stuck; // droplet position when the shared pin sits behind it

    bool operator==(const PinFinding&) const = default;
};

std::vector<PinFinding> case1_findings(const PinMap& map, Loc droplet);
/// All Case 2/3 findings for one droplet pair. `include_t` adds Case 2(a)(b)
/// on the tick-start positions; the stepper only needs the t+1 forms.
std::vector<PinFinding> pair_findings(const PinMap& map, Loc d1_t, Loc d1_t1, Loc d2_t, Loc d2_t1, bool include_t = true);
std::vector<PinFinding> dispense_findings(const PinMap& map, const std::vector<Loc>& droplets, Loc loc);

Verdict check_case1(const PinMap& map, Loc droplet);
Verdict check_pair(const PinMap& map, Loc d1_t, Loc d1_t1, Loc d2_t, Loc d2_t1);
Verdict check_dispense_pins(const PinMap& map, const ChipState& state, Loc loc);

/// Pair-check kernels over the droplets of one tick. Both return findings
/// ordered by (i, j); the OpenMP kernel must agree with the serial one.
struct PairHit {
    std::size_t i = 0;
    std::size_t j = 0;
    PinFinding finding;

    bool operator==(const PairHit&) const = default;
};
std::vector<PairHit> pair_kernel_serial(const PinMap& map, const std::vector<Motion>& motions);
std::vector<PairHit> pair_kernel_parallel(const PinMap& map, const std::vector<Motion>& motions);
/// Number of pair evaluations the kernels perform for these motions.
std::size_t pair_check_count(const std::vector<Motion>& motions);

struct PinOptions {
    bool parallel = true;
};

/// Pin phase hook for the fluidic stepper.
PinPhase make_pin_phase(const PinMap& map, PinOptions options = {});

Verification verify_program_pins(const Program& program, const PinMap& map, const VerifyOptions& options = {},
                                 PinOptions pin_options = {});

}  // namespace dmfv
