#pragma once

// ASCII and SVG snapshots of the chip, replayed from a verification trace.

#include <optional>
#include <string>
#include <vector>

#include "dmfv/fluidics.hpp"
#include "dmfv/pins.hpp"

namespace dmfv {

struct Snapshot {
    int t = 0;
    ChipState state;                   // mixers already filtered to those active at t
    std::vector<Violation> violations;  // set on the tick where replay stopped
};

/// One snapshot per tick 0..final_t; replay stops at the first violating tick.
std::vector<Snapshot> replay(const Program& program, const PinMap* pins = nullptr);
/// Snapshot at tick t; throws std::out_of_range past the replayed range.
Snapshot snapshot_at(const Program& program, int t, const PinMap* pins = nullptr);

std::string render_ascii(const Snapshot& snap);
std::string render_svg(const Snapshot& snap);

/// Cells covered by a mixer, endpoints included.
std::vector<Loc> mixer_cells(const MixerEntry& m);

}  // namespace dmfv
