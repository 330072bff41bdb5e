#pragma once

// Fluidic constraint checks for general-purpose chips and the per-tick
// stepper that drives verification.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dmfv/chip.hpp"
#include "dmfv/diag.hpp"
#include "dmfv/isa.hpp"

namespace dmfv {

struct Verdict {
    std::optional<Violation> violation;

    bool ok() const { return !violation.has_value(); }
    static Verdict pass() { return {}; }
    static Verdict fail(const RawFailure& f) { return {classify(f)}; }
};

/// What else happens on the current line; lets a check tell a blocker that
/// stays put from one that is arriving or leaving during the same tick.
struct TickContext {
    std::set<Loc> leaving;   // droplets moved away / delivered on this line
    std::set<Loc> consumed;  // droplets already used by an earlier instruction
};

bool static_fc(const ChipState& state, Loc loc);
/// The three cells beyond `dst` in the direction of travel (may be out of bounds).
std::vector<Loc> dynamic_cells(Loc src, Loc dst);
/// Cells whose emptiness D(i,j) requires: (i,j) and its in-bounds 8-neighbours.
std::vector<Loc> dispense_cells(const ChipHeader& header, Loc loc);

Verdict check_dispense(const ChipState& state, Loc loc);
Verdict check_move(const ChipState& state, Loc src, Loc dst, const TickContext* ctx = nullptr);
Verdict check_mix_start(const ChipState& state, Loc a, Loc b, int t_mix, MixerType mtype,
                        const TickContext* ctx = nullptr);
Verdict check_waste(const ChipState& state, Loc loc, const TickContext* ctx = nullptr);
Verdict check_output(const ChipState& state, Loc loc, const TickContext* ctx = nullptr);
Verdict check_detect(const ChipState& state, const DetectorDecl& det, const TickContext* ctx = nullptr);
Verdict check_cond_call(const ChipState& state, const DetectorDecl& det);
/// Re-evaluates every active mixer's constraint S(a) & S(b).
Verdict active_mixer_guard(const ChipState& state);

bool mixer_geometry_ok(Loc a, Loc b, MixerType mtype);

struct Delivery {
    ReservoirKind kind = ReservoirKind::Waste;
    Loc loc;
    int reservoir_origin = 0;
    int droplet_origin = 0;
    CFVector cf;
    int t = 0;

    bool operator==(const Delivery&) const = default;
};

/// Per-droplet movement across one tick; droplets that do not move have from == to.
struct Motion {
    int serial = 0;
    Loc from;
    Loc to;
    int instr = -1;  // index into the line, -1 when static
    bool removed = false;
    bool mixing = false;  // held by an active mixer at t+1

    bool operator==(const Motion&) const = default;
};

struct TickTransition {
    const TimedLine& line;
    const ChipState& before;  // tick-start snapshot, after mixer expiry
    const ChipState& after;
    std::vector<Motion> motions;
    std::vector<std::pair<Loc, int>> dispenses;  // (cell, instruction index)
};

using PinPhase = std::function<std::vector<Violation>(const TickTransition&)>;

struct StepOptions {
    bool stop_at_first = true;
    const std::vector<DetectorDecl>* detectors = nullptr;
    PinPhase pin_phase;
};

struct StepResult {
    ChipState next;
    std::vector<Violation> violations;
    std::vector<MixCompleted> completions;
    std::vector<Delivery> deliveries;
    std::vector<Motion> motions;
    bool fluidic_ok = true;
};

StepResult step(const ChipState& state, const TimedLine& line, const StepOptions& options = {});

struct TraceFrame {
    int t = 0;
    ChipState state;
};

struct Trace {
    ChipHeader header;
    std::vector<std::string> reagents;
    std::vector<MixCompleted> mixes;
    std::vector<Delivery> deliveries;
    std::vector<TraceFrame> frames;  // only when VerifyOptions::record_frames
    std::vector<std::string> unfinished;  // mixers still running at program end
    int final_t = 0;
    bool clean = true;
};

struct VerifyOptions {
    bool stop_at_first = true;
    bool record_frames = false;
    std::optional<int> t_max;  // overrides Program::t_max
    PinPhase pin_phase;
    std::string path_label;
};

struct Verification {
    Trace trace;
    Report report;
};

Verification verify_program(const Program& program, const VerifyOptions& options = {});

/// Structural problems (validate_structure) rendered as report rows.
std::vector<Violation> structural_violations(const Program& program);

}  // namespace dmfv
