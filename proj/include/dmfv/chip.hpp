#pragma once

// Symbolic chip description B^t: occupancy grid, droplet registry,
// reservoir table and active mixer/detector tables.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dmfv/cf.hpp"
#include "dmfv/isa.hpp"

namespace dmfv {

class OutOfBounds : public std::out_of_range {
public:
    explicit OutOfBounds(Loc loc);
    Loc loc() const { return loc_; }

private:
    Loc loc_;
};

class DoubleClaim : public std::logic_error {
public:
    DoubleClaim(Loc loc, int t);
    Loc loc() const { return loc_; }
    int t() const { return t_; }

private:
    Loc loc_;
    int t_;
};

/// Cell owners: 0 = empty, > 0 = droplet serial, kClaimed = intra-tick claim.
class OccupancyGrid {
public:
    static constexpr int kClaimed = -1;

    OccupancyGrid() = default;
    OccupancyGrid(int rows, int cols) : rows_(rows), cols_(cols), owner_(static_cast<std::size_t>(rows) * cols, 0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool in_bounds(Loc l) const { return l.row >= 1 && l.row <= rows_ && l.col >= 1 && l.col <= cols_; }
    int owner(Loc l) const { return owner_[index(l)]; }
    void set_owner(Loc l, int v) { owner_[index(l)] = v; }
    bool occupied(Loc l) const { return owner(l) != 0; }
    /// Out-of-bounds cells read as unoccupied (walls hold no droplets).
    bool blocked(Loc l) const { return in_bounds(l) && occupied(l); }
    std::size_t count() const;

    bool operator==(const OccupancyGrid&) const = default;

private:
    std::size_t index(Loc l) const
    {
        return static_cast<std::size_t>(l.row - 1) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(l.col - 1);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> owner_;
};

struct Droplet {
    int serial = 0;  // unique per droplet instance
    int origin = 0;  // reservoir id or mix-node id
    CFVector cf;
    Loc loc;
    int born_at = 0;

    bool operator==(const Droplet&) const = default;
};

struct MixerEntry {
    Loc a;
    Loc b;
    int t_s = 0;
    int t_e = 0;
    int t_mix = 0;
    MixerType mtype = MixerType::H14;
    int serial_a = 0;
    int serial_b = 0;

    bool operator==(const MixerEntry&) const = default;
};

struct DetectionEntry {
    std::string detector;
    Loc loc;
    int serial = 0;
    int t_s = 0;
    int t_e = 0;  // droplet pinned for t_s <= t < t_e

    bool operator==(const DetectionEntry&) const = default;
};

struct MixCompleted {
    Loc a;
    Loc b;
    int t_s = 0;
    int t_e = 0;
    int t_mix = 0;
    MixerType mtype = MixerType::H14;
    int input_origin_a = 0;
    int input_origin_b = 0;
    int output_origin = 0;
    CFVector cf;

    bool operator==(const MixCompleted&) const = default;
};

struct ChipState {
    ChipHeader header;
    OccupancyGrid grid;
    int t = 0;
    std::map<int, Droplet> droplets;  // keyed by serial
    std::vector<MixerEntry> mixers;
    std::vector<DetectionEntry> detections;
    std::map<std::string, int> detection_done;  // detector id -> tick its last detection finished
    std::set<Loc> pending;
    std::vector<std::string> reagents;
    int next_serial = 1;
    int next_origin = 1;

    bool operator==(const ChipState&) const = default;

    const Droplet* droplet_at(Loc loc) const;
    const MixerEntry* mixer_holding(Loc loc) const;
    const DetectionEntry* detection_holding(Loc loc) const;
    /// Id of reservoir declaration i (1-based, declaration order).
    int reservoir_origin(const ReservoirDecl& r) const;
};

ChipState init_state(const ChipHeader& header);

bool occupied(const ChipState& state, Loc loc);
std::vector<Loc> neighbors4(const ChipHeader& header, Loc loc);
std::vector<Loc> neighbors8(const ChipHeader& header, Loc loc);
std::vector<Loc> neighbors4(int rows, int cols, Loc loc);
std::vector<Loc> neighbors8(int rows, int cols, Loc loc);

ChipState claim(ChipState state, Loc loc);
ChipState release(ChipState state, Loc loc);
void claim_in_place(ChipState& state, Loc loc);
void release_in_place(ChipState& state, Loc loc);

/// Adds a droplet owning `loc`; returns its serial.
int place_droplet(ChipState& state, Loc loc, int origin, CFVector cf);
/// Removes the droplet at `loc` from grid and registry and returns it.
Droplet remove_droplet(ChipState& state, Loc loc);
void relocate_droplet(ChipState& state, Loc from, Loc to);

std::pair<ChipState, std::vector<MixCompleted>> expire_mixers(ChipState state, int t);
std::vector<MixCompleted> expire_in_place(ChipState& state, int t);

/// Checks grid/registry agreement; returns an empty string when consistent.
std::string check_invariants(const ChipState& state);

}  // namespace dmfv
