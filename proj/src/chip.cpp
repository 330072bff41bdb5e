#include "dmfv/chip.hpp"

#include <algorithm>

namespace dmfv {

OutOfBounds::OutOfBounds(Loc loc) : std::out_of_range("cell " + to_string(loc) + " is outside the chip"), loc_(loc) {}

DoubleClaim::DoubleClaim(Loc loc, int t)
    : std::logic_error("cell " + to_string(loc) + " claimed twice at t=" + std::to_string(t)), loc_(loc), t_(t)
{
}

std::size_t OccupancyGrid::count() const
{
    return static_cast<std::size_t>(std::count_if(owner_.begin(), owner_.end(), [](int o) { return o != 0; }));
}

const Droplet* ChipState::droplet_at(Loc loc) const
{
    if (!grid.in_bounds(loc)) return nullptr;
    int o = grid.owner(loc);
    if (o <= 0) return nullptr;
    auto it = droplets.find(o);
    return it == droplets.end() ? nullptr : &it->second;
}

const MixerEntry* ChipState::mixer_holding(Loc loc) const
{
    for (const auto& m : mixers)
        if (m.a == loc || m.b == loc) return &m;
    return nullptr;
}

const DetectionEntry* ChipState::detection_holding(Loc loc) const
{
    for (const auto& d : detections)
        if (d.loc == loc) return &d;
    return nullptr;
}

int ChipState::reservoir_origin(const ReservoirDecl& r) const
{
    for (std::size_t i = 0; i < header.reservoirs.size(); ++i)
        if (header.reservoirs[i].loc == r.loc) return static_cast<int>(i) + 1;
    return 0;
}

ChipState init_state(const ChipHeader& header)
{
    ChipState s;
    s.header = header;
    s.grid = OccupancyGrid(header.rows, header.cols);
    s.reagents = header.reagent_names();
    s.next_origin = static_cast<int>(header.reservoirs.size()) + 1;
    return s;
}

bool occupied(const ChipState& state, Loc loc)
{
    if (!state.grid.in_bounds(loc)) throw OutOfBounds(loc);
    return state.grid.occupied(loc);
}

std::vector<Loc> neighbors4(int rows, int cols, Loc loc)
{
    if (loc.row < 1 || loc.row > rows || loc.col < 1 || loc.col > cols) throw OutOfBounds(loc);
    std::vector<Loc> out;
    const Loc cand[] = {{loc.row - 1, loc.col}, {loc.row, loc.col - 1}, {loc.row + 1, loc.col}, {loc.row, loc.col + 1}};
    for (auto c : cand)
        if (c.row >= 1 && c.row <= rows && c.col >= 1 && c.col <= cols) out.push_back(c);
    return out;
}

std::vector<Loc> neighbors8(int rows, int cols, Loc loc)
{
    if (loc.row < 1 || loc.row > rows || loc.col < 1 || loc.col > cols) throw OutOfBounds(loc);
    std::vector<Loc> out;
    for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
            if (!dr && !dc) continue;
            Loc c{loc.row + dr, loc.col + dc};
            if (c.row >= 1 && c.row <= rows && c.col >= 1 && c.col <= cols) out.push_back(c);
        }
    return out;
}

std::vector<Loc> neighbors4(const ChipHeader& h, Loc loc) { return neighbors4(h.rows, h.cols, loc); }
std::vector<Loc> neighbors8(const ChipHeader& h, Loc loc) { return neighbors8(h.rows, h.cols, loc); }

void claim_in_place(ChipState& s, Loc loc)
{
    if (!s.grid.in_bounds(loc)) throw OutOfBounds(loc);
    if (s.pending.count(loc)) throw DoubleClaim(loc, s.t);
    s.pending.insert(loc);
    if (!s.grid.occupied(loc)) s.grid.set_owner(loc, OccupancyGrid::kClaimed);
}

void release_in_place(ChipState& s, Loc loc)
{
    if (!s.grid.in_bounds(loc)) throw OutOfBounds(loc);
    if (s.pending.erase(loc)) {
        if (s.grid.owner(loc) == OccupancyGrid::kClaimed) s.grid.set_owner(loc, 0);
        return;
    }
    int o = s.grid.owner(loc);
    if (o > 0) s.droplets.erase(o);
    s.grid.set_owner(loc, 0);
}

ChipState claim(ChipState state, Loc loc)
{
    claim_in_place(state, loc);
    return state;
}

ChipState release(ChipState state, Loc loc)
{
    release_in_place(state, loc);
    return state;
}

int place_droplet(ChipState& s, Loc loc, int origin, CFVector cf)
{
    if (!s.grid.in_bounds(loc)) throw OutOfBounds(loc);
    int serial = s.next_serial++;
    s.droplets[serial] = Droplet{serial, origin, std::move(cf), loc, s.t};
    s.grid.set_owner(loc, serial);
    return serial;
}

Droplet remove_droplet(ChipState& s, Loc loc)
{
    int o = s.grid.owner(loc);
    auto it = s.droplets.find(o);
    if (o <= 0 || it == s.droplets.end()) throw std::logic_error("no droplet at " + to_string(loc));
    Droplet d = it->second;
    s.droplets.erase(it);
    s.grid.set_owner(loc, 0);
    return d;
}

void relocate_droplet(ChipState& s, Loc from, Loc to)
{
    int o = s.grid.owner(from);
    auto it = s.droplets.find(o);
    if (o <= 0 || it == s.droplets.end()) throw std::logic_error("no droplet at " + to_string(from));
    s.grid.set_owner(from, 0);
    it->second.loc = to;
    s.grid.set_owner(to, o);
}

std::vector<MixCompleted> expire_in_place(ChipState& s, int t)
{
    std::vector<MixCompleted> events;
    std::vector<MixerEntry> keep;
    for (const auto& m : s.mixers) {
        if (m.t_e > t) {
            keep.push_back(m);
            continue;
        }
        Droplet da = remove_droplet(s, m.a);
        Droplet db = remove_droplet(s, m.b);
        MixCompleted ev;
        ev.a = m.a;
        ev.b = m.b;
        ev.t_s = m.t_s;
        ev.t_e = m.t_e;
        ev.t_mix = m.t_mix;
        ev.mtype = m.mtype;
        ev.input_origin_a = da.origin;
        ev.input_origin_b = db.origin;
        ev.output_origin = s.next_origin++;
        ev.cf = cf_mix(da.cf, db.cf);
        const int saved_t = s.t;
        s.t = m.t_e;
        place_droplet(s, m.a, ev.output_origin, ev.cf);
        place_droplet(s, m.b, ev.output_origin, ev.cf);
        s.t = saved_t;
        events.push_back(std::move(ev));
    }
    s.mixers = std::move(keep);

    std::vector<DetectionEntry> active;
    for (const auto& d : s.detections) {
        if (d.t_e > t)
            active.push_back(d);
        else
            s.detection_done[d.detector] = d.t_e;
    }
    s.detections = std::move(active);
    return events;
}

std::pair<ChipState, std::vector<MixCompleted>> expire_mixers(ChipState state, int t)
{
    auto events = expire_in_place(state, t);
    return {std::move(state), std::move(events)};
}

std::string check_invariants(const ChipState& s)
{
    std::size_t owned = 0;
    for (int r = 1; r <= s.grid.rows(); ++r)
        for (int c = 1; c <= s.grid.cols(); ++c) {
            Loc l{r, c};
            int o = s.grid.owner(l);
            if (o > 0) {
                auto it = s.droplets.find(o);
                if (it == s.droplets.end()) return "grid owner " + std::to_string(o) + " at " + to_string(l) + " not registered";
                if (it->second.loc != l) return "droplet " + std::to_string(o) + " registered elsewhere";
                ++owned;
            } else if (o == OccupancyGrid::kClaimed && !s.pending.count(l)) {
                return "stale claim at " + to_string(l);
            }
        }
    if (owned != s.droplets.size()) return "registry has droplets missing from the grid";
    for (const auto& m : s.mixers) {
        if (m.t_s >= m.t_e) return "mixer with t_s >= t_e";
        if (!s.droplet_at(m.a) || !s.droplet_at(m.b)) return "mixer endpoint without droplet";
    }
    return {};
}

}  // namespace dmfv
