#include "dmfv/fluidics.hpp"

#include <algorithm>
#include <cstdlib>

namespace dmfv {

namespace {

RawFailure failure(FailureKind kind, std::vector<Loc> cells, std::string detail = {})
{
    RawFailure f;
    f.kind = kind;
    f.cells = std::move(cells);
    f.detail = std::move(detail);
    return f;
}

bool adjacent4(Loc a, Loc b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col) == 1; }

bool consumed(const TickContext* ctx, Loc loc) { return ctx && ctx->consumed.count(loc); }

const Droplet* usable_droplet(const ChipState& s, Loc loc, const TickContext* ctx)
{
    if (consumed(ctx, loc)) return nullptr;
    return s.droplet_at(loc);
}

std::optional<RawFailure> pinned(const ChipState& s, Loc loc)
{
    if (s.mixer_holding(loc)) return failure(FailureKind::ActiveMixer, {loc});
    if (s.detection_holding(loc)) return failure(FailureKind::ActiveDetection, {loc});
    return std::nullopt;
}

Verdict check_delivery(const ChipState& s, Loc loc, ReservoirKind kind, const TickContext* ctx)
{
    const ReservoirDecl* r = s.header.reservoir_at(loc);
    if (!r || r->kind != kind)
        return Verdict::fail(failure(kind == ReservoirKind::Waste ? FailureKind::InvalidWasteReservoir
                                                                  : FailureKind::InvalidOutputReservoir,
                                     {loc}));
    if (!usable_droplet(s, loc, ctx)) return Verdict::fail(failure(FailureKind::MissingDroplets, {loc}));
    if (auto p = pinned(s, loc)) return Verdict::fail(*p);
    return Verdict::pass();
}

}  // namespace

bool static_fc(const ChipState& state, Loc loc)
{
    for (auto n : neighbors8(state.header, loc))
        if (state.grid.occupied(n)) return false;
    return true;
}

std::vector<Loc> dynamic_cells(Loc src, Loc dst)
{
    const int dr = dst.row - src.row;
    const int dc = dst.col - src.col;
    const Loc ahead{dst.row + dr, dst.col + dc};
    // perpendicular spread: swap the axis of travel
    const int pr = dc != 0 ? 1 : 0;
    const int pc = dr != 0 ? 1 : 0;
    return {{ahead.row - pr, ahead.col - pc}, ahead, {ahead.row + pr, ahead.col + pc}};
}

std::vector<Loc> dispense_cells(const ChipHeader& header, Loc loc)
{
    auto cells = neighbors8(header, loc);
    cells.insert(cells.begin(), loc);
    return cells;
}

bool mixer_geometry_ok(Loc a, Loc b, MixerType mtype)
{
    switch (mtype) {
    case MixerType::H14: return a.row == b.row && std::abs(a.col - b.col) == 3;
    case MixerType::V41: return a.col == b.col && std::abs(a.row - b.row) == 3;
    }
    return false;
}

Verdict check_dispense(const ChipState& s, Loc loc)
{
    if (!s.header.in_bounds(loc)) return Verdict::fail(failure(FailureKind::Structure, {loc}, "cell out of bounds"));
    const ReservoirDecl* r = s.header.reservoir_at(loc);
    if (!r || r->kind != ReservoirKind::Reagent)
        return Verdict::fail(failure(FailureKind::InvalidReagentReservoir, {loc}, to_string(loc) + " is not a reagent reservoir"));
    if (s.pending.count(loc)) return Verdict::fail(failure(FailureKind::DoubleClaim, {loc}, "second dispense on " + to_string(loc)));
    std::vector<Loc> hits;
    for (auto c : dispense_cells(s.header, loc))
        if (s.grid.occupied(c)) hits.push_back(c);
    if (!hits.empty()) return Verdict::fail(failure(FailureKind::StaticFC, hits));
    return Verdict::pass();
}

Verdict check_move(const ChipState& s, Loc src, Loc dst, const TickContext* ctx)
{
    if (!s.header.in_bounds(src) || !s.header.in_bounds(dst) || !adjacent4(src, dst))
        return Verdict::fail(failure(FailureKind::Structure, {src, dst}, "move is not to a 4-neighbour"));
    if (!usable_droplet(s, src, ctx)) return Verdict::fail(failure(FailureKind::MissingDroplets, {src}));
    if (auto p = pinned(s, src)) return Verdict::fail(*p);
    if (s.pending.count(dst)) return Verdict::fail(failure(FailureKind::DoubleClaim, {dst}, "second droplet routed to " + to_string(dst)));

    std::vector<Loc> hits;
    bool stationary = false;
    for (auto c : dynamic_cells(src, dst)) {
        if (!s.grid.blocked(c)) continue;
        hits.push_back(c);
        const bool arriving = s.grid.owner(c) == OccupancyGrid::kClaimed;
        const bool departing = ctx && ctx->leaving.count(c);
        if (ctx && !arriving && !departing) stationary = true;
    }
    if (hits.empty()) return Verdict::pass();
    return Verdict::fail(failure(stationary ? FailureKind::StaticFC : FailureKind::DynamicFC, hits));
}

Verdict check_mix_start(const ChipState& s, Loc a, Loc b, int t_mix, MixerType mtype, const TickContext* ctx)
{
    if (!s.header.in_bounds(a) || !s.header.in_bounds(b))
        return Verdict::fail(failure(FailureKind::Structure, {a, b}, "mixer outside the chip"));
    if (t_mix < 1) return Verdict::fail(failure(FailureKind::Structure, {a, b}, "mixing time must be positive"));
    if (!mixer_geometry_ok(a, b, mtype)) return Verdict::fail(failure(FailureKind::MixerGeometry, {a, b}));
    std::vector<Loc> missing;
    for (auto c : {a, b})
        if (!usable_droplet(s, c, ctx)) missing.push_back(c);
    if (!missing.empty()) return Verdict::fail(failure(FailureKind::MissingDroplets, missing));
    for (auto c : {a, b})
        if (auto p = pinned(s, c)) return Verdict::fail(*p);
    std::vector<Loc> hits;
    for (auto c : {a, b})
        for (auto n : neighbors8(s.header, c))
            if (s.grid.occupied(n) && n != a && n != b) hits.push_back(n);
    if (!hits.empty()) return Verdict::fail(failure(FailureKind::StaticFC, hits));
    return Verdict::pass();
}

Verdict check_waste(const ChipState& s, Loc loc, const TickContext* ctx)
{
    return check_delivery(s, loc, ReservoirKind::Waste, ctx);
}

Verdict check_output(const ChipState& s, Loc loc, const TickContext* ctx)
{
    return check_delivery(s, loc, ReservoirKind::Output, ctx);
}

Verdict check_detect(const ChipState& s, const DetectorDecl& det, const TickContext* ctx)
{
    for (const auto& d : s.detections)
        if (d.detector == det.id) return Verdict::fail(failure(FailureKind::DetectorBusy, {det.loc}, "detector " + det.id));
    if (!s.header.in_bounds(det.loc)) return Verdict::fail(failure(FailureKind::Structure, {det.loc}, "detector outside the chip"));
    if (!usable_droplet(s, det.loc, ctx))
        return Verdict::fail(failure(FailureKind::MissingDroplets, {det.loc}, "no droplet at detector " + det.id));
    if (s.mixer_holding(det.loc)) return Verdict::fail(failure(FailureKind::ActiveMixer, {det.loc}));
    return Verdict::pass();
}

Verdict check_cond_call(const ChipState& s, const DetectorDecl& det)
{
    for (const auto& d : s.detections)
        if (d.detector == det.id)
            return Verdict::fail(failure(FailureKind::DetectionIncomplete, {det.loc},
                                         "detector " + det.id + " busy until t=" + std::to_string(d.t_e)));
    if (!s.detection_done.count(det.id))
        return Verdict::fail(failure(FailureKind::DetectionIncomplete, {det.loc}, "detector " + det.id + " never started"));
    return Verdict::pass();
}

Verdict active_mixer_guard(const ChipState& s)
{
    for (const auto& m : s.mixers) {
        std::vector<Loc> hits;
        for (auto c : {m.a, m.b})
            for (auto n : neighbors8(s.header, c))
                if (s.grid.occupied(n) && n != m.a && n != m.b) hits.push_back(n);
        if (!hits.empty()) {
            std::sort(hits.begin(), hits.end());
            hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
            auto f = failure(FailureKind::StaticFC, hits,
                             "mixer " + to_string(m.a) + "-" + to_string(m.b) + " started at t=" + std::to_string(m.t_s));
            return Verdict::fail(f);
        }
    }
    return Verdict::pass();
}

// ---------------------------------------------------------------------------
// Stepper

namespace {

std::string culprit_text(const TimedLine& line, const std::vector<int>& idx)
{
    std::string out;
    for (int i : idx) {
        if (!out.empty()) out += ' ';
        out += to_compact_text(line.instrs[static_cast<std::size_t>(i)]);
    }
    return out;
}

void stamp(Violation& v, const TimedLine& line, std::vector<int> culprits)
{
    std::sort(culprits.begin(), culprits.end());
    culprits.erase(std::unique(culprits.begin(), culprits.end()), culprits.end());
    v.t = line.t;
    v.instruction = culprit_text(line, culprits);
    v.line = line.line;
    if (!culprits.empty()) {
        const auto& ins = line.instrs[static_cast<std::size_t>(culprits.front())];
        if (ins.line) v.line = ins.line;
    }
}

const DetectorDecl* find_detector(const StepOptions& opt, const std::string& id)
{
    if (!opt.detectors) return nullptr;
    for (const auto& d : *opt.detectors)
        if (d.id == id) return &d;
    return nullptr;
}

}  // namespace

StepResult step(const ChipState& state, const TimedLine& line, const StepOptions& opt)
{
    StepResult res;
    ChipState snap = state;
    res.completions = expire_in_place(snap, line.t);
    snap.t = line.t;
    snap.pending.clear();

    const std::size_t n = line.instrs.size();
    TickContext ctx;
    std::map<Loc, int> leaving_by;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& op = line.instrs[i].op;
        if (auto* m = std::get_if<op::Move>(&op)) leaving_by.emplace(m->src, static_cast<int>(i));
        else if (auto* w = std::get_if<op::Waste>(&op)) leaving_by.emplace(w->loc, static_cast<int>(i));
        else if (auto* o = std::get_if<op::Output>(&op)) leaving_by.emplace(o->loc, static_cast<int>(i));
    }
    for (const auto& [loc, i] : leaving_by) ctx.leaving.insert(loc);

    ChipState cur = snap;
    std::map<Loc, int> claim_by;
    std::vector<char> ok(n, 0);

    for (std::size_t i = 0; i < n; ++i) {
        const Instruction& ins = line.instrs[i];
        Verdict v;
        std::vector<int> culprits{static_cast<int>(i)};
        std::visit(
            [&](const auto& o) {
                using T = std::decay_t<decltype(o)>;
                if constexpr (std::is_same_v<T, op::Dispense>) {
                    v = check_dispense(cur, o.loc);
                    if (v.ok()) {
                        claim_in_place(cur, o.loc);
                        claim_by[o.loc] = static_cast<int>(i);
                    }
                } else if constexpr (std::is_same_v<T, op::Move>) {
                    v = check_move(cur, o.src, o.dst, &ctx);
                    if (v.ok()) {
                        ctx.consumed.insert(o.src);
                        claim_in_place(cur, o.dst);
                        claim_by[o.dst] = static_cast<int>(i);
                    } else if (v.violation->code == ErrorCode::E2) {
                        for (auto c : v.violation->cells) {
                            if (auto it = claim_by.find(c); it != claim_by.end()) culprits.push_back(it->second);
                            if (auto it = leaving_by.find(c); it != leaving_by.end()) culprits.push_back(it->second);
                        }
                    }
                } else if constexpr (std::is_same_v<T, op::MixStart>) {
                    v = check_mix_start(cur, o.a, o.b, o.t_mix, o.mtype, &ctx);
                    if (v.ok()) {
                        ctx.consumed.insert(o.a);
                        ctx.consumed.insert(o.b);
                    }
                } else if constexpr (std::is_same_v<T, op::Waste>) {
                    v = check_waste(cur, o.loc, &ctx);
                    if (v.ok()) ctx.consumed.insert(o.loc);
                } else if constexpr (std::is_same_v<T, op::Output>) {
                    v = check_output(cur, o.loc, &ctx);
                    if (v.ok()) ctx.consumed.insert(o.loc);
                } else if constexpr (std::is_same_v<T, op::DetectStart>) {
                    const DetectorDecl* det = find_detector(opt, o.detector);
                    if (!det) {
                        v = Verdict::fail(failure(FailureKind::Structure, {}, "undeclared detector " + o.detector));
                    } else {
                        v = check_detect(cur, *det, &ctx);
                        if (v.ok()) ctx.consumed.insert(det->loc);
                    }
                } else if constexpr (std::is_same_v<T, op::CondCall>) {
                    const DetectorDecl* det = find_detector(opt, o.detector);
                    if (!det) v = Verdict::fail(failure(FailureKind::Structure, {}, "undeclared detector " + o.detector));
                    else v = check_cond_call(cur, *det);
                } else {
                    v = Verdict::pass();
                }
            },
            ins.op);

        if (v.ok()) {
            ok[i] = 1;
            continue;
        }
        Violation viol = *v.violation;
        stamp(viol, line, culprits);
        res.violations.push_back(std::move(viol));
        res.fluidic_ok = false;
        if (opt.stop_at_first) {
            res.next = snap;
            return res;
        }
    }

    // Commit all accepted effects together.
    ChipState next = snap;
    std::map<Loc, int> placed_by;
    std::vector<std::pair<Droplet, int>> lifted;  // droplet with destination already set, instr index
    std::vector<std::pair<Loc, int>> dispenses;
    std::map<int, Motion> motion_of;
    for (const auto& [serial, d] : snap.droplets) motion_of[serial] = Motion{serial, d.loc, d.loc, -1, false, false};

    for (std::size_t i = 0; i < n; ++i) {
        if (!ok[i]) continue;
        const auto& op = line.instrs[i].op;
        if (auto* m = std::get_if<op::Move>(&op)) {
            Droplet d = remove_droplet(next, m->src);
            motion_of[d.serial].to = m->dst;
            motion_of[d.serial].instr = static_cast<int>(i);
            d.loc = m->dst;
            lifted.emplace_back(std::move(d), static_cast<int>(i));
        } else if (auto* w = std::get_if<op::Waste>(&op)) {
            Droplet d = remove_droplet(next, w->loc);
            motion_of[d.serial].removed = true;
            motion_of[d.serial].instr = static_cast<int>(i);
            res.deliveries.push_back(Delivery{ReservoirKind::Waste, w->loc, next.reservoir_origin(*next.header.reservoir_at(w->loc)),
                                              d.origin, d.cf, line.t});
        } else if (auto* o = std::get_if<op::Output>(&op)) {
            Droplet d = remove_droplet(next, o->loc);
            motion_of[d.serial].removed = true;
            motion_of[d.serial].instr = static_cast<int>(i);
            res.deliveries.push_back(Delivery{ReservoirKind::Output, o->loc, next.reservoir_origin(*next.header.reservoir_at(o->loc)),
                                              d.origin, d.cf, line.t});
        }
    }
    for (auto& [d, i] : lifted) {
        if (next.grid.occupied(d.loc)) {
            // Only reachable when an earlier accepted tick already left droplets adjacent.
            RawFailure f = failure(FailureKind::StaticFC, {d.loc}, "droplets merge on " + to_string(d.loc));
            Violation v = classify(f);
            stamp(v, line, {i});
            res.violations.push_back(v);
            res.fluidic_ok = false;
            Loc back = motion_of[d.serial].from;
            d.loc = back;
            motion_of[d.serial].to = back;
            motion_of[d.serial].instr = -1;
        } else {
            placed_by[d.loc] = i;
        }
        next.grid.set_owner(d.loc, d.serial);
        next.droplets[d.serial] = d;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!ok[i]) continue;
        const auto& op = line.instrs[i].op;
        if (auto* d = std::get_if<op::Dispense>(&op)) {
            if (next.grid.occupied(d->loc)) {
                Violation v = classify(failure(FailureKind::StaticFC, {d->loc}, "dispense onto occupied cell"));
                stamp(v, line, {static_cast<int>(i)});
                res.violations.push_back(v);
                res.fluidic_ok = false;
                continue;
            }
            const ReservoirDecl* r = next.header.reservoir_at(d->loc);
            auto it = std::find(next.reagents.begin(), next.reagents.end(), r->reagent);
            auto idx = static_cast<std::size_t>(it - next.reagents.begin());
            place_droplet(next, d->loc, next.reservoir_origin(*r), CFVector::unit(idx, next.reagents.size()));
            placed_by[d->loc] = static_cast<int>(i);
            dispenses.emplace_back(d->loc, static_cast<int>(i));
        } else if (auto* m = std::get_if<op::MixStart>(&op)) {
            MixerEntry e;
            e.a = m->a;
            e.b = m->b;
            e.t_s = line.t;
            e.t_e = line.t + m->t_mix + 1;
            e.t_mix = m->t_mix;
            e.mtype = m->mtype;
            e.serial_a = next.grid.owner(m->a);
            e.serial_b = next.grid.owner(m->b);
            next.mixers.push_back(e);
        } else if (auto* ds = std::get_if<op::DetectStart>(&op)) {
            const DetectorDecl* det = find_detector(opt, ds->detector);
            next.detections.push_back(DetectionEntry{det->id, det->loc, next.grid.owner(det->loc), line.t, line.t + det->duration});
        }
    }
    next.pending.clear();

    // Global static fluidic constraint on the resulting configuration.
    std::vector<std::pair<int, Violation>> global;
    for (const auto& [serial, d] : next.droplets) {
        for (auto nb : neighbors8(next.header, d.loc)) {
            int other = next.grid.owner(nb);
            if (other <= serial) continue;
            std::vector<int> culprits;
            if (auto it = placed_by.find(d.loc); it != placed_by.end()) culprits.push_back(it->second);
            if (auto it = placed_by.find(nb); it != placed_by.end()) culprits.push_back(it->second);
            if (culprits.empty()) continue;
            Violation v = classify(failure(FailureKind::StaticFC, {d.loc, nb}));
            const int first = *std::min_element(culprits.begin(), culprits.end());
            stamp(v, line, culprits);
            global.emplace_back(first, std::move(v));
        }
    }
    std::stable_sort(global.begin(), global.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [first, v] : global) {
        res.violations.push_back(std::move(v));
        res.fluidic_ok = false;
        if (opt.stop_at_first) break;
    }

    for (auto& [serial, m] : motion_of) {
        if (!m.removed) m.mixing = next.mixer_holding(m.to) != nullptr;
        res.motions.push_back(m);
    }

    if (res.fluidic_ok && opt.pin_phase) {
        TickTransition tr{line, snap, next, res.motions, dispenses};
        auto pv = opt.pin_phase(tr);
        if (opt.stop_at_first && pv.size() > 1) pv.resize(1);
        for (auto& v : pv) res.violations.push_back(std::move(v));
    }

    if (opt.stop_at_first && !res.violations.empty() && res.violations.size() > 1) res.violations.resize(1);
    res.next = std::move(next);
    return res;
}

std::vector<Violation> structural_violations(const Program& p)
{
    std::vector<Violation> out;
    for (const auto& e : validate_structure(p)) {
        RawFailure f = failure(FailureKind::Structure, {}, e.message());
        Violation v = classify(f);
        v.line = e.line;
        v.response = std::string(to_string(e.kind)) + ": " + e.detail;
        for (const auto& tl : p.main)
            if (tl.line == e.line) v.t = tl.t;
        out.push_back(std::move(v));
    }
    return out;
}

Verification verify_program(const Program& p, const VerifyOptions& opt)
{
    Verification out;
    Trace& tr = out.trace;
    Report& rep = out.report;
    tr.header = p.header;
    tr.reagents = p.header.reagent_names();
    rep.path = opt.path_label;

    auto structural = structural_violations(p);
    if (!structural.empty()) {
        for (auto& v : structural) v.path = opt.path_label;
        rep.violations = std::move(structural);
        rep.completed = false;
        tr.clean = false;
        return out;
    }

    ChipState s = init_state(p.header);
    if (opt.record_frames) tr.frames.push_back({0, s});
    StepOptions so;
    so.stop_at_first = opt.stop_at_first;
    so.detectors = &p.detectors;
    so.pin_phase = opt.pin_phase;

    int first_bad_t = -1;
    for (const auto& line : p.main) {
        StepResult r = step(s, line, so);
        for (auto& c : r.completions) tr.mixes.push_back(std::move(c));
        for (auto& d : r.deliveries) tr.deliveries.push_back(std::move(d));
        for (auto& v : r.violations) {
            v.path = opt.path_label;
            if (first_bad_t >= 0 && line.t > first_bad_t) v.secondary = true;
            rep.violations.push_back(std::move(v));
        }
        if (!r.violations.empty()) {
            tr.clean = false;
            if (first_bad_t < 0) first_bad_t = line.t;
        }
        tr.final_t = line.t;
        if (opt.stop_at_first && !r.violations.empty()) {
            rep.completed = false;
            rep.final_t = line.t;
            if (opt.record_frames) tr.frames.push_back({line.t, r.next});
            return out;
        }
        s = std::move(r.next);
        if (opt.record_frames) tr.frames.push_back({line.t, s});
    }
    rep.final_t = tr.final_t;
    for (const auto& m : s.mixers) {
        std::string note = "mixer " + to_string(m.a) + "-" + to_string(m.b) + " started at t=" + std::to_string(m.t_s) +
                           " still active at end (completes t=" + std::to_string(m.t_e) + ")";
        tr.unfinished.push_back(note);
        rep.notes.push_back(note);
    }

    std::optional<int> t_max = opt.t_max ? opt.t_max : p.t_max;
    if (t_max && tr.final_t > *t_max) {
        RawFailure f = failure(FailureKind::TmaxExceeded, {},
                               "completes at t=" + std::to_string(tr.final_t) + " > " + std::to_string(*t_max));
        Violation v = classify(f);
        v.t = tr.final_t;
        v.path = opt.path_label;
        rep.violations.push_back(v);
    }
    return out;
}

}  // namespace dmfv
