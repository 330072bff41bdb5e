#include "dmfv/inject.hpp"

#include <algorithm>

#include "dmfv/chip.hpp"
#include "dmfv/fluidics.hpp"
#include "dmfv/graph.hpp"

namespace dmfv {

namespace {

TimedLine& line_at(Program& p, int t)
{
    auto it = std::lower_bound(p.main.begin(), p.main.end(), t, [](const TimedLine& l, int v) { return l.t < v; });
    if (it != p.main.end() && it->t == t) return *it;
    TimedLine fresh;
    fresh.t = t;
    return *p.main.insert(it, fresh);
}

/// Keeps `end` as the last instruction of the line it sits in.
void append(TimedLine& line, std::vector<Instruction> add)
{
    auto end_it = std::find_if(line.instrs.begin(), line.instrs.end(), [](const Instruction& i) { return i.is<op::End>(); });
    line.instrs.insert(end_it, add.begin(), add.end());
}

struct MixRef {
    std::size_t line = 0;
    std::size_t index = 0;
};

std::vector<MixRef> mixes(const Program& p)
{
    std::vector<MixRef> out;
    for (std::size_t l = 0; l < p.main.size(); ++l)
        for (std::size_t i = 0; i < p.main[l].instrs.size(); ++i)
            if (p.main[l].instrs[i].is<op::MixStart>()) out.push_back({l, i});
    return out;
}

MixRef pick_mix(const Program& p, std::optional<int> at, bool last)
{
    auto all = mixes(p);
    if (at) {
        for (const auto& m : all)
            if (p.main[m.line].t == *at) return m;
        throw MutationInapplicable("no mix at t=" + std::to_string(*at));
    }
    if (all.empty()) throw MutationInapplicable("program has no mix operation");
    return last ? all.back() : all.front();
}

Program insert_at(const Program& p, const InjectionSpec& s)
{
    if (!s.at || !s.insert) throw MutationInapplicable(s.code + " needs a timestamp and an instruction to insert");
    Program out = p;
    std::vector<Instruction> add;
    try {
        add = parse_instructions(*s.insert);
    } catch (const SyntaxError& e) {
        throw MutationInapplicable(std::string("cannot parse inserted instruction: ") + e.what());
    }
    if (!out.main.empty() && *s.at > out.main.back().t) throw MutationInapplicable("t=" + std::to_string(*s.at) + " is after the end");
    append(line_at(out, *s.at), std::move(add));
    return out;
}

Program wrong_reservoir(const Program& p)
{
    Program out = p;
    for (auto& line : out.main)
        for (auto& in : line.instrs) {
            if (!in.is<op::Dispense>()) continue;
            const Loc from = in.as<op::Dispense>().loc;
            for (auto n : neighbors4(out.header, from)) {
                if (out.header.reservoir_at(n)) continue;
                in.op = op::Dispense{n};
                return out;
            }
            throw MutationInapplicable("dispense at " + to_string(from) + " has no free neighbour");
        }
    throw MutationInapplicable("program has no dispense");
}

Program early_exit(const Program& p, const InjectionSpec& s)
{
    if (s.insert) return insert_at(p, s);
    const MixRef ref = pick_mix(p, s.at, true);
    const auto& mx = p.main[ref.line].instrs[ref.index].as<op::MixStart>();
    const int t = p.main[ref.line].t + 1;
    if (t >= p.main[ref.line].t + mx.t_mix + 1) throw MutationInapplicable("mix too short to leave early");
    Loc away{mx.a.row - (mx.b.row > mx.a.row) + (mx.b.row < mx.a.row), mx.a.col - (mx.b.col > mx.a.col) + (mx.b.col < mx.a.col)};
    if (!p.header.in_bounds(away)) throw MutationInapplicable("mixer endpoint " + to_string(mx.a) + " sits on the chip edge");
    Program out = p;
    append(line_at(out, t), {Instruction{op::Move{mx.a, away}}});
    return out;
}

Program early_mix(const Program& p, std::optional<int> at)
{
    const MixRef ref = pick_mix(p, at, false);
    if (ref.line == 0) throw MutationInapplicable("mix is already on the first line");
    Program out = p;
    Instruction mix = out.main[ref.line].instrs[ref.index];
    out.main[ref.line].instrs.erase(out.main[ref.line].instrs.begin() + static_cast<long>(ref.index));
    append(out.main[ref.line - 1], {mix});
    if (out.main[ref.line].instrs.empty()) out.main.erase(out.main.begin() + static_cast<long>(ref.line));
    return out;
}

Program short_mix(const Program& p, std::optional<int> at)
{
    const MixRef ref = pick_mix(p, at, true);
    Program out = p;
    auto mx = out.main[ref.line].instrs[ref.index].as<op::MixStart>();
    if (mx.t_mix < 2) throw MutationInapplicable("mixing time already minimal");
    mx.t_mix /= 2;
    out.main[ref.line].instrs[ref.index].op = mx;
    return out;
}

Program swap_reagents(const Program& p)
{
    auto reference = verify_program(p);
    if (!reference.report.passed()) throw MutationInapplicable("e7 needs a program that verifies cleanly");
    const SeqGraph ref_graph = reconstruct(reference.trace);
    const auto& rs = p.header.reservoirs;
    for (std::size_t i = 0; i < rs.size(); ++i)
        for (std::size_t j = i + 1; j < rs.size(); ++j) {
            if (rs[i].kind != ReservoirKind::Reagent || rs[j].kind != ReservoirKind::Reagent) continue;
            if (rs[i].reagent == rs[j].reagent) continue;
            Program out = p;
            std::swap(out.header.reservoirs[i].reagent, out.header.reservoirs[j].reagent);
            auto v = verify_program(out);
            if (!v.report.passed()) continue;
            SeqGraph g = reconstruct(v.trace);
            if (!conformance(ref_graph, g, p.header.accuracy, std::nullopt, v.trace.final_t).passed()) return out;
        }
    throw MutationInapplicable("no reagent swap changes the realized graph");
}

}  // namespace

Program inject(const Program& p, const InjectionSpec& s)
{
    if (p.main.empty() || (p.main.size() == 1 && p.main.front().instrs.size() <= 1))
        throw MutationInapplicable("assay has no operations to mutate");
    if (s.code == "e1" || s.code == "e2") return insert_at(p, s);
    if (s.code == "e3") return wrong_reservoir(p);
    if (s.code == "e4") return early_exit(p, s);
    if (s.code == "e5") return early_mix(p, s.at);
    if (s.code == "e6") return short_mix(p, s.at);
    if (s.code == "e7") return swap_reagents(p);
    throw MutationInapplicable("unknown error class '" + s.code + "'");
}

PinMap remap_pin(const PinMap& map, Loc cell, int pin)
{
    if (!map.in_bounds(cell)) throw MutationInapplicable("cell " + to_string(cell) + " is off the pin map");
    PinMap out = map;
    out.set(cell, pin);
    return out;
}

}  // namespace dmfv
