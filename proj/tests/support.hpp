#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "dmfv/graph.hpp"
#include "dmfv/isa.hpp"
#include "dmfv/pins.hpp"

namespace dmfv::testing {

inline std::string fixture_path(const std::string& name) { return std::string(DMFV_FIXTURES) + "/" + name; }

inline std::string read_fixture(const std::string& name)
{
    std::ifstream f(fixture_path(name));
    if (!f) throw std::runtime_error("missing fixture " + name);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline Program load_program(const std::string& name) { return parse_program(read_fixture(name)); }
inline SeqGraph load_graph(const std::string& name) { return parse_input_sg(read_fixture(name)); }
inline PinMap load_pins(const std::string& name) { return PinMap::parse(read_fixture(name)); }

/// Random straight-line program on a small chip: reagent reservoirs on the
/// left edge, waste/output on the right, droplets wander by 4-neighbour moves.
/// Programs are not guaranteed to be violation-free.
inline Program random_program(std::mt19937& rng, int rows, int cols, int ticks)
{
    Program p;
    p.header.rows = rows;
    p.header.cols = cols;
    p.header.accuracy = 5;
    for (int r = 1; r <= rows; r += 3) p.header.reservoirs.push_back({{r, 1}, ReservoirKind::Reagent, "R" + std::to_string(r)});
    p.header.reservoirs.push_back({{1, cols}, ReservoirKind::Waste, ""});
    p.header.reservoirs.push_back({{rows, cols}, ReservoirKind::Output, ""});

    std::vector<Loc> drops;
    std::uniform_int_distribution<int> pct(0, 99);
    const Loc dirs[] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    for (int t = 1; t <= ticks; ++t) {
        TimedLine line;
        line.t = t;
        std::vector<Loc> next;
        for (auto d : drops) {
            const int roll = pct(rng);
            const auto* res = p.header.reservoir_at(d);
            if (res && res->kind != ReservoirKind::Reagent && roll < 50) {
                line.instrs.push_back(res->kind == ReservoirKind::Waste ? Instruction{op::Waste{d}} : Instruction{op::Output{d}});
                continue;
            }
            if (roll < 60) {
                const Loc dd = dirs[rng() % 4];
                const Loc to{d.row + dd.row, d.col + dd.col};
                if (to.row >= 1 && to.row <= rows && to.col >= 1 && to.col <= cols) {
                    line.instrs.push_back(Instruction{op::Move{d, to}});
                    next.push_back(to);
                    continue;
                }
            }
            next.push_back(d);
        }
        if (pct(rng) < 35) {
            const auto& res = p.header.reservoirs[rng() % p.header.reservoirs.size()];
            if (res.kind == ReservoirKind::Reagent) {
                line.instrs.push_back(Instruction{op::Dispense{res.loc}});
                next.push_back(res.loc);
            }
        }
        drops = next;
        if (!line.instrs.empty()) p.main.push_back(std::move(line));
    }
    const int last = p.main.empty() ? 1 : p.main.back().t + 1;
    p.main.push_back(TimedLine{last, {Instruction{op::End{}}}, 0});
    return p;
}

}  // namespace dmfv::testing
