#pragma once

// Independent reference checks shared by the property suite and the acceptance runner.

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "dmfv/fluidics.hpp"
#include "dmfv/graph.hpp"
#include "dmfv/pins.hpp"
#include "support.hpp"

namespace dmfv::testing {

struct Outcome {
    bool ok = true;
    long samples = 0;
    std::string why;

    void fail(const std::string& w)
    {
        if (ok) why = w;
        ok = false;
    }
};

// Plain boolean grid; x(r,c) is false outside the chip.
struct Bits {
    int rows, cols;
    std::vector<char> v;
    bool x(int r, int c) const { return r >= 1 && r <= rows && c >= 1 && c <= cols && v[(r - 1) * cols + (c - 1)]; }
};

inline bool naive_static(const Bits& b, int i, int j)
{
    return !b.x(i - 1, j - 1) && !b.x(i - 1, j) && !b.x(i - 1, j + 1) && !b.x(i, j - 1) && !b.x(i, j + 1) &&
           !b.x(i + 1, j - 1) && !b.x(i + 1, j) && !b.x(i + 1, j + 1);
}

inline bool naive_dispense(const Bits& b, int i, int j) { return !b.x(i, j) && naive_static(b, i, j); }

inline bool naive_move(const Bits& b, int i, int j, int di, int dj)
{
    if (!b.x(i, j)) return false;
    if (di == 0) {
        const int c = j + 2 * dj;
        return !b.x(i - 1, c) && !b.x(i, c) && !b.x(i + 1, c);
    }
    const int r = i + 2 * di;
    return !b.x(r, j - 1) && !b.x(r, j) && !b.x(r, j + 1);
}

inline bool naive_mix_h(const Bits& b, int i, int j)
{
    if (!b.x(i, j) || !b.x(i, j + 3)) return false;
    for (int r = i - 1; r <= i + 1; ++r)
        for (int c : {j - 1, j, j + 1, j + 2, j + 3, j + 4})
            if ((r != i || (c != j && c != j + 3)) && b.x(r, c)) return false;
    return true;
}

inline std::pair<ChipState, Bits> random_state(std::mt19937& rng)
{
    std::uniform_int_distribution<int> dim(4, 8), pct(0, 99);
    ChipHeader h;
    h.rows = dim(rng);
    h.cols = dim(rng);
    h.accuracy = 4;
    for (int r = 1; r <= h.rows; ++r) h.reservoirs.push_back({{r, 1}, ReservoirKind::Reagent, "A" + std::to_string(r)});
    ChipState s = init_state(h);
    Bits b{h.rows, h.cols, std::vector<char>(h.rows * h.cols, 0)};
    const int density = std::uniform_int_distribution<int>(2, 25)(rng);
    for (int r = 1; r <= h.rows; ++r)
        for (int c = 1; c <= h.cols; ++c)
            if (pct(rng) < density) {
                place_droplet(s, {r, c}, 1, CFVector::unit(0, 1));
                b.v[(r - 1) * h.cols + (c - 1)] = 1;
            }
    return {s, b};
}

inline Outcome naive_formula_agreement(unsigned seed, int states)
{
    std::mt19937 rng(seed);
    Outcome o;
    const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
    for (int n = 0; n < states && o.ok; ++n) {
        auto [s, b] = random_state(rng);
        std::uniform_int_distribution<int> row(1, b.rows), col(1, b.cols), dir(0, 3);
        const int i = row(rng), j = col(rng);
        std::ostringstream at;
        at << "state " << n << " cell (" << i << "," << j << ")";
        if (static_fc(s, {i, j}) != naive_static(b, i, j)) o.fail("static " + at.str());
        if (check_dispense(s, {i, 1}).ok() != naive_dispense(b, i, 1)) o.fail("dispense " + at.str());
        const int k = dir(rng);
        const Loc dst{i + dr[k], j + dc[k]};
        if (s.header.in_bounds(dst) && check_move(s, {i, j}, dst).ok() != naive_move(b, i, j, dr[k], dc[k]))
            o.fail("move " + at.str());
        if (j + 3 <= b.cols && check_mix_start(s, {i, j}, {i, j + 3}, 4, MixerType::H14).ok() != naive_mix_h(b, i, j))
            o.fail("mix " + at.str());
        ++o.samples;
    }
    return o;
}

inline int chebyshev(Loc a, Loc b) { return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col)); }

/// samples = accepted ticks inspected
inline Outcome static_fc_invariant(unsigned seed, int programs)
{
    std::mt19937 rng(seed);
    Outcome o;
    for (int n = 0; n < programs && o.ok; ++n) {
        auto p = random_program(rng, 8, 8, 30);
        VerifyOptions vo;
        vo.record_frames = true;
        auto v = verify_program(p, vo);
        const int bad_t = v.report.violations.empty() ? 1 << 30 : v.report.violations.front().t;
        for (const auto& f : v.trace.frames) {
            if (f.t >= bad_t) break;
            ++o.samples;
            std::vector<Loc> at;
            for (const auto& [serial, d] : f.state.droplets) at.push_back(d.loc);
            for (std::size_t a = 0; a < at.size(); ++a)
                for (std::size_t b = a + 1; b < at.size(); ++b)
                    if (chebyshev(at[a], at[b]) < 2) o.fail("program " + std::to_string(n) + " t=" + std::to_string(f.t));
        }
    }
    return o;
}

/// samples = clean programs whose droplet balance was checked
inline Outcome occupancy_conservation(unsigned seed, int programs)
{
    std::mt19937 rng(seed);
    Outcome o;
    for (int n = 0; n < programs && o.ok; ++n) {
        auto p = random_program(rng, 8, 8, 25);
        VerifyOptions vo;
        vo.record_frames = true;
        auto v = verify_program(p, vo);
        for (const auto& f : v.trace.frames) {
            auto inv = check_invariants(f.state);
            if (!inv.empty()) o.fail(inv);
            if (f.state.grid.count() != f.state.droplets.size()) o.fail("grid count t=" + std::to_string(f.t));
        }
        if (!v.report.passed() || v.trace.frames.empty()) continue;
        ++o.samples;
        std::size_t dispensed = 0;
        for (const auto& l : p.main)
            for (const auto& ins : l.instrs) dispensed += ins.is<op::Dispense>();
        if (v.trace.frames.back().state.droplets.size() + v.trace.deliveries.size() != dispensed)
            o.fail("droplet balance, program " + std::to_string(n));
    }
    return o;
}

inline Outcome cf_sum_preservation(unsigned seed, int mixes)
{
    std::mt19937 rng(seed);
    Outcome o;
    std::vector<CFVector> pool;
    for (std::size_t k = 0; k < 4; ++k) pool.push_back(CFVector::unit(k, 4));
    for (int i = 0; i < mixes && o.ok; ++i) {
        auto m = cf_mix(pool[rng() % pool.size()], pool[rng() % pool.size()]);
        if (!m.sums_to_one()) o.fail("exact sum, mix " + std::to_string(i));
        for (int n : {3, 5, 8})
            if (!round_cf(m, n).sums_to_one()) o.fail("rounded sum, mix " + std::to_string(i));
        if (m.exp() < 20) pool.push_back(m);
        ++o.samples;
    }
    return o;
}

inline SeqGraph relabel(const SeqGraph& g, std::mt19937& rng)
{
    std::vector<std::size_t> perm(g.nodes.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    SeqGraph h;
    h.reagents = g.reagents;
    h.nodes.resize(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        h.nodes[perm[i]] = g.nodes[i];
        h.nodes[perm[i]].id = "q" + std::to_string(perm[i]) + "_" + g.nodes[i].id;
    }
    for (const auto& e : g.edges) h.edges.push_back({perm[e.from], perm[e.to]});
    std::shuffle(h.edges.begin(), h.edges.end(), rng);
    return h;
}

/// samples = graph comparisons
inline Outcome conformance_reflexive_relabel(unsigned seed, int relabels)
{
    std::mt19937 rng(seed);
    Outcome o;
    std::vector<SeqGraph> graphs;
    for (auto f : {"ratio_input.sg", "ratio_synth.sg", "pcr.sg", "twoway.sg", "recovery.sg"}) graphs.push_back(load_graph(f));
    for (auto f : {"pcr.dmf", "twoway.dmf"}) graphs.push_back(reconstruct(verify_program(load_program(f)).trace));
    for (int n = 0; n < 200 && graphs.size() < 60; ++n) {
        auto v = verify_program(random_program(rng, 8, 8, 25));
        if (v.report.passed()) graphs.push_back(reconstruct(v.trace));
    }
    for (std::size_t i = 0; i < graphs.size() && o.ok; ++i) {
        const auto& g = graphs[i];
        if (!conformance(g, g, 5, std::nullopt, 0).passed()) o.fail("reflexive, graph " + std::to_string(i));
        ++o.samples;
        for (int k = 0; k < relabels; ++k) {
            auto h = relabel(g, rng);
            if (!conformance(g, h, 5, std::nullopt, 0).passed() || !conformance(h, g, 5, std::nullopt, 0).passed())
                o.fail("relabel, graph " + std::to_string(i));
            o.samples += 2;
        }
    }
    return o;
}

/// samples = program runs compared
inline Outcome injective_pins_subsumed(unsigned seed, int programs)
{
    std::mt19937 rng(seed);
    Outcome o;
    for (int n = 0; n < programs && o.ok; ++n) {
        auto p = random_program(rng, 8, 8, 25);
        PinMap m(8, 8);
        std::vector<int> ids(64);
        std::iota(ids.begin(), ids.end(), 1);
        std::shuffle(ids.begin(), ids.end(), rng);
        for (int r = 1; r <= 8; ++r)
            for (int c = 1; c <= 8; ++c) m.set({r, c}, ids[(r - 1) * 8 + (c - 1)]);
        for (bool first : {true, false}) {
            VerifyOptions vo;
            vo.stop_at_first = first;
            if (verify_program(p, vo).report.violations != verify_program_pins(p, m, vo).report.violations)
                o.fail("program " + std::to_string(n));
            ++o.samples;
        }
    }
    for (auto f : {"pcr.dmf", "twoway.dmf", "mplex.dmf"}) {
        auto p = load_program(f);
        if (verify_program(p).report.violations !=
            verify_program_pins(p, PinMap::dedicated(p.header.rows, p.header.cols)).report.violations)
            o.fail(f);
        ++o.samples;
    }
    return o;
}

// Pin maps holding the electrode values quoted in the worked examples; other cells get unique pins.
inline PinMap sparse_pins(int rows, int cols, std::initializer_list<std::pair<Loc, int>> pins)
{
    PinMap m(rows, cols);
    int next = 100;
    for (int r = 1; r <= rows; ++r)
        for (int c = 1; c <= cols; ++c) m.set({r, c}, next++);
    for (auto [l, p] : pins) m.set(l, p);
    return m;
}

inline PinMap case1_pins() { return sparse_pins(5, 5, {{{3, 3}, 3}, {{3, 2}, 2}, {{3, 4}, 2}}); }
inline PinMap case2_pins() { return sparse_pins(6, 6, {{{2, 2}, 3}, {{4, 5}, 8}, {{5, 4}, 6}, {{6, 5}, 9}, {{5, 6}, 3}}); }
inline PinMap case2_next_pins() { return sparse_pins(6, 6, {{{2, 3}, 4}, {{4, 4}, 1}, {{5, 3}, 4}, {{6, 4}, 2}, {{5, 5}, 7}}); }
inline PinMap case3_pins()
{
    return sparse_pins(6, 6, {{{2, 3}, 4}, {{4, 5}, 8}, {{6, 5}, 9}, {{5, 6}, 4}, {{5, 4}, 7}, {{5, 5}, 6}});
}

// droplets at (3,3), (4,1), (5,4) on a 5x4 array
inline PinMap dispense_pins()
{
    return sparse_pins(5, 4, {{{2, 3}, 4}, {{3, 2}, 5}, {{4, 3}, 2}, {{3, 4}, 3},
                              {{3, 1}, 2}, {{5, 1}, 5}, {{4, 2}, 3},
                              {{4, 4}, 2}, {{5, 3}, 4},
                              {{2, 1}, 3}, {{1, 2}, 4},
                              {{1, 1}, 7}, {{1, 4}, 5},
                              {{3, 3}, 1}, {{4, 1}, 6}, {{5, 4}, 8}});
}

// droplets at (1,2), (4,1), (5,4)
inline PinMap move_pins()
{
    return sparse_pins(5, 4, {{{1, 2}, 9}, {{1, 1}, 10}, {{2, 2}, 7}, {{1, 3}, 4},
                              {{2, 3}, 5}, {{1, 4}, 2},
                              {{4, 1}, 6}, {{3, 1}, 5}, {{5, 1}, 8}, {{4, 2}, 7}});
}

inline const PinFinding* with_tag(const std::vector<PinFinding>& fs, const std::string& tag)
{
    for (const auto& f : fs)
        if (f.tag == tag) return &f;
    return nullptr;
}

}  // namespace dmfv::testing
