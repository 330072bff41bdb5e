#include "dmfv/pins.hpp"

#include <algorithm>
#include <charconv>
#include <memory>
#include <sstream>

#include <omp.h>

namespace dmfv {

PinMap::PinMap(int rows, int cols, int fill)
    : rows_(rows), cols_(cols), pins_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill)
{
    if (rows < 1 || cols < 1) throw PinMapError("pin map dimensions must be positive");
}

PinMap PinMap::dedicated(int rows, int cols)
{
    PinMap m(rows, cols);
    for (int r = 1; r <= rows; ++r)
        for (int c = 1; c <= cols; ++c) m.set({r, c}, (r - 1) * cols + c);
    return m;
}

PinMap PinMap::parse(std::string_view text)
{
    std::vector<std::vector<int>> rows;
    std::size_t lineno = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++lineno;
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        std::vector<int> row;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == ',')) ++i;
            if (i >= line.size()) break;
            int v = 0;
            auto [p, ec] = std::from_chars(line.data() + i, line.data() + line.size(), v);
            if (ec != std::errc{} || v < 1)
                throw PinMapError("line " + std::to_string(lineno) + ": expected a positive pin number");
            i = static_cast<std::size_t>(p - line.data());
            if (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != ',')
                throw PinMapError("line " + std::to_string(lineno) + ": unexpected character");
            row.push_back(v);
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw PinMapError("empty pin map");
    const auto cols = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != cols) throw PinMapError("pin map rows have different lengths");
    PinMap m(static_cast<int>(rows.size()), static_cast<int>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c) m.set({static_cast<int>(r) + 1, static_cast<int>(c) + 1}, rows[r][c]);
    return m;
}

std::string PinMap::serialize() const
{
    std::ostringstream out;
    for (int r = 1; r <= rows_; ++r) {
        for (int c = 1; c <= cols_; ++c) {
            if (c > 1) out << ' ';
            out << pin({r, c});
        }
        out << '\n';
    }
    return out.str();
}

int PinMap::pin(Loc l) const
{
    if (!in_bounds(l)) throw OutOfBounds(l);
    return pins_[static_cast<std::size_t>(l.row - 1) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(l.col - 1)];
}

void PinMap::set(Loc l, int pin)
{
    if (!in_bounds(l)) throw OutOfBounds(l);
    pins_[static_cast<std::size_t>(l.row - 1) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(l.col - 1)] = pin;
}

std::set<int> pins_of(const PinMap& map, const std::vector<Loc>& cells)
{
    std::set<int> out;
    for (auto c : cells) out.insert(map.pin(c));
    return out;
}

std::vector<Loc> n4(const PinMap& map, Loc loc) { return neighbors4(map.rows(), map.cols(), loc); }

namespace {

std::vector<Loc> without(std::vector<Loc> cells, Loc drop)
{
    cells.erase(std::remove(cells.begin(), cells.end(), drop), cells.end());
    return cells;
}

/// Pin({single}) vs Pin(region); records the electrodes that carry the shared pin.
std::optional<PinFinding> single_vs_region(const PinMap& map, const std::string& tag, Loc single,
                                           const std::vector<Loc>& region)
{
    const int p = map.pin(single);
    PinFinding f;
    f.tag = tag;
    for (auto c : region)
        if (map.pin(c) == p) f.cells.push_back(c);
    if (f.cells.empty()) return std::nullopt;
    f.shared.insert(p);
    f.cells.insert(f.cells.begin(), single);
    return f;
}

Loc behind(Loc from, Loc to) { return {from.row - (to.row - from.row), from.col - (to.col - from.col)}; }

}  // namespace

std::vector<PinFinding> case1_findings(const PinMap& map, Loc droplet)
{
    std::vector<PinFinding> out;
    auto nb = n4(map, droplet);
    for (std::size_t i = 0; i < nb.size(); ++i)
        for (std::size_t j = i + 1; j < nb.size(); ++j)
            if (map.pin(nb[i]) == map.pin(nb[j])) {
                PinFinding f;
                f.tag = "1";
                f.shared.insert(map.pin(nb[i]));
                f.cells = {nb[i], nb[j]};
                out.push_back(std::move(f));
            }
    return out;
}

std::vector<PinFinding> pair_findings(const PinMap& map, Loc d1_t, Loc d1_t1, Loc d2_t, Loc d2_t1, bool include_t)
{
    std::vector<PinFinding> out;
    auto add = [&](std::optional<PinFinding> f) {
        if (f) out.push_back(std::move(*f));
    };
    if (include_t) {
        add(single_vs_region(map, "2a", d1_t, n4(map, d2_t)));
        add(single_vs_region(map, "2b", d2_t, n4(map, d1_t)));
    }
    add(single_vs_region(map, "2c", d1_t1, n4(map, d2_t1)));
    add(single_vs_region(map, "2d", d2_t1, n4(map, d1_t1)));

    const bool m1 = d1_t != d1_t1;
    const bool m2 = d2_t != d2_t1;
    if (!m1 && !m2) return out;
    // Simultaneous moves onto electrodes of one pin are allowed.
    if (m1 && m2 && map.pin(d1_t1) == map.pin(d2_t1)) return out;

    if (auto f = single_vs_region(map, "3a", d1_t1, without(n4(map, d2_t), d2_t1))) {
        if (m2 && std::find(f->cells.begin() + 1, f->cells.end(), behind(d2_t, d2_t1)) != f->cells.end()) f->stuck = d2_t;
        out.push_back(std::move(*f));
    }
    if (auto f = single_vs_region(map, "3b", d2_t1, without(n4(map, d1_t), d1_t1))) {
        if (m1 && std::find(f->cells.begin() + 1, f->cells.end(), behind(d1_t, d1_t1)) != f->cells.end()) f->stuck = d1_t;
        out.push_back(std::move(*f));
    }
    return out;
}

std::vector<PinFinding> dispense_findings(const PinMap& map, const std::vector<Loc>& droplets, Loc loc)
{
    std::vector<PinFinding> out;
    for (auto d : droplets)
        if (auto f = single_vs_region(map, "dispense", loc, n4(map, d))) out.push_back(std::move(*f));
    if (auto f = single_vs_region(map, "dispense", loc, n4(map, loc))) out.push_back(std::move(*f));
    return out;
}

namespace {

RawFailure to_failure(const PinFinding& f)
{
    RawFailure r;
    r.pin_case = f.tag;
    r.pins.assign(f.shared.begin(), f.shared.end());
    r.cells = f.cells;
    r.stuck = f.stuck;
    if (f.tag == "1") r.kind = FailureKind::PinSplit;
    else if (f.tag == "dispense") r.kind = FailureKind::PinDispenseStretch;
    else if (f.stuck) r.kind = FailureKind::PinStuck;
    else r.kind = FailureKind::PinStretch;
    r.detail = "case " + f.tag;
    return r;
}

std::string assignment_text(const PinMap& map, const std::vector<Loc>& cells)
{
    std::string out;
    std::set<Loc> seen;
    for (auto c : cells) {
        if (!seen.insert(c).second) continue;
        if (!out.empty()) out += ' ';
        out += "Pin(" + to_string(c) + ")=" + std::to_string(map.pin(c));
    }
    return out;
}

Violation to_violation(const PinMap& map, const PinFinding& f)
{
    Violation v = classify(to_failure(f));
    v.pin_assignment = assignment_text(map, f.cells);
    return v;
}

}  // namespace

Verdict check_case1(const PinMap& map, Loc droplet)
{
    auto fs = case1_findings(map, droplet);
    if (fs.empty()) return Verdict::pass();
    return {to_violation(map, fs.front())};
}

Verdict check_pair(const PinMap& map, Loc d1_t, Loc d1_t1, Loc d2_t, Loc d2_t1)
{
    auto fs = pair_findings(map, d1_t, d1_t1, d2_t, d2_t1, true);
    if (fs.empty()) return Verdict::pass();
    return {to_violation(map, fs.front())};
}

Verdict check_dispense_pins(const PinMap& map, const ChipState& state, Loc loc)
{
    std::vector<Loc> drops;
    for (const auto& [serial, d] : state.droplets) drops.push_back(d.loc);
    auto fs = dispense_findings(map, drops, loc);
    if (fs.empty()) return Verdict::pass();
    return {to_violation(map, fs.front())};
}

// ---------------------------------------------------------------------------
// Pair kernels

namespace {

std::vector<const Motion*> participants(const std::vector<Motion>& motions)
{
    std::vector<const Motion*> out;
    for (const auto& m : motions)
        if (!m.mixing) out.push_back(&m);
    return out;
}

Loc final_loc(const Motion& m) { return m.removed ? m.from : m.to; }

}  // namespace

std::size_t pair_check_count(const std::vector<Motion>& motions)
{
    const std::size_t k = participants(motions).size();
    return k < 2 ? 0 : k * (k - 1) / 2;
}

std::vector<PairHit> pair_kernel_serial(const PinMap& map, const std::vector<Motion>& motions)
{
    auto ps = participants(motions);
    std::vector<PairHit> out;
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j)
            for (auto& f : pair_findings(map, ps[i]->from, final_loc(*ps[i]), ps[j]->from, final_loc(*ps[j]), false))
                out.push_back(PairHit{i, j, std::move(f)});
    return out;
}

std::vector<PairHit> pair_kernel_parallel(const PinMap& map, const std::vector<Motion>& motions)
{
    auto ps = participants(motions);
    const auto k = static_cast<long long>(ps.size());
    std::vector<std::vector<PairHit>> per_row(ps.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (long long i = 0; i < k; ++i) {
        auto& row = per_row[static_cast<std::size_t>(i)];
        for (long long j = i + 1; j < k; ++j) {
            const Motion& a = *ps[static_cast<std::size_t>(i)];
            const Motion& b = *ps[static_cast<std::size_t>(j)];
            for (auto& f : pair_findings(map, a.from, final_loc(a), b.from, final_loc(b), false))
                row.push_back(PairHit{static_cast<std::size_t>(i), static_cast<std::size_t>(j), std::move(f)});
        }
    }
    std::vector<PairHit> out;
    for (auto& row : per_row)
        for (auto& h : row) out.push_back(std::move(h));
    return out;
}

// ---------------------------------------------------------------------------
// Stepper hook

namespace {

void stamp(Violation& v, const TimedLine& line, std::vector<int> idx)
{
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    idx.erase(std::remove(idx.begin(), idx.end(), -1), idx.end());
    v.t = line.t;
    v.line = line.line;
    std::string text;
    for (int i : idx) {
        if (!text.empty()) text += ' ';
        text += to_compact_text(line.instrs[static_cast<std::size_t>(i)]);
    }
    v.instruction = text;
    if (!idx.empty() && line.instrs[static_cast<std::size_t>(idx.front())].line)
        v.line = line.instrs[static_cast<std::size_t>(idx.front())].line;
}

}  // namespace

PinPhase make_pin_phase(const PinMap& map, PinOptions options)
{
    auto seen = std::make_shared<std::set<std::string>>();
    return [map, options, seen](const TickTransition& tr) {
        std::vector<Violation> out;
        auto keep = [&](Violation v) {
            // a configuration that persists over several ticks is reported once
            std::string key = std::string(code_name(v.code)) + v.pin_assignment + v.response + "|" + v.instruction;
            if (!seen->insert(key).second) return;
            out.push_back(std::move(v));
        };

        std::vector<Loc> before_locs;
        for (const auto& [serial, d] : tr.before.droplets) before_locs.push_back(d.loc);
        for (const auto& [loc, i] : tr.dispenses)
            for (const auto& f : dispense_findings(map, before_locs, loc)) {
                Violation v = to_violation(map, f);
                stamp(v, tr.line, {i});
                keep(std::move(v));
            }

        for (const auto& m : tr.motions) {
            if (m.removed) continue;
            for (const auto& f : case1_findings(map, m.to)) {
                Violation v = to_violation(map, f);
                stamp(v, tr.line, {m.instr});
                keep(std::move(v));
            }
        }
        for (const auto& [loc, i] : tr.dispenses)
            for (const auto& f : case1_findings(map, loc)) {
                Violation v = to_violation(map, f);
                stamp(v, tr.line, {i});
                keep(std::move(v));
            }

        std::vector<const Motion*> ps;
        for (const auto& m : tr.motions)
            if (!m.mixing) ps.push_back(&m);
        auto hits = options.parallel ? pair_kernel_parallel(map, tr.motions) : pair_kernel_serial(map, tr.motions);
        for (const auto& h : hits) {
            Violation v = to_violation(map, h.finding);
            stamp(v, tr.line, {ps[h.i]->instr, ps[h.j]->instr});
            keep(std::move(v));
        }
        return out;
    };
}

Verification verify_program_pins(const Program& program, const PinMap& map, const VerifyOptions& options,
                                 PinOptions pin_options)
{
    if (map.rows() != program.header.rows || map.cols() != program.header.cols)
        throw PinMapError("pin map is " + std::to_string(map.rows()) + "x" + std::to_string(map.cols()) + ", chip is " +
                          std::to_string(program.header.rows) + "x" + std::to_string(program.header.cols));
    VerifyOptions opt = options;
    opt.pin_phase = make_pin_phase(map, pin_options);
    return verify_program(program, opt);
}

}  // namespace dmfv
