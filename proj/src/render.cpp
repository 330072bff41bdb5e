#include "dmfv/render.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace dmfv {

std::vector<Loc> mixer_cells(const MixerEntry& m)
{
    std::vector<Loc> out;
    const int dr = (m.b.row > m.a.row) - (m.b.row < m.a.row);
    const int dc = (m.b.col > m.a.col) - (m.b.col < m.a.col);
    for (Loc c = m.a;; c = {c.row + dr, c.col + dc}) {
        out.push_back(c);
        if (c == m.b || (dr == 0 && dc == 0)) break;
    }
    return out;
}

std::vector<Snapshot> replay(const Program& p, const PinMap* pins)
{
    VerifyOptions vo;
    vo.record_frames = true;
    vo.stop_at_first = true;
    Verification v = pins ? verify_program_pins(p, *pins, vo) : verify_program(p, vo);
    const auto& frames = v.trace.frames;
    std::vector<Snapshot> out;
    if (frames.empty()) return out;
    const int last_t = frames.back().t;
    std::size_t f = 0;
    for (int t = 0; t <= last_t; ++t) {
        while (f + 1 < frames.size() && frames[f + 1].t <= t) ++f;
        Snapshot s;
        s.t = t;
        s.state = frames[f].state;
        s.state.t = t;
        std::erase_if(s.state.mixers, [t](const MixerEntry& m) { return m.t_e <= t; });
        std::erase_if(s.state.detections, [t](const DetectionEntry& d) { return d.t_e <= t; });
        out.push_back(std::move(s));
    }
    if (!v.report.passed() && !out.empty()) out.back().violations = v.report.violations;
    return out;
}

Snapshot snapshot_at(const Program& p, int t, const PinMap* pins)
{
    auto all = replay(p, pins);
    if (t < 0 || static_cast<std::size_t>(t) >= all.size())
        throw std::out_of_range("t=" + std::to_string(t) + " is outside the replayed range 0.." + std::to_string(static_cast<int>(all.size()) - 1));
    return all[static_cast<std::size_t>(t)];
}

namespace {

enum class Glyph { Empty, Reservoir, Mixer, Detector, Droplet };

struct Cell {
    Glyph kind = Glyph::Empty;
    std::string text;
};

std::vector<std::vector<Cell>> layout(const Snapshot& s)
{
    const auto& h = s.state.header;
    std::vector<std::vector<Cell>> g(static_cast<std::size_t>(h.rows), std::vector<Cell>(static_cast<std::size_t>(h.cols)));
    auto at = [&](Loc l) -> Cell& { return g[static_cast<std::size_t>(l.row - 1)][static_cast<std::size_t>(l.col - 1)]; };
    for (const auto& r : h.reservoirs) {
        Cell& c = at(r.loc);
        c.kind = Glyph::Reservoir;
        c.text = r.kind == ReservoirKind::Reagent ? r.reagent.substr(0, 3) : (r.kind == ReservoirKind::Output ? "O" : "W");
    }
    for (const auto& d : s.state.detections) {
        at(d.loc).kind = Glyph::Detector;
        at(d.loc).text = "D";
    }
    for (const auto& m : s.state.mixers)
        for (auto c : mixer_cells(m)) {
            at(c).kind = Glyph::Mixer;
            at(c).text = "==";
        }
    for (const auto& [serial, d] : s.state.droplets) {
        at(d.loc).kind = Glyph::Droplet;
        at(d.loc).text = "@" + std::to_string(d.origin);
    }
    return g;
}

}  // namespace

std::string render_ascii(const Snapshot& s)
{
    const auto& h = s.state.header;
    auto g = layout(s);
    std::ostringstream out;
    out << "t=" << s.t << "  droplets=" << s.state.droplets.size() << "  mixers=" << s.state.mixers.size() << '\n';
    out << "    ";
    for (int c = 1; c <= h.cols; ++c) out << std::setw(4) << c;
    out << '\n';
    for (int r = 1; r <= h.rows; ++r) {
        out << std::setw(4) << r;
        for (int c = 1; c <= h.cols; ++c) {
            const Cell& cell = g[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(c - 1)];
            out << std::setw(4) << (cell.kind == Glyph::Empty ? "." : cell.text);
        }
        out << '\n';
    }
    for (const auto& v : s.violations)
        out << "!! " << code_name(v.code) << " t=" << v.t << " " << v.instruction << " : " << v.response << '\n';
    return out.str();
}

std::string render_svg(const Snapshot& s)
{
    const auto& h = s.state.header;
    constexpr int kCell = 32;
    const int w = h.cols * kCell + 2 * kCell;
    const int ht = h.rows * kCell + 3 * kCell;
    auto g = layout(s);
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << ht << "\" font-family=\"monospace\" font-size=\"11\">\n";
    out << "<text x=\"" << kCell << "\" y=\"" << kCell / 2 + 4 << "\">t=" << s.t << "</text>\n";
    for (int r = 1; r <= h.rows; ++r)
        for (int c = 1; c <= h.cols; ++c) {
            const Cell& cell = g[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(c - 1)];
            const int x = c * kCell;
            const int y = r * kCell;
            const char* fill = "#f4f4f4";
            if (cell.kind == Glyph::Reservoir) fill = "#d8e8ff";
            if (cell.kind == Glyph::Mixer) fill = "#ffe2b0";
            if (cell.kind == Glyph::Detector) fill = "#d9f2d9";
            out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\"" << kCell
                << "\" fill=\"" << fill << "\" stroke=\"#999\"/>\n";
            if (cell.kind == Glyph::Droplet)
                out << "<circle cx=\"" << x + kCell / 2 << "\" cy=\"" << y + kCell / 2 << "\" r=\"" << kCell / 2 - 3
                    << "\" fill=\"#4a7bd0\"/>\n";
            if (!cell.text.empty() && cell.kind != Glyph::Mixer)
                out << "<text x=\"" << x + 4 << "\" y=\"" << y + kCell / 2 + 4 << "\""
                    << (cell.kind == Glyph::Droplet ? " fill=\"#fff\"" : "") << ">" << cell.text << "</text>\n";
        }
    int y = (h.rows + 2) * kCell;
    for (const auto& v : s.violations) {
        out << "<text x=\"" << kCell << "\" y=\"" << y << "\" fill=\"#c00\">" << code_name(v.code) << " t=" << v.t << " "
            << v.instruction << "</text>\n";
        y += 14;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace dmfv
