#include "dmfv/isa.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <set>
#include <sstream>

namespace dmfv {

std::string to_string(Loc loc)
{
    return "(" + std::to_string(loc.row) + "," + std::to_string(loc.col) + ")";
}

std::vector<std::string> ChipHeader::reagent_names() const
{
    std::vector<std::string> names;
    for (const auto& r : reservoirs) {
        if (r.kind == ReservoirKind::Reagent &&
            std::find(names.begin(), names.end(), r.reagent) == names.end()) {
            names.push_back(r.reagent);
        }
    }
    return names;
}

const ReservoirDecl* ChipHeader::reservoir_at(Loc loc) const
{
    for (const auto& r : reservoirs) {
        if (r.loc == loc) return &r;
    }
    return nullptr;
}

const DetectorDecl* Program::detector(std::string_view id) const
{
    for (const auto& d : detectors) {
        if (d.id == id) return &d;
    }
    return nullptr;
}

SyntaxError::SyntaxError(int line, int col, std::string expected)
    : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(col) +
                         ": expected " + expected),
      line_(line), col_(col), expected_(std::move(expected))
{
}

std::string_view to_string(SemanticErrorKind kind)
{
    switch (kind) {
    case SemanticErrorKind::BadDimensions: return "BadDimensions";
    case SemanticErrorKind::BadAccuracy: return "BadAccuracy";
    case SemanticErrorKind::NoReagentReservoir: return "NoReagentReservoir";
    case SemanticErrorKind::DuplicateReservoir: return "DuplicateReservoir";
    case SemanticErrorKind::DuplicateDetector: return "DuplicateDetector";
    case SemanticErrorKind::BadDetectorDuration: return "BadDetectorDuration";
    case SemanticErrorKind::NonMonotonicTime: return "NonMonotonicTime";
    case SemanticErrorKind::NegativeTime: return "NegativeTime";
    case SemanticErrorKind::UndeclaredDetector: return "UndeclaredDetector";
    case SemanticErrorKind::UndeclaredRecovery: return "UndeclaredRecovery";
    case SemanticErrorKind::NestedConditional: return "NestedConditional";
    case SemanticErrorKind::OutOfBounds: return "OutOfBounds";
    case SemanticErrorKind::NotAdjacent: return "NotAdjacent";
    case SemanticErrorKind::BadMixDuration: return "BadMixDuration";
    case SemanticErrorKind::MisplacedEnd: return "MisplacedEnd";
    }
    return "?";
}

std::string SemanticError::message() const
{
    std::string msg = std::string(to_string(kind)) + "(" + detail + ")";
    if (line > 0) msg += " at line " + std::to_string(line);
    return msg;
}

namespace {

std::string join_messages(const std::vector<SemanticError>& errors)
{
    std::string out;
    for (const auto& e : errors) {
        if (!out.empty()) out += "; ";
        out += e.message();
    }
    return out;
}

}  // namespace

SemanticErrors::SemanticErrors(std::vector<SemanticError> errors)
    : std::runtime_error(join_messages(errors)), errors_(std::move(errors))
{
}

// ---------------------------------------------------------------------------
// Text forms

namespace {

std::string loc_pair(Loc l) { return std::to_string(l.row) + "," + std::to_string(l.col); }

struct ArrowPrinter {
    std::string operator()(const op::Dispense& o) const { return "d(" + loc_pair(o.loc) + ")"; }
    std::string operator()(const op::Move& o) const
    {
        return "m([" + loc_pair(o.src) + "]->[" + loc_pair(o.dst) + "])";
    }
    std::string operator()(const op::MixStart& o) const
    {
        return "mix([" + loc_pair(o.a) + "]<->[" + loc_pair(o.b) + "]," + std::to_string(o.t_mix) +
               "," + std::to_string(static_cast<int>(o.mtype)) + ")";
    }
    std::string operator()(const op::Waste& o) const { return "waste(" + loc_pair(o.loc) + ")"; }
    std::string operator()(const op::Output& o) const { return "output(" + loc_pair(o.loc) + ")"; }
    std::string operator()(const op::DetectStart& o) const { return "detect(" + o.detector + ")"; }
    std::string operator()(const op::CondCall& o) const
    {
        return "if(" + o.detector + ") call Recovery(" + o.recovery + ")";
    }
    std::string operator()(const op::End&) const { return "end"; }
};

struct CompactPrinter : ArrowPrinter {
    using ArrowPrinter::operator();
    std::string operator()(const op::Move& o) const
    {
        return "m(" + loc_pair(o.src) + "," + loc_pair(o.dst) + ")";
    }
    std::string operator()(const op::MixStart& o) const
    {
        return "mix(" + loc_pair(o.a) + "," + loc_pair(o.b) + "," + std::to_string(o.t_mix) + "," +
               std::to_string(static_cast<int>(o.mtype)) + ")";
    }
};

}  // namespace

std::string to_arrow_text(const Instruction& instr) { return std::visit(ArrowPrinter{}, instr.op); }
std::string to_compact_text(const Instruction& instr) { return std::visit(CompactPrinter{}, instr.op); }

// ---------------------------------------------------------------------------
// Reader

namespace {

bool is_ident_char(char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '.' || c == '-';
}

class Cursor {
public:
    Cursor(std::string_view text, int line) : s_(text), line_(line) {}

    void skip_ws()
    {
        while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r')) ++i_;
    }
    bool eof()
    {
        skip_ws();
        return i_ >= s_.size();
    }
    bool at_ws_or_end() const
    {
        return i_ >= s_.size() || s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r';
    }
    int col() const { return static_cast<int>(i_) + 1; }
    int line() const { return line_; }

    bool peek(std::string_view lit)
    {
        skip_ws();
        return s_.substr(i_, lit.size()) == lit;
    }
    bool consume(std::string_view lit)
    {
        if (!peek(lit)) return false;
        i_ += lit.size();
        return true;
    }
    void expect(std::string_view lit)
    {
        if (!consume(lit)) fail("'" + std::string(lit) + "'");
    }

    int integer(const char* what = "integer")
    {
        skip_ws();
        std::size_t start = i_;
        if (i_ < s_.size() && s_[i_] == '-') ++i_;
        while (i_ < s_.size() && s_[i_] >= '0' && s_[i_] <= '9') ++i_;
        int value = 0;
        const char* first = s_.data() + start;
        const char* last = s_.data() + i_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (start == i_ || ec != std::errc{} || ptr != last) {
            i_ = start;
            fail(what);
        }
        return value;
    }

    std::string ident(const char* what = "identifier")
    {
        skip_ws();
        std::size_t start = i_;
        while (i_ < s_.size() && is_ident_char(s_[i_])) ++i_;
        if (start == i_) fail(what);
        return std::string(s_.substr(start, i_ - start));
    }

    // Letters only; used for instruction keywords so `d(` splits cleanly.
    std::string keyword()
    {
        skip_ws();
        std::size_t start = i_;
        while (i_ < s_.size() && ((s_[i_] >= 'a' && s_[i_] <= 'z') || (s_[i_] >= 'A' && s_[i_] <= 'Z'))) ++i_;
        if (start == i_) fail("instruction");
        return std::string(s_.substr(start, i_ - start));
    }

    [[noreturn]] void fail(std::string expected) const { throw SyntaxError(line_, col(), std::move(expected)); }

private:
    std::string_view s_;
    std::size_t i_ = 0;
    int line_;
};

Loc bracket_loc(Cursor& cur)
{
    cur.expect("[");
    Loc l;
    l.row = cur.integer("row");
    cur.expect(",");
    l.col = cur.integer("column");
    cur.expect("]");
    return l;
}

Loc plain_loc(Cursor& cur)
{
    Loc l;
    l.row = cur.integer("row");
    cur.expect(",");
    l.col = cur.integer("column");
    return l;
}

MixerType mixer_type(Cursor& cur)
{
    cur.skip_ws();
    if (cur.consume("H14") || cur.consume("h14")) return MixerType::H14;
    if (cur.consume("V41") || cur.consume("v41")) return MixerType::V41;
    int v = cur.integer("mixer type 14 or 41");
    if (v == 14) return MixerType::H14;
    if (v == 41) return MixerType::V41;
    cur.fail("mixer type 14 or 41");
}

void expect_arrow(Cursor& cur)
{
    if (cur.consume("->") || cur.consume("\xE2\x86\x92")) return;
    cur.fail("'->'");
}

void expect_bidir(Cursor& cur)
{
    if (cur.consume("<->") || cur.consume("\xE2\x86\x94")) return;
    cur.fail("'<->'");
}

Instruction read_instruction(Cursor& cur)
{
    cur.skip_ws();
    Instruction instr;
    instr.line = cur.line();
    instr.col = cur.col();
    std::string kw = cur.keyword();

    if (kw == "end") {
        instr.op = op::End{};
    } else if (kw == "d") {
        cur.expect("(");
        instr.op = op::Dispense{plain_loc(cur)};
        cur.expect(")");
    } else if (kw == "m") {
        cur.expect("(");
        op::Move mv;
        if (cur.peek("[")) {
            mv.src = bracket_loc(cur);
            expect_arrow(cur);
            mv.dst = bracket_loc(cur);
        } else {
            mv.src = plain_loc(cur);
            cur.expect(",");
            mv.dst = plain_loc(cur);
        }
        cur.expect(")");
        instr.op = mv;
    } else if (kw == "mix") {
        cur.expect("(");
        op::MixStart mx;
        if (cur.peek("[")) {
            mx.a = bracket_loc(cur);
            expect_bidir(cur);
            mx.b = bracket_loc(cur);
        } else {
            mx.a = plain_loc(cur);
            cur.expect(",");
            mx.b = plain_loc(cur);
        }
        cur.expect(",");
        mx.t_mix = cur.integer("mixing time");
        cur.expect(",");
        mx.mtype = mixer_type(cur);
        cur.expect(")");
        instr.op = mx;
    } else if (kw == "waste") {
        cur.expect("(");
        instr.op = op::Waste{plain_loc(cur)};
        cur.expect(")");
    } else if (kw == "output") {
        cur.expect("(");
        instr.op = op::Output{plain_loc(cur)};
        cur.expect(")");
    } else if (kw == "detect") {
        cur.expect("(");
        instr.op = op::DetectStart{cur.ident("detector id")};
        cur.expect(")");
    } else if (kw == "if") {
        cur.expect("(");
        op::CondCall cc;
        cc.detector = cur.ident("detector id");
        cur.expect(")");
        cur.expect("call");
        if (!cur.consume("Recovery") && !cur.consume("recovery")) cur.fail("'Recovery'");
        cur.expect("(");
        cc.recovery = cur.ident("recovery id");
        cur.expect(")");
        instr.op = cc;
    } else {
        cur.fail("instruction (d, m, mix, waste, output, detect, if, end)");
    }
    if (!cur.at_ws_or_end()) cur.fail("whitespace between instructions");
    return instr;
}

TimedLine read_timed_line(Cursor& cur)
{
    TimedLine tl;
    tl.line = cur.line();
    tl.t = cur.integer("timestamp");
    if (!cur.at_ws_or_end()) cur.fail("whitespace after timestamp");
    while (!cur.eof()) tl.instrs.push_back(read_instruction(cur));
    if (tl.instrs.empty()) cur.fail("at least one instruction");
    return tl;
}

}  // namespace

std::vector<Instruction> parse_instructions(std::string_view text)
{
    Cursor cur(text, 1);
    std::vector<Instruction> out;
    while (!cur.eof()) out.push_back(read_instruction(cur));
    if (out.empty()) cur.fail("at least one instruction");
    return out;
}

namespace {

void read_header_line(Cursor& cur, Program& prog, bool& have_dim, bool& have_acc)
{
    while (!cur.eof()) {
        std::string kw = cur.keyword();
        if (kw == "dim") {
            if (cur.consume("(")) {
                prog.header.rows = cur.integer("rows");
                cur.expect(",");
                prog.header.cols = cur.integer("columns");
                cur.expect(")");
            } else {
                prog.header.rows = cur.integer("rows");
                prog.header.cols = cur.integer("columns");
            }
            have_dim = true;
        } else if (kw == "accuracy") {
            prog.header.accuracy = cur.integer("accuracy");
            have_acc = true;
        } else if (kw == "tmax") {
            prog.t_max = cur.integer("tmax");
        } else if (kw == "R") {
            cur.expect("(");
            ReservoirDecl r;
            r.loc = plain_loc(cur);
            cur.expect(",");
            r.reagent = cur.ident("reagent name");
            cur.expect(")");
            r.kind = ReservoirKind::Reagent;
            prog.header.reservoirs.push_back(r);
        } else if (kw == "O" || kw == "W") {
            cur.expect("(");
            ReservoirDecl r;
            r.loc = plain_loc(cur);
            cur.expect(")");
            r.kind = kw == "O" ? ReservoirKind::Output : ReservoirKind::Waste;
            prog.header.reservoirs.push_back(r);
        } else if (kw == "D") {
            cur.expect("(");
            DetectorDecl d;
            d.id = cur.ident("detector id");
            cur.expect(",");
            d.loc = plain_loc(cur);
            cur.expect(",");
            d.duration = cur.integer("detection duration");
            cur.expect(")");
            prog.detectors.push_back(d);
        } else {
            cur.fail("header item (dim, accuracy, tmax, R, O, W, D)");
        }
        if (!cur.at_ws_or_end()) cur.fail("whitespace between header items");
    }
}

std::string_view strip_comment(std::string_view line)
{
    auto hash = line.find('#');
    return hash == std::string_view::npos ? line : line.substr(0, hash);
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool starts_with_digit(std::string_view s) { return !s.empty() && s.front() >= '0' && s.front() <= '9'; }

}  // namespace

Program parse_program_unchecked(std::string_view text)
{
    Program prog;
    bool have_dim = false;
    bool have_acc = false;
    bool in_body = false;
    std::optional<std::string> recovery;
    int recovery_line = 0;
    int lineno = 0;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;

        std::string_view line = trim(strip_comment(raw));
        if (line.empty()) continue;
        Cursor cur(line, lineno);

        if (recovery) {
            if (line == "endrecovery") {
                recovery.reset();
                continue;
            }
            if (!starts_with_digit(line)) cur.fail("timed line or 'endrecovery'");
            prog.recoveries[*recovery].push_back(read_timed_line(cur));
            continue;
        }
        if (line.rfind("recovery", 0) == 0) {
            cur.expect("recovery");
            std::string id = cur.ident("recovery id");
            cur.expect(":");
            if (!cur.eof()) cur.fail("end of line after recovery label");
            if (prog.recoveries.count(id)) throw SyntaxError(lineno, 1, "unique recovery id");
            prog.recoveries[id];
            recovery = id;
            recovery_line = lineno;
            in_body = true;
            continue;
        }
        if (starts_with_digit(line)) {
            if (!have_dim || !have_acc) cur.fail("'dim' and 'accuracy' header before instructions");
            in_body = true;
            prog.main.push_back(read_timed_line(cur));
            continue;
        }
        if (in_body) cur.fail("timed line (header items must precede instructions)");
        read_header_line(cur, prog, have_dim, have_acc);
    }
    if (recovery) throw SyntaxError(recovery_line, 1, "'endrecovery'");
    if (!have_dim) throw SyntaxError(lineno, 1, "'dim' header");
    if (!have_acc) throw SyntaxError(lineno, 1, "'accuracy' header");
    return prog;
}

Program parse_program(std::string_view text)
{
    Program prog = parse_program_unchecked(text);
    std::vector<SemanticError> fatal;
    for (auto& e : validate_structure(prog)) {
        switch (e.kind) {
        case SemanticErrorKind::DuplicateReservoir:
        case SemanticErrorKind::DuplicateDetector:
        case SemanticErrorKind::NonMonotonicTime:
        case SemanticErrorKind::UndeclaredDetector:
        case SemanticErrorKind::UndeclaredRecovery:
            fatal.push_back(std::move(e));
            break;
        default:
            break;
        }
    }
    if (!fatal.empty()) throw SemanticErrors(std::move(fatal));
    return prog;
}

// ---------------------------------------------------------------------------
// Writer

namespace {

void write_lines(std::ostringstream& out, const std::vector<TimedLine>& lines)
{
    for (const auto& tl : lines) {
        out << tl.t;
        for (const auto& in : tl.instrs) out << ' ' << to_arrow_text(in);
        out << '\n';
    }
}

}  // namespace

std::string serialize_program(const Program& p)
{
    std::ostringstream out;
    out << "dim(" << p.header.rows << "," << p.header.cols << ")\n";
    out << "accuracy " << p.header.accuracy << "\n";
    if (p.t_max) out << "tmax " << *p.t_max << "\n";
    bool first = true;
    for (const auto& r : p.header.reservoirs) {
        if (!first) out << ' ';
        first = false;
        switch (r.kind) {
        case ReservoirKind::Reagent: out << "R(" << loc_pair(r.loc) << "," << r.reagent << ")"; break;
        case ReservoirKind::Output: out << "O(" << loc_pair(r.loc) << ")"; break;
        case ReservoirKind::Waste: out << "W(" << loc_pair(r.loc) << ")"; break;
        }
    }
    if (!p.header.reservoirs.empty()) out << '\n';
    if (!p.detectors.empty()) {
        first = true;
        for (const auto& d : p.detectors) {
            if (!first) out << ' ';
            first = false;
            out << "D(" << d.id << "," << loc_pair(d.loc) << "," << d.duration << ")";
        }
        out << '\n';
    }
    write_lines(out, p.main);
    for (const auto& [id, lines] : p.recoveries) {
        out << "recovery " << id << ":\n";
        write_lines(out, lines);
        out << "endrecovery\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Structural validation

namespace {

constexpr long kMaxCells = 1L << 22;

bool adjacent4(Loc a, Loc b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col) == 1; }

class Validator {
public:
    explicit Validator(const Program& p) : p_(p) {}

    std::vector<SemanticError> run()
    {
        const auto& h = p_.header;
        if (h.rows < 1 || h.cols < 1 || static_cast<long>(h.rows) * h.cols > kMaxCells) {
            add(SemanticErrorKind::BadDimensions, 0, std::to_string(h.rows) + "x" + std::to_string(h.cols));
        }
        if (h.accuracy < 1 || h.accuracy > 62) add(SemanticErrorKind::BadAccuracy, 0, std::to_string(h.accuracy));

        bool reagent = false;
        std::set<Loc> seen;
        for (const auto& r : h.reservoirs) {
            reagent |= r.kind == ReservoirKind::Reagent;
            if (!seen.insert(r.loc).second) add(SemanticErrorKind::DuplicateReservoir, 0, to_string(r.loc));
            bounds(r.loc, 0);
        }
        if (!reagent) add(SemanticErrorKind::NoReagentReservoir, 0, "");

        std::set<std::string> ids;
        for (const auto& d : p_.detectors) {
            if (!ids.insert(d.id).second) add(SemanticErrorKind::DuplicateDetector, 0, d.id);
            if (d.duration < 1) add(SemanticErrorKind::BadDetectorDuration, 0, d.id);
            bounds(d.loc, 0);
        }

        timeline(p_.main, false);
        for (const auto& [id, lines] : p_.recoveries) timeline(lines, true);
        return std::move(errors_);
    }

private:
    void add(SemanticErrorKind kind, int line, std::string detail)
    {
        errors_.push_back(SemanticError{kind, line, std::move(detail)});
    }

    void bounds(Loc l, int line)
    {
        if (!p_.header.in_bounds(l)) add(SemanticErrorKind::OutOfBounds, line, to_string(l));
    }

    void timeline(const std::vector<TimedLine>& lines, bool in_recovery)
    {
        std::optional<int> prev;
        for (std::size_t li = 0; li < lines.size(); ++li) {
            const auto& tl = lines[li];
            if (tl.t < 0) add(SemanticErrorKind::NegativeTime, tl.line, std::to_string(tl.t));
            if (prev && tl.t <= *prev) add(SemanticErrorKind::NonMonotonicTime, tl.line, std::to_string(tl.t));
            prev = tl.t;
            for (std::size_t k = 0; k < tl.instrs.size(); ++k) {
                const auto& in = tl.instrs[k];
                const bool last = !in_recovery && li + 1 == lines.size() && k + 1 == tl.instrs.size();
                instruction(in, tl.line, in_recovery, last);
            }
        }
    }

    void instruction(const Instruction& in, int line, bool in_recovery, bool last_of_program)
    {
        std::visit(
            [&](const auto& o) {
                using T = std::decay_t<decltype(o)>;
                if constexpr (std::is_same_v<T, op::Dispense> || std::is_same_v<T, op::Waste> ||
                              std::is_same_v<T, op::Output>) {
                    bounds(o.loc, line);
                } else if constexpr (std::is_same_v<T, op::Move>) {
                    bounds(o.src, line);
                    bounds(o.dst, line);
                    if (!adjacent4(o.src, o.dst))
                        add(SemanticErrorKind::NotAdjacent, line, to_string(o.src) + "->" + to_string(o.dst));
                } else if constexpr (std::is_same_v<T, op::MixStart>) {
                    bounds(o.a, line);
                    bounds(o.b, line);
                    if (o.t_mix < 1) add(SemanticErrorKind::BadMixDuration, line, std::to_string(o.t_mix));
                } else if constexpr (std::is_same_v<T, op::DetectStart>) {
                    if (!p_.detector(o.detector)) add(SemanticErrorKind::UndeclaredDetector, line, o.detector);
                } else if constexpr (std::is_same_v<T, op::CondCall>) {
                    if (!p_.detector(o.detector)) add(SemanticErrorKind::UndeclaredDetector, line, o.detector);
                    if (!p_.recoveries.count(o.recovery))
                        add(SemanticErrorKind::UndeclaredRecovery, line, o.recovery);
                    if (in_recovery) add(SemanticErrorKind::NestedConditional, line, o.recovery);
                } else if constexpr (std::is_same_v<T, op::End>) {
                    if (!last_of_program) add(SemanticErrorKind::MisplacedEnd, line, "");
                }
            },
            in.op);
    }

    const Program& p_;
    std::vector<SemanticError> errors_;
};

}  // namespace

std::vector<SemanticError> validate_structure(const Program& program) { return Validator(program).run(); }

}  // namespace dmfv
