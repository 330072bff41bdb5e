#pragma once

// Fluidic instruction set: chip header, timed instruction lines, detector
// declarations and recovery blocks, plus the `.dmf` text reader/writer.

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dmfv {

/// 1-based grid coordinate (row, col).
struct Loc {
    int row = 0;
    int col = 0;

    auto operator<=>(const Loc&) const = default;
};

std::string to_string(Loc loc);  // "(r,c)"

enum class ReservoirKind { Reagent, Output, Waste };

struct ReservoirDecl {
    Loc loc;
    ReservoirKind kind = ReservoirKind::Reagent;
    std::string reagent;  // empty unless kind == Reagent

    bool operator==(const ReservoirDecl&) const = default;
};

struct ChipHeader {
    int rows = 0;
    int cols = 0;
    int accuracy = 0;
    std::vector<ReservoirDecl> reservoirs;

    bool in_bounds(Loc loc) const
    {
        return loc.row >= 1 && loc.row <= rows && loc.col >= 1 && loc.col <= cols;
    }
    /// Distinct reagent names in declaration order; this fixes the component
    /// order of concentration vectors built from this chip.
    std::vector<std::string> reagent_names() const;
    const ReservoirDecl* reservoir_at(Loc loc) const;

    bool operator==(const ChipHeader&) const = default;
};

enum class MixerType { H14 = 14, V41 = 41 };

namespace op {
struct Dispense {
    Loc loc;
    bool operator==(const Dispense&) const = default;
};
struct Move {
    Loc src;
    Loc dst;
    bool operator==(const Move&) const = default;
};
struct MixStart {
    Loc a;
    Loc b;
    int t_mix = 0;
    MixerType mtype = MixerType::H14;
    bool operator==(const MixStart&) const = default;
};
struct Waste {
    Loc loc;
    bool operator==(const Waste&) const = default;
};
struct Output {
    Loc loc;
    bool operator==(const Output&) const = default;
};
struct DetectStart {
    std::string detector;
    bool operator==(const DetectStart&) const = default;
};
struct CondCall {
    std::string detector;
    std::string recovery;
    bool operator==(const CondCall&) const = default;
};
struct End {
    bool operator==(const End&) const = default;
};
}  // namespace op

using Op = std::variant<op::Dispense, op::Move, op::MixStart, op::Waste, op::Output,
                        op::DetectStart, op::CondCall, op::End>;

struct Instruction {
    Op op;
    int line = 0;  // source provenance, ignored by ==
    int col = 0;

    template <class T>
    bool is() const { return std::holds_alternative<T>(op); }
    template <class T>
    const T& as() const { return std::get<T>(op); }

    bool operator==(const Instruction& other) const { return op == other.op; }
};

/// Canonical arrow form, e.g. `m([3,1]->[3,2])`.
std::string to_arrow_text(const Instruction& instr);
/// Compact form used in diagnostics, e.g. `m(3,1,3,2)`.
std::string to_compact_text(const Instruction& instr);

struct TimedLine {
    int t = 0;
    std::vector<Instruction> instrs;
    int line = 0;

    bool operator==(const TimedLine& other) const
    {
        return t == other.t && instrs == other.instrs;
    }
};

struct DetectorDecl {
    std::string id;
    Loc loc;
    int duration = 0;
    bool operator==(const DetectorDecl&) const = default;
};

struct Program {
    ChipHeader header;
    std::vector<TimedLine> main;
    std::vector<DetectorDecl> detectors;
    std::map<std::string, std::vector<TimedLine>> recoveries;
    std::optional<int> t_max;

    const DetectorDecl* detector(std::string_view id) const;
    bool operator==(const Program&) const = default;
};

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(int line, int col, std::string expected);

    int line() const { return line_; }
    int col() const { return col_; }
    const std::string& expected() const { return expected_; }

private:
    int line_;
    int col_;
    std::string expected_;
};

enum class SemanticErrorKind {
    BadDimensions,
    BadAccuracy,
    NoReagentReservoir,
    DuplicateReservoir,
    DuplicateDetector,
    BadDetectorDuration,
    NonMonotonicTime,
    NegativeTime,
    UndeclaredDetector,
    UndeclaredRecovery,
    NestedConditional,
    OutOfBounds,
    NotAdjacent,
    BadMixDuration,
    MisplacedEnd,
};

std::string_view to_string(SemanticErrorKind kind);

struct SemanticError {
    SemanticErrorKind kind;
    int line = 0;
    std::string detail;

    std::string message() const;
    bool operator==(const SemanticError&) const = default;
};

/// Thrown by parse_program when the text is well-formed but violates one of
/// the reference/ordering rules (duplicate reservoir, non-increasing time,
/// undeclared detector or recovery).
class SemanticErrors : public std::runtime_error {
public:
    explicit SemanticErrors(std::vector<SemanticError> errors);
    const std::vector<SemanticError>& errors() const { return errors_; }

private:
    std::vector<SemanticError> errors_;
};

/// Reads `.dmf` text. Both `m([r,c]->[r,c])` and `m(r,c,r,c)` are accepted.
Program parse_program(std::string_view text);
/// Same grammar, no semantic rejection; used to inspect malformed programs.
Program parse_program_unchecked(std::string_view text);
std::string serialize_program(const Program& program);
/// Space-separated instructions in either notation, e.g. `m(11,8,12,8) d(3,1)`.
std::vector<Instruction> parse_instructions(std::string_view text);
std::vector<SemanticError> validate_structure(const Program& program);

}  // namespace dmfv
