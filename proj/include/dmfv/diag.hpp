#pragma once

// Error taxonomy, violation records and report rendering.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmfv/isa.hpp"

namespace dmfv {

enum class ErrorCode {
    E1,  // static fluidic constraint
    E2,  // dynamic fluidic constraint
    E3,  // wrong reservoir
    E4,  // active mixer / detector interference
    E5,  // wrong droplet count / routing
    E6,  // mixing shorter than specified
    E7,  // wrong mix-split operation
    PinCase1,
    PinCase2,
    PinCase3,
    PinDispense,
    Structural,
    Tmax,
};

std::string_view code_name(ErrorCode code);  // "e1", "pin-case2", ...
bool is_phase_two(ErrorCode code);

/// What a checker observed, before it is turned into a report row.
enum class FailureKind {
    StaticFC,
    DynamicFC,
    DoubleClaim,
    InvalidReagentReservoir,
    InvalidWasteReservoir,
    InvalidOutputReservoir,
    ActiveMixer,
    ActiveDetection,
    DetectorBusy,
    DetectionIncomplete,
    MissingDroplets,
    MixerGeometry,
    MixShort,
    WrongMix,
    MissingMix,
    UnexpectedMix,
    WrongOutput,
    SourceMismatch,
    PinSplit,
    PinStretch,
    PinStuck,
    PinDispenseStretch,
    Structure,
    TmaxExceeded,
};

struct RawFailure {
    FailureKind kind = FailureKind::Structure;
    std::vector<Loc> cells;  // involved cells; for Missing* the absent ones
    std::vector<int> pins;
    std::string detail;      // free-form evidence, e.g. "mixed 6 < 12"
    std::string pin_case;    // "1", "2a".."2d", "3a", "3b", "dispense"
    std::optional<Loc> stuck;
};

struct Violation {
    ErrorCode code = ErrorCode::Structural;
    int t = 0;
    std::string instruction;  // compact text; concurrent culprits space-separated
    int line = 0;             // program line of the (first) culprit instruction
    std::vector<Loc> cells;
    std::vector<int> pins;
    std::string pin_assignment;  // "Pin((13,5))=6 Pin((4,3))=6"
    std::string response;        // tool response
    std::string cause;           // potential cause (Phase II)
    std::string consequence;     // design-error consequence
    std::string detail;
    std::string path;            // execution path label, empty for linear programs
    bool secondary = false;

    bool operator==(const Violation&) const = default;
};

/// Deterministic mapping from a raw failure to code and wording.
Violation classify(const RawFailure& failure);

struct Report {
    std::string path;
    int final_t = 0;
    bool completed = true;  // false when verification stopped on a violation
    std::vector<Violation> violations;
    std::vector<std::string> notes;  // informational (e.g. longer-than-spec mixing)

    bool passed() const { return violations.empty(); }
    bool operator==(const Report&) const = default;
};

enum class ReportFormat { Text, Json };

inline constexpr int kReportSchemaVersion = 1;

std::string format_report(const Report& report, ReportFormat format);
/// Multi-path rendering; reports are grouped by path label.
std::string format_reports(const std::vector<Report>& reports, ReportFormat format);

}  // namespace dmfv
