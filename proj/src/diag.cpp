#include "dmfv/diag.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace dmfv {

std::string_view code_name(ErrorCode code)
{
    switch (code) {
    case ErrorCode::E1: return "e1";
    case ErrorCode::E2: return "e2";
    case ErrorCode::E3: return "e3";
    case ErrorCode::E4: return "e4";
    case ErrorCode::E5: return "e5";
    case ErrorCode::E6: return "e6";
    case ErrorCode::E7: return "e7";
    case ErrorCode::PinCase1: return "pin-case1";
    case ErrorCode::PinCase2: return "pin-case2";
    case ErrorCode::PinCase3: return "pin-case3";
    case ErrorCode::PinDispense: return "pin-dispense";
    case ErrorCode::Structural: return "structural";
    case ErrorCode::Tmax: return "tmax";
    }
    return "?";
}

bool is_phase_two(ErrorCode code)
{
    return code == ErrorCode::E6 || code == ErrorCode::E7 || code == ErrorCode::Tmax;
}

namespace {

constexpr std::string_view kUnintentionalMix = "Unintentional mix of droplets";
constexpr std::string_view kIncorrectOp = "Incorrect fluidic operation";
constexpr std::string_view kRoutingError = "Droplet routing error or Incorrect fluidic operation";
constexpr std::string_view kInhomogeneous = "Inhomogeneous mixing";
constexpr std::string_view kWrongRealization = "Incorrect realization of input assay";

std::string cells_text(const std::vector<Loc>& cells)
{
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += (i + 1 == cells.size()) ? " and " : ", ";
        out += to_string(cells[i]);
    }
    return out;
}

std::string first_cell(const RawFailure& f) { return f.cells.empty() ? "?" : to_string(f.cells.front()); }

}  // namespace

Violation classify(const RawFailure& f)
{
    Violation v;
    v.cells = f.cells;
    v.pins = f.pins;
    v.detail = f.detail;
    switch (f.kind) {
    case FailureKind::StaticFC:
    case FailureKind::DoubleClaim:
        v.code = ErrorCode::E1;
        v.response = "Static fluidic constraint violated";
        v.consequence = kUnintentionalMix;
        break;
    case FailureKind::DynamicFC:
        v.code = ErrorCode::E2;
        v.response = "Dynamic fluidic constraint violated";
        v.consequence = kUnintentionalMix;
        break;
    case FailureKind::InvalidReagentReservoir:
        v.code = ErrorCode::E3;
        v.response = "Dispense from invalid input reservoir";
        v.consequence = kIncorrectOp;
        break;
    case FailureKind::InvalidWasteReservoir:
        v.code = ErrorCode::E3;
        v.response = "Dispense to invalid waste reservoir";
        v.consequence = kIncorrectOp;
        break;
    case FailureKind::InvalidOutputReservoir:
        v.code = ErrorCode::E3;
        v.response = "Dispense to invalid output reservoir";
        v.consequence = kIncorrectOp;
        break;
    case FailureKind::ActiveMixer:
        v.code = ErrorCode::E4;
        v.response = "Droplet on " + first_cell(f) + " is in active mixer";
        v.consequence = kIncorrectOp;
        break;
    case FailureKind::ActiveDetection:
        v.code = ErrorCode::E4;
        v.response = "Droplet on " + first_cell(f) + " is under active detection";
        v.consequence = kIncorrectOp;
        break;
    case FailureKind::DetectorBusy:
        v.code = ErrorCode::E4;
        v.response = "Detector on " + first_cell(f) + " is busy";
        v.consequence = kIncorrectOp;
        break;
    case FailureKind::DetectionIncomplete:
        v.code = ErrorCode::E4;
        v.response = "Detection on " + first_cell(f) + " has not completed";
        v.consequence = kIncorrectOp;
        break;
    case FailureKind::MissingDroplets:
        v.code = ErrorCode::E5;
        v.response = "Droplet is not present on " + cells_text(f.cells);
        v.consequence = kRoutingError;
        break;
    case FailureKind::MixerGeometry:
        v.code = ErrorCode::E5;
        v.response = "Mixer endpoints " + cells_text(f.cells) + " do not match mixer type";
        v.consequence = kRoutingError;
        break;
    case FailureKind::MixShort:
        v.code = ErrorCode::E6;
        v.response = "Inhomogeneous mixing";
        v.cause = "Mixing performed for lesser time";
        v.consequence = kInhomogeneous;
        break;
    case FailureKind::WrongMix:
    case FailureKind::MissingMix:
    case FailureKind::UnexpectedMix:
    case FailureKind::WrongOutput:
    case FailureKind::SourceMismatch:
        v.code = ErrorCode::E7;
        v.response = "Incorrect realization of input sequencing graph";
        v.cause = "Wrong mix operation performed";
        v.consequence = kWrongRealization;
        break;
    case FailureKind::PinSplit:
        v.code = ErrorCode::PinCase1;
        v.response = "Droplet split";
        v.consequence = "Unintentional droplet split";
        break;
    case FailureKind::PinStretch:
    case FailureKind::PinStuck:
        v.code = (f.pin_case.rfind("3", 0) == 0) ? ErrorCode::PinCase3 : ErrorCode::PinCase2;
        if (f.kind == FailureKind::PinStuck && f.stuck) {
            v.response = "Droplet stuck on " + to_string(*f.stuck);
            v.consequence = "Droplet cannot move as anticipated";
        } else {
            v.response = "Droplet stretch";
            v.consequence = "Unintentional droplet stretching";
        }
        break;
    case FailureKind::PinDispenseStretch:
        v.code = ErrorCode::PinDispense;
        v.response = "Droplet stretch";
        v.consequence = "Unintentional droplet stretching";
        break;
    case FailureKind::Structure:
        v.code = ErrorCode::Structural;
        v.response = "Malformed instruction";
        v.consequence = kIncorrectOp;
        break;
    case FailureKind::TmaxExceeded:
        v.code = ErrorCode::Tmax;
        v.response = "Maximum completion time exceeded";
        v.cause = "Assay completes later than T_max";
        v.consequence = "Completion-time constraint violated";
        break;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

void text_rows(std::ostringstream& out, const Report& r)
{
    std::vector<const Violation*> phase1, phase2, pins;
    for (const auto& v : r.violations) {
        if (is_phase_two(v.code))
            phase2.push_back(&v);
        else if (v.code == ErrorCode::PinCase1 || v.code == ErrorCode::PinCase2 || v.code == ErrorCode::PinCase3 ||
                 v.code == ErrorCode::PinDispense)
            pins.push_back(&v);
        else
            phase1.push_back(&v);
    }
    if (r.passed()) {
        out << "PASS  final t=" << r.final_t << "\n";
    } else {
        out << "FAIL  " << r.violations.size() << " violation(s)";
        if (r.completed) out << ", final t=" << r.final_t;
        else out << ", stopped at t=" << r.final_t;
        out << "\n";
    }
    if (!phase1.empty()) {
        out << "Phase I - Design constraint checking\n";
        for (const auto* v : phase1) {
            out << "  " << code_name(v->code) << "  " << v->response << "  t=" << v->t << "  " << v->instruction;
            if (v->secondary) out << "  [secondary]";
            out << "\n";
        }
    }
    if (!pins.empty()) {
        out << "Pin-constrained checking\n";
        for (const auto* v : pins) {
            out << "  " << v->pin_assignment << "  " << v->response << "  t=" << v->t << "  " << v->instruction;
            if (v->secondary) out << "  [secondary]";
            out << "\n";
        }
    }
    if (!phase2.empty()) {
        out << "Phase II - Realization error checking\n";
        for (const auto* v : phase2) {
            out << "  " << code_name(v->code) << "  " << v->response << "  " << v->cause;
            if (!v->detail.empty()) out << " (" << v->detail << ")";
            if (!v->instruction.empty() && v->code != ErrorCode::Tmax) out << "  at " << v->instruction;
            out << "\n";
        }
    }
    for (const auto& n : r.notes) out << "  note: " << n << "\n";
}

nlohmann::ordered_json violation_json(const Violation& v)
{
    nlohmann::ordered_json j;
    j["code"] = code_name(v.code);
    j["phase"] = is_phase_two(v.code) ? 2 : 1;
    j["t"] = v.t;
    j["instruction"] = v.instruction;
    j["line"] = v.line;
    j["response"] = v.response;
    j["cause"] = v.cause;
    j["consequence"] = v.consequence;
    j["detail"] = v.detail;
    auto cells = nlohmann::ordered_json::array();
    for (auto c : v.cells) cells.push_back({c.row, c.col});
    j["cells"] = cells;
    j["pins"] = v.pins;
    j["pin_assignment"] = v.pin_assignment;
    j["path"] = v.path;
    j["secondary"] = v.secondary;
    return j;
}

nlohmann::ordered_json report_json(const Report& r)
{
    nlohmann::ordered_json j;
    j["path"] = r.path;
    j["status"] = r.passed() ? "PASS" : "FAIL";
    j["final_t"] = r.final_t;
    j["completed"] = r.completed;
    auto vs = nlohmann::ordered_json::array();
    for (const auto& v : r.violations) vs.push_back(violation_json(v));
    j["violations"] = vs;
    j["notes"] = r.notes;
    return j;
}

}  // namespace

std::string format_report(const Report& report, ReportFormat format)
{
    if (format == ReportFormat::Json) {
        nlohmann::ordered_json j;
        j["schema_version"] = kReportSchemaVersion;
        auto body = report_json(report);
        for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
        return j.dump(2) + "\n";
    }
    std::ostringstream out;
    text_rows(out, report);
    return out.str();
}

std::string format_reports(const std::vector<Report>& reports, ReportFormat format)
{
    std::vector<const Report*> sorted;
    for (const auto& r : reports) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(), [](const Report* a, const Report* b) { return a->path < b->path; });

    if (format == ReportFormat::Json) {
        nlohmann::ordered_json j;
        j["schema_version"] = kReportSchemaVersion;
        bool all = std::all_of(reports.begin(), reports.end(), [](const Report& r) { return r.passed(); });
        j["status"] = all ? "PASS" : "FAIL";
        auto ps = nlohmann::ordered_json::array();
        for (const auto* r : sorted) ps.push_back(report_json(*r));
        j["paths"] = ps;
        return j.dump(2) + "\n";
    }
    if (sorted.size() == 1 && sorted.front()->path.empty()) return format_report(*sorted.front(), format);
    std::ostringstream out;
    for (const auto* r : sorted) {
        out << "== path " << (r->path.empty() ? "-" : r->path) << " ==\n";
        text_rows(out, *r);
    }
    return out.str();
}

}  // namespace dmfv
