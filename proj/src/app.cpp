#include "dmfv/app.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

#include "dmfv/branches.hpp"
#include "dmfv/graph.hpp"
#include "dmfv/inject.hpp"
#include "dmfv/pins.hpp"
#include "dmfv/render.hpp"

namespace dmfv {

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw InputError("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw InputError("cannot write " + path);
    f << text;
}

Loc parse_cell(const std::string& s)
{
    Loc l;
    char comma = 0;
    std::istringstream in(s);
    if (!(in >> l.row >> comma >> l.col) || comma != ',') throw InputError("cell must look like r,c: '" + s + "'");
    return l;
}

struct Common {
    std::string program;
    std::string pins;
    std::string format = "text";
};

struct VerifyArgs : Common {
    std::string sg;
    std::optional<int> tmax;
    bool all_paths = false;
    std::string path;
    bool first_error = false;
    bool all = false;
    bool ignore_waste = false;
    std::size_t path_limit = 16;
};

ReportFormat fmt(const std::string& f) { return f == "json" ? ReportFormat::Json : ReportFormat::Text; }

int cmd_verify(const VerifyArgs& a, std::ostream& out)
{
    const Program p = parse_program(slurp(a.program));
    std::optional<PinMap> pins;
    if (!a.pins.empty()) pins = PinMap::parse(slurp(a.pins));
    std::optional<SeqGraph> input;
    if (!a.sg.empty()) input = parse_input_sg(slurp(a.sg));
    const bool stop = !a.all;

    const bool branching = branch_count(p) > 0 || a.all_paths || !a.path.empty();
    if (branching) {
        PathOptions o;
        o.stop_at_first = stop;
        o.t_max = a.tmax;
        o.pins = pins ? &*pins : nullptr;
        o.input = input ? &*input : nullptr;
        o.ignore_waste = a.ignore_waste;
        std::vector<PathResult> results;
        if (!a.path.empty()) {
            results.push_back(verify_path(expand_path(p, parse_path_label(a.path, branch_count(p))), o));
        } else {
            results = verify_all_paths_parallel(enumerate_paths(p, a.path_limit), o);
        }
        std::vector<Report> reps;
        bool ok = true;
        for (auto& r : results) {
            ok = ok && r.report.passed();
            reps.push_back(r.report);
        }
        out << format_reports(reps, fmt(a.format));
        return ok ? kExitPass : kExitViolations;
    }

    VerifyOptions vo;
    vo.stop_at_first = stop;
    vo.t_max = a.tmax;
    Verification v = pins ? verify_program_pins(p, *pins, vo) : verify_program(p, vo);
    Report rep = v.report;
    if (input && (rep.passed() || !stop) && rep.completed) {
        Report c = conformance(*input, reconstruct(v.trace), p.header.accuracy, std::nullopt, v.trace.final_t,
                               ConformanceOptions{ConformanceScope::Full, a.ignore_waste});
        for (auto& x : c.violations) rep.violations.push_back(std::move(x));
        for (auto& n : c.notes) rep.notes.push_back(std::move(n));
    }
    out << format_report(rep, fmt(a.format));
    return rep.passed() ? kExitPass : kExitViolations;
}

int cmd_graph(const std::string& prog, const std::string& format, const std::string& out_path, std::ostream& out)
{
    const Program p = parse_program(slurp(prog));
    Verification v = verify_program(p);
    if (!v.report.passed()) {
        out << format_report(v.report, ReportFormat::Text);
        return kExitViolations;
    }
    SeqGraph g = reconstruct(v.trace);
    spit(out_path, format == "sg" ? serialize_sg(g) : to_dot(g, p.header.accuracy), out);
    return kExitPass;
}

int cmd_paths(const std::string& prog, std::size_t limit, std::ostream& out)
{
    const Program p = parse_program(slurp(prog));
    for (const auto& s : enumerate_paths(p, limit)) {
        out << (s.label.empty() ? "-" : s.label) << "  lines=" << s.program.main.size();
        if (!s.program.main.empty()) out << "  t=" << s.program.main.front().t << ".." << s.program.main.back().t;
        out << '\n';
    }
    return kExitPass;
}

struct InjectArgs {
    std::string program;
    std::string error;
    std::optional<int> at;
    std::string insert;
    std::string pins;
    std::string cell;
    std::optional<int> pin;
    std::string out;
};

int cmd_inject(const InjectArgs& a, std::ostream& out)
{
    if (!a.pins.empty()) {
        if (a.cell.empty() || !a.pin) throw InputError("pin remap needs --cell and --pin");
        PinMap m = remap_pin(PinMap::parse(slurp(a.pins)), parse_cell(a.cell), *a.pin);
        spit(a.out, m.serialize(), out);
        return kExitPass;
    }
    if (a.program.empty() || a.error.empty()) throw InputError("inject needs a program and --error");
    InjectionSpec s;
    s.code = a.error;
    s.at = a.at;
    if (!a.insert.empty()) s.insert = a.insert;
    spit(a.out, serialize_program(inject(parse_program(slurp(a.program)), s)), out);
    return kExitPass;
}

struct RenderArgs {
    std::string program;
    std::string pins;
    std::optional<int> at;
    bool animate = false;
    bool svg = false;
    std::string out;
};

int cmd_render(const RenderArgs& a, std::ostream& out)
{
    const Program p = parse_program(slurp(a.program));
    std::optional<PinMap> pins;
    if (!a.pins.empty()) pins = PinMap::parse(slurp(a.pins));
    auto snaps = replay(p, pins ? &*pins : nullptr);
    auto draw = [&](const Snapshot& s) { return a.svg ? render_svg(s) : render_ascii(s); };
    bool violated = !snaps.empty() && !snaps.back().violations.empty();
    if (a.animate) {
        if (a.svg && !a.out.empty() && a.out != "-") {
            // one file per frame: out.svg -> out_0001.svg ...
            std::string stem = a.out;
            if (stem.size() > 4 && stem.ends_with(".svg")) stem.resize(stem.size() - 4);
            for (std::size_t i = 1; i < snaps.size(); ++i) {
                std::ostringstream name;
                name << stem << '_' << std::setw(4) << std::setfill('0') << snaps[i].t << ".svg";
                spit(name.str(), draw(snaps[i]), out);
            }
        } else {
            std::string all;
            for (std::size_t i = 1; i < snaps.size(); ++i) all += draw(snaps[i]) + "\n";
            spit(a.out, all, out);
        }
        return violated ? kExitViolations : kExitPass;
    }
    const int t = a.at.value_or(0);
    if (t < 0 || static_cast<std::size_t>(t) >= snaps.size())
        throw InputError("t=" + std::to_string(t) + " is past the last replayed tick " + std::to_string(static_cast<int>(snaps.size()) - 1));
    spit(a.out, draw(snaps[static_cast<std::size_t>(t)]), out);
    return violated && static_cast<std::size_t>(t) + 1 == snaps.size() ? kExitViolations : kExitPass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"dmfv - checker for droplet actuation programs"};
    app.require_subcommand(1);

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "check a .dmf program");
    verify->add_option("program", va.program, ".dmf file")->required();
    verify->add_option("--pins", va.pins, "pin map for pin-constrained checking");
    verify->add_option("--sg", va.sg, "input sequencing graph for conformance");
    verify->add_option("--tmax", va.tmax, "maximum completion time");
    auto* all_paths = verify->add_flag("--all-paths", va.all_paths, "verify every branch path");
    verify->add_option("--path", va.path, "verify one branch path, e.g. 10")->excludes(all_paths);
    auto* first = verify->add_flag("--first-error", va.first_error, "stop at the first violating tick (default)");
    verify->add_flag("--all", va.all, "keep going after violations")->excludes(first);
    verify->add_option("--format", va.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    verify->add_flag("--ignore-waste", va.ignore_waste, "skip waste droplets in conformance");
    verify->add_option("--path-limit", va.path_limit, "maximum conditional count");

    std::string g_prog, g_format = "dot", g_out;
    auto* graph = app.add_subcommand("graph", "reconstruct the realized sequencing graph");
    graph->add_option("program", g_prog)->required();
    graph->add_option("--format", g_format, "dot or sg")->check(CLI::IsMember({"dot", "sg"}));
    graph->add_option("--out", g_out);

    std::string p_prog;
    std::size_t p_limit = 16;
    auto* paths = app.add_subcommand("paths", "list branch paths");
    paths->add_option("program", p_prog)->required();
    paths->add_option("--path-limit", p_limit);

    InjectArgs ia;
    auto* inj = app.add_subcommand("inject", "write a program (or pin map) with an injected fault");
    inj->add_option("program", ia.program);
    inj->add_option("--error", ia.error, "e1..e7")->check(CLI::IsMember({"e1", "e2", "e3", "e4", "e5", "e6", "e7"}));
    inj->add_option("--at", ia.at, "target timestamp");
    inj->add_option("--insert", ia.insert, "instruction text to insert");
    inj->add_option("--pins", ia.pins, "pin map to remap");
    inj->add_option("--cell", ia.cell, "cell r,c");
    inj->add_option("--pin", ia.pin, "new pin id");
    inj->add_option("--out", ia.out);

    RenderArgs ra;
    auto* render = app.add_subcommand("render", "draw chip snapshots");
    render->add_option("program", ra.program)->required();
    render->add_option("--pins", ra.pins);
    auto* at = render->add_option("--at", ra.at, "tick to draw");
    render->add_flag("--animate", ra.animate, "every tick")->excludes(at);
    render->add_flag("--svg", ra.svg);
    render->add_option("--out", ra.out);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kExitInput;
    }

    try {
        if (*verify) return cmd_verify(va, out);
        if (*graph) return cmd_graph(g_prog, g_format, g_out, out);
        if (*paths) return cmd_paths(p_prog, p_limit, out);
        if (*inj) return cmd_inject(ia, out);
        if (*render) return cmd_render(ra, out);
    } catch (const SyntaxError& e) {
        err << "syntax error: " << e.what() << '\n';
        return kExitInput;
    } catch (const SemanticErrors& e) {
        for (const auto& x : e.errors()) err << x.message() << '\n';
        return kExitInput;
    } catch (const GraphError& e) {
        err << "graph error: " << e.what() << '\n';
        return kExitInput;
    } catch (const PinMapError& e) {
        err << "pin map error: " << e.what() << '\n';
        return kExitInput;
    } catch (const PathLimitExceeded& e) {
        err << e.what() << '\n';
        return kExitInput;
    } catch (const MutationInapplicable& e) {
        err << "cannot inject: " << e.what() << '\n';
        return kExitInput;
    } catch (const InputError& e) {
        err << e.what() << '\n';
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        err << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}

}  // namespace dmfv
