#include "dmfv/branches.hpp"

#include <omp.h>

namespace dmfv {

PathLimitExceeded::PathLimitExceeded(std::size_t branches, std::size_t limit)
    : std::runtime_error(std::to_string(branches) + " conditional branches give 2^" + std::to_string(branches) +
                         " paths; limit is 2^" + std::to_string(limit)),
      branches_(branches)
{
}

std::size_t branch_count(const Program& p)
{
    std::size_t k = 0;
    for (const auto& line : p.main)
        for (const auto& in : line.instrs)
            if (in.is<op::CondCall>()) ++k;
    return k;
}

PathSpec expand_path(const Program& p, const std::vector<bool>& taken)
{
    if (taken.size() != branch_count(p)) throw std::invalid_argument("path has " + std::to_string(taken.size()) + " branch bits, program has " + std::to_string(branch_count(p)));
    PathSpec spec;
    spec.taken = taken;
    for (bool b : taken) spec.label += b ? '1' : '0';
    spec.program = p;
    spec.program.main.clear();

    int shift = 0;
    std::size_t b = 0;
    for (const auto& line : p.main) {
        TimedLine moved = line;
        moved.t += shift;
        spec.program.main.push_back(moved);
        for (const auto& in : line.instrs) {
            if (!in.is<op::CondCall>()) continue;
            const bool take = taken[b++];
            auto it = p.recoveries.find(in.as<op::CondCall>().recovery);
            if (it == p.recoveries.end() || it->second.empty()) continue;
            if (take) {
                for (auto rl : it->second) {
                    rl.t += shift;
                    spec.program.main.push_back(std::move(rl));
                }
            } else {
                shift -= it->second.back().t - line.t;
            }
        }
    }
    return spec;
}

std::vector<bool> parse_path_label(const std::string& label, std::size_t branches)
{
    if (label.size() != branches) throw std::invalid_argument("path label needs " + std::to_string(branches) + " digits");
    std::vector<bool> out;
    for (char c : label) {
        if (c != '0' && c != '1') throw std::invalid_argument("path label must be 0/1 digits");
        out.push_back(c == '1');
    }
    return out;
}

std::vector<PathSpec> enumerate_paths(const Program& p, std::size_t limit)
{
    const std::size_t k = branch_count(p);
    if (k > limit) throw PathLimitExceeded(k, limit);
    std::vector<PathSpec> out;
    const std::size_t n = std::size_t{1} << k;
    out.reserve(n);
    for (std::size_t mask = 0; mask < n; ++mask) {
        std::vector<bool> taken(k);
        // first branch is the leftmost label digit
        for (std::size_t i = 0; i < k; ++i) taken[i] = (mask >> (k - 1 - i)) & 1U;
        out.push_back(expand_path(p, taken));
    }
    return out;
}

namespace {

PathResult run(PathSpec spec, const PathOptions& o, bool pin_parallel)
{
    PathResult r;
    VerifyOptions vo;
    vo.stop_at_first = o.stop_at_first;
    vo.t_max = o.t_max;
    vo.path_label = spec.label;
    if (o.pins)
        r.verification = verify_program_pins(spec.program, *o.pins, vo, PinOptions{pin_parallel});
    else
        r.verification = verify_program(spec.program, vo);
    r.report = r.verification.report;

    const bool fluidic_ok = r.report.passed();
    if (o.input && (fluidic_ok || !o.stop_at_first) && r.report.completed) {
        bool all_not_taken = true;
        for (bool b : spec.taken) all_not_taken = all_not_taken && !b;
        ConformanceOptions co;
        co.scope = all_not_taken ? ConformanceScope::Full : ConformanceScope::OutputsOnly;
        co.ignore_waste = o.ignore_waste;
        try {
            SeqGraph synth = reconstruct(r.verification.trace);
            Report c = conformance(*o.input, synth, spec.program.header.accuracy, std::nullopt, r.verification.trace.final_t, co);
            for (auto& v : c.violations) {
                v.path = spec.label;
                r.report.violations.push_back(std::move(v));
            }
            for (auto& n : c.notes) r.report.notes.push_back(std::move(n));
        } catch (const GraphError& e) {
            r.report.notes.push_back(std::string("conformance skipped: ") + e.what());
        }
    }
    r.spec = std::move(spec);
    return r;
}

}  // namespace

PathResult verify_path(PathSpec spec, const PathOptions& options)
{
    return run(std::move(spec), options, true);
}

std::vector<PathResult> verify_all_paths_serial(const std::vector<PathSpec>& paths, const PathOptions& options)
{
    std::vector<PathResult> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(run(p, options, false));
    return out;
}

std::vector<PathResult> verify_all_paths_parallel(const std::vector<PathSpec>& paths, const PathOptions& options)
{
    std::vector<PathResult> out(paths.size());
    const long n = static_cast<long>(paths.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = run(paths[static_cast<std::size_t>(i)], options, false);
    return out;
}

}  // namespace dmfv
