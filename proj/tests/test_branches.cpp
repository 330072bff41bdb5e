#include <gtest/gtest.h>

#include <random>

#include "dmfv/branches.hpp"
#include "support.hpp"

using namespace dmfv;
using dmfv::testing::load_graph;
using dmfv::testing::load_program;

namespace {

std::vector<int> times(const std::vector<TimedLine>& lines)
{
    std::vector<int> out;
    for (const auto& l : lines) out.push_back(l.t);
    return out;
}

// Three detect / conditional blocks around a droplet parked on the detector;
// recovery b wiggles the droplet for len[b] ticks.
std::string three_blocks(const std::vector<int>& len)
{
    std::string s = "dim(6,6)\naccuracy 4\nR(1,1,A) O(6,6)\nD(d1,3,3,2)\n";
    s += "1 d(1,1)\n2 m([1,1]->[2,1])\n3 m([2,1]->[3,1])\n4 m([3,1]->[3,2])\n5 m([3,2]->[3,3])\n";
    std::string rec;
    int t = 6;
    for (std::size_t b = 0; b < len.size(); ++b) {
        s += std::to_string(t) + " detect(d1)\n";
        s += std::to_string(t + 2) + " if(d1) call Recovery(" + std::to_string(b + 1) + ")\n";
        rec += "recovery " + std::to_string(b + 1) + ":\n";
        for (int k = 1; k <= len[b]; ++k)
            rec += std::to_string(t + 2 + k) + (k % 2 ? " m([3,3]->[3,4])\n" : " m([3,4]->[3,3])\n");
        rec += "endrecovery\n";
        t += 3 + len[b];
    }
    const char* tail[] = {"m([3,3]->[4,3])", "m([4,3]->[5,3])", "m([5,3]->[6,3])", "m([6,3]->[6,4])",
                          "m([6,4]->[6,5])", "m([6,5]->[6,6])"};
    for (auto m : tail) s += std::to_string(t++) + " " + m + "\n";
    s += std::to_string(t) + " output(6,6) end\n";
    return s + rec;
}

// Global-offset model: a line keeps its literal time minus the spans of
// every earlier branch that was skipped.
std::vector<int> offset_model(const Program& p, const std::vector<bool>& taken)
{
    std::vector<int> out;
    int skipped = 0;
    std::size_t b = 0;
    for (const auto& line : p.main) {
        out.push_back(line.t - skipped);
        for (const auto& ins : line.instrs) {
            if (!ins.is<op::CondCall>()) continue;
            const auto& rec = p.recoveries.at(std::get<op::CondCall>(ins.op).recovery);
            const int span = rec.back().t - line.t;
            if (taken[b]) {
                for (const auto& r : rec) out.push_back(r.t - skipped);
            } else {
                skipped += span;
            }
            ++b;
        }
    }
    return out;
}

}  // namespace

TEST(Paths, RecoveryFixtureHasFourPaths)
{
    auto p = load_program("recovery.dmf");
    EXPECT_EQ(branch_count(p), 2u);
    auto paths = enumerate_paths(p);
    ASSERT_EQ(paths.size(), 4u);
    std::vector<std::string> labels;
    for (const auto& s : paths) labels.push_back(s.label);
    EXPECT_EQ(labels, (std::vector<std::string>{"00", "01", "10", "11"}));
    EXPECT_EQ(paths[0].program.main.back().t, 35);
    EXPECT_EQ(paths[1].program.main.back().t, 56);
    EXPECT_EQ(paths[2].program.main.back().t, 48);
    EXPECT_EQ(paths[3].program.main.back().t, 69);
}

TEST(Paths, AllTakenFollowsWrittenTimeline)
{
    auto p = load_program("recovery.dmf");
    auto s = expand_path(p, {true, true});
    std::vector<int> want;
    for (const auto& l : p.main) {
        want.push_back(l.t);
        if (l.t == 15)
            for (const auto& r : p.recoveries.at("1")) want.push_back(r.t);
        if (l.t == 43)
            for (const auto& r : p.recoveries.at("2")) want.push_back(r.t);
    }
    EXPECT_EQ(times(s.program.main), want);
}

TEST(Paths, EveryRecoveryPathVerifiesAndConforms)
{
    auto p = load_program("recovery.dmf");
    auto g = load_graph("recovery.sg");
    PathOptions o;
    o.input = &g;
    auto results = verify_all_paths_serial(enumerate_paths(p), o);
    ASSERT_EQ(results.size(), 4u);
    const int final_t[] = {35, 56, 48, 69};
    for (std::size_t i = 0; i < results.size(); ++i) {
        EXPECT_TRUE(results[i].report.passed()) << results[i].spec.label << "\n"
                                                << format_report(results[i].report, ReportFormat::Text);
        EXPECT_EQ(results[i].verification.trace.final_t, final_t[i]);
    }
}

TEST(Paths, LinearProgramIsOnePath)
{
    auto paths = enumerate_paths(load_program("pcr.dmf"));
    ASSERT_EQ(paths.size(), 1u);
    EXPECT_EQ(paths[0].label, "");
    EXPECT_EQ(paths[0].program.main, load_program("pcr.dmf").main);
}

TEST(Paths, ThreeBranchesMatchOffsetModel)
{
    std::mt19937 rng(17);
    for (int round = 0; round < 20; ++round) {
        std::uniform_int_distribution<int> half(1, 4);
        std::vector<int> len{2 * half(rng), 2 * half(rng), 2 * half(rng)};
        auto p = parse_program(three_blocks(len));
        auto paths = enumerate_paths(p);
        ASSERT_EQ(paths.size(), 8u);
        for (std::size_t mask = 0; mask < 8; ++mask) {
            const auto& s = paths[mask];
            std::vector<bool> taken{bool(mask & 4), bool(mask & 2), bool(mask & 1)};
            EXPECT_EQ(s.taken, taken);
            EXPECT_EQ(times(s.program.main), offset_model(p, taken)) << s.label;
            auto r = verify_path(s, {});
            EXPECT_TRUE(r.report.passed()) << s.label << "\n" << format_report(r.report, ReportFormat::Text);
            int skipped = 0;
            for (int b = 0; b < 3; ++b)
                if (!taken[b]) skipped += len[b];
            EXPECT_EQ(r.verification.trace.final_t, p.main.back().t - skipped);
        }
    }
}

TEST(Paths, FaultInsideRecoveryOnlyHitsItsPaths)
{
    auto p = load_program("recovery.dmf");
    for (auto& l : p.recoveries.at("1"))
        if (l.t == 18)
            for (auto& ins : parse_instructions("d(1,2)")) l.instrs.push_back(ins);
    auto results = verify_all_paths_serial(enumerate_paths(p), {});
    ASSERT_EQ(results.size(), 4u);
    for (const auto& r : results) {
        const bool hit = r.spec.taken[0];
        EXPECT_EQ(!r.report.passed(), hit) << r.spec.label;
        if (hit) {
            ASSERT_FALSE(r.report.violations.empty());
            EXPECT_EQ(r.report.violations[0].code, ErrorCode::E1);
            EXPECT_EQ(r.report.violations[0].t, 18);
            EXPECT_EQ(r.report.violations[0].path, r.spec.label);
        }
    }
}

TEST(Paths, ParallelMatchesSerial)
{
    auto p = parse_program(three_blocks({2, 4, 6}));
    auto paths = enumerate_paths(p);
    PathOptions o;
    o.stop_at_first = false;
    auto a = verify_all_paths_serial(paths, o);
    auto b = verify_all_paths_parallel(paths, o);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].spec.label, b[i].spec.label);
        EXPECT_EQ(a[i].report.violations, b[i].report.violations);
        EXPECT_EQ(a[i].report.final_t, b[i].report.final_t);
    }
}

TEST(Paths, LimitAndLabels)
{
    auto p = parse_program(three_blocks({2, 2, 2}));
    EXPECT_THROW(enumerate_paths(p, 2), PathLimitExceeded);
    EXPECT_NO_THROW(enumerate_paths(p, 3));
    EXPECT_EQ(parse_path_label("101", 3), (std::vector<bool>{true, false, true}));
    EXPECT_THROW(parse_path_label("10", 3), std::invalid_argument);
    EXPECT_THROW(parse_path_label("1x1", 3), std::invalid_argument);
    EXPECT_THROW(expand_path(p, {true}), std::invalid_argument);
}
