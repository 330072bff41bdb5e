#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "dmfv/graph.hpp"
#include "support.hpp"

using namespace dmfv;
using dmfv::testing::load_graph;
using dmfv::testing::load_program;

namespace {

std::vector<std::string> details(const Report& r)
{
    std::vector<std::string> out;
    for (const auto& v : r.violations) out.push_back(v.detail);
    return out;
}

int count(const SeqGraph& g, NodeKind k)
{
    return static_cast<int>(std::count_if(g.nodes.begin(), g.nodes.end(), [k](const SGNode& n) { return n.kind == k; }));
}

}  // namespace

TEST(SgFormat, ParsesAndAnnotates)
{
    auto g = load_graph("ratio_input.sg");
    EXPECT_EQ(g.reagents, (std::vector<std::string>{"R1", "R2", "R3"}));
    EXPECT_EQ(count(g, NodeKind::Mix), 3);
    auto m3 = g.find("m3");
    ASSERT_TRUE(m3);
    EXPECT_EQ(cf_ratio_text(*g.nodes[*m3].cf, 5), "(1:2:1)");
    EXPECT_EQ(g.nodes[*m3].t_mix_spec, 12);
}

TEST(SgFormat, RoundTrip)
{
    for (auto f : {"ratio_input.sg", "ratio_synth.sg", "pcr.sg", "twoway.sg", "recovery.sg"}) {
        auto g = load_graph(f);
        EXPECT_EQ(parse_input_sg(serialize_sg(g)), g) << f;
    }
}

TEST(SgFormat, Errors)
{
    auto kind_of = [](const std::string& text) {
        try {
            parse_input_sg(text);
        } catch (const GraphError& e) {
            return static_cast<int>(e.kind());
        }
        return -1;
    };
    using K = GraphError::Kind;
    EXPECT_EQ(kind_of("reagents A\nnode a dispense A\nnode a dispense A\n"), int(K::DuplicateNode));
    EXPECT_EQ(kind_of("reagents A\nnode a dispense A\nedge a b\n"), int(K::UnknownNode));
    EXPECT_EQ(kind_of("reagents A\nnode a dispense B\n"), int(K::UnknownReagent));
    EXPECT_EQ(kind_of("reagents A\nnode a dispense A\nnode m mix 2\nedge a m\n"), int(K::BadArity));
    EXPECT_EQ(kind_of("reagents A\nnode a dispense A\nnode m mix 2\nnode n mix 2\nedge a m\nedge n m\nedge a n\nedge m n\n"),
              int(K::CycleDetected));
    EXPECT_EQ(kind_of("node a dispense A\nreagents A\n"), int(K::Syntax));
    EXPECT_EQ(kind_of("reagents A\nnode a frobnicate\n"), int(K::Syntax));
}

TEST(Conformance, ShortMixAndSwappedReagent)
{
    auto in = load_graph("ratio_input.sg");
    auto syn = load_graph("ratio_synth.sg");
    auto rep = conformance(in, syn, 5, std::nullopt, 28);
    std::vector<ErrorCode> codes;
    for (const auto& v : rep.violations) codes.push_back(v.code);
    EXPECT_EQ(codes, (std::vector<ErrorCode>{ErrorCode::E6, ErrorCode::E7, ErrorCode::E7, ErrorCode::E7}));
    auto d = details(rep);
    EXPECT_EQ(d[0], "mixed 6 < 12");
    EXPECT_EQ(d[1], "ratio (1:0:1) produced, (1:1:0) specified");
    EXPECT_EQ(d[2], "ratio (1:1:2) produced, (1:2:1) specified");
    EXPECT_EQ(rep.violations[0].instruction, "m2 [1,8]");
}

TEST(Conformance, Reflexive)
{
    for (auto f : {"ratio_input.sg", "pcr.sg", "twoway.sg", "recovery.sg"}) {
        auto g = load_graph(f);
        EXPECT_TRUE(conformance(g, g, 5, std::nullopt, 0).passed()) << f;
    }
}

TEST(Conformance, TmaxRow)
{
    auto g = load_graph("twoway.sg");
    auto rep = conformance(g, g, 5, 30, 36);
    ASSERT_EQ(rep.violations.size(), 1u);
    EXPECT_EQ(rep.violations[0].code, ErrorCode::Tmax);
    EXPECT_TRUE(conformance(g, g, 5, 40, 36).passed());
}

TEST(Reconstruct, TwoWayDilution)
{
    auto v = verify_program(load_program("twoway.dmf"));
    ASSERT_TRUE(v.report.passed());
    auto g = reconstruct(v.trace);
    EXPECT_EQ(count(g, NodeKind::Source), 2);
    EXPECT_EQ(count(g, NodeKind::Mix), 2);
    auto v1 = g.find("v1");
    auto v2 = g.find("v2");
    ASSERT_TRUE(v1 && v2);
    EXPECT_EQ(g.nodes[*v1].t_s, 4);
    EXPECT_EQ(g.nodes[*v1].t_e, 17);
    EXPECT_EQ(cf_component_text(*g.nodes[*v1].cf, 0, 5), "16/32");
    EXPECT_EQ(cf_component_text(*g.nodes[*v2].cf, 0, 5), "8/32");
    auto rep = conformance(load_graph("twoway.sg"), g, 5, std::nullopt, v.trace.final_t);
    EXPECT_TRUE(rep.passed()) << format_report(rep, ReportFormat::Text);
}

TEST(Reconstruct, PcrTreeIsBalanced)
{
    auto v = verify_program(load_program("pcr.dmf"));
    auto g = reconstruct(v.trace);
    EXPECT_EQ(count(g, NodeKind::Mix), 7);
    auto order = topo_order(g);
    const auto& last = g.nodes[order.back()].kind == NodeKind::Mix ? g.nodes[order.back()] : g.nodes[*g.find("v7")];
    ASSERT_TRUE(last.cf);
    for (std::size_t k = 0; k < last.cf->size(); ++k) EXPECT_EQ(cf_component_text(*last.cf, k, 5), "4/32");
    EXPECT_TRUE(conformance(load_graph("pcr.sg"), g, 5, std::nullopt, v.trace.final_t).passed());
}

TEST(Reconstruct, OrphanDroplet)
{
    Trace t;
    t.header.accuracy = 5;
    t.reagents = {"A"};
    Delivery d;
    d.kind = ReservoirKind::Output;
    d.droplet_origin = 99;
    d.reservoir_origin = 1;
    d.cf = CFVector::unit(0, 1);
    t.deliveries.push_back(d);
    t.header.reservoirs.push_back({{1, 1}, ReservoirKind::Output, ""});
    try {
        reconstruct(t);
        FAIL();
    } catch (const GraphError& e) {
        EXPECT_EQ(e.kind(), GraphError::Kind::OrphanDroplet);
    }
}

TEST(Dot, ListsNodesAndEdges)
{
    auto g = load_graph("twoway.sg");
    auto dot = to_dot(g, 5);
    EXPECT_EQ(dot.rfind("digraph", 0), 0u);
    std::size_t arrows = 0;
    for (auto p = dot.find("->"); p != std::string::npos; p = dot.find("->", p + 2)) ++arrows;
    EXPECT_EQ(arrows, g.edges.size());
    EXPECT_NE(dot.find("label=\"v1"), std::string::npos);
}

// Brute-force oracle: label-preserving isomorphism on small graphs.
namespace {

struct Tiny {
    int reagents = 2;
    std::vector<std::pair<int, int>> mix_in;  // node ids: 0..R-1 sources, R.. mixes
    std::vector<int> t_mix;
    std::vector<int> out, waste;  // mix ids delivered
};

Tiny random_tiny(std::mt19937& rng)
{
    Tiny t;
    t.reagents = 2;
    const int m = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<int> cap;  // remaining uses per node
    for (int i = 0; i < t.reagents; ++i) cap.push_back(1000);
    for (int i = 0; i < m; ++i) {
        std::vector<int> avail;
        for (int j = 0; j < static_cast<int>(cap.size()); ++j)
            if (cap[j] > 0) avail.push_back(j);
        auto pick = [&] {
            std::vector<int> a;
            for (int j : avail)
                if (cap[j] > 0) a.push_back(j);
            int x = a[std::uniform_int_distribution<std::size_t>(0, a.size() - 1)(rng)];
            --cap[x];
            return x;
        };
        int a = pick(), b = pick();
        t.mix_in.emplace_back(a, b);
        t.t_mix.push_back(std::uniform_int_distribution<int>(2, 3)(rng));
        cap.push_back(2);
    }
    for (int j = t.reagents; j < static_cast<int>(cap.size()); ++j)
        while (cap[j]-- > 0) {
            int r = std::uniform_int_distribution<int>(0, 2)(rng);
            if (r == 0) t.out.push_back(j);
            else if (r == 1) t.waste.push_back(j);
        }
    return t;
}

SeqGraph to_graph(const Tiny& t)
{
    std::string s = "reagents A B\nnode s0 dispense A\nnode s1 dispense B\n";
    for (std::size_t i = 0; i < t.mix_in.size(); ++i) s += "node n" + std::to_string(i + 2) + " mix " + std::to_string(t.t_mix[i]) + "\n";
    s += "node o output\nnode w waste\n";
    auto id = [&](int j) { return (j < t.reagents ? "s" : "n") + std::to_string(j); };
    for (std::size_t i = 0; i < t.mix_in.size(); ++i) {
        s += "edge " + id(t.mix_in[i].first) + " n" + std::to_string(i + 2) + "\n";
        s += "edge " + id(t.mix_in[i].second) + " n" + std::to_string(i + 2) + "\n";
    }
    for (int j : t.out) s += "edge " + id(j) + " o\n";
    for (int j : t.waste) s += "edge " + id(j) + " w\n";
    return parse_input_sg(s);
}

using Edge = std::pair<int, int>;

std::multiset<Edge> edges_under(const Tiny& t, const std::vector<int>& perm)
{
    // terminals: -1 output, -2 waste
    auto map = [&](int j) { return j < t.reagents ? j : perm[j - t.reagents] + t.reagents; };
    std::multiset<Edge> e;
    for (std::size_t i = 0; i < t.mix_in.size(); ++i) {
        int to = map(static_cast<int>(i) + t.reagents);
        e.insert({map(t.mix_in[i].first), to});
        e.insert({map(t.mix_in[i].second), to});
    }
    for (int j : t.out) e.insert({map(j), -1});
    for (int j : t.waste) e.insert({map(j), -2});
    return e;
}

bool isomorphic(const Tiny& a, const Tiny& b)
{
    if (a.mix_in.size() != b.mix_in.size()) return false;
    std::vector<int> perm(a.mix_in.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> id(perm);
    const auto eb = edges_under(b, id);
    do {
        bool times = true;
        for (std::size_t i = 0; i < perm.size(); ++i) times = times && a.t_mix[i] == b.t_mix[perm[i]];
        if (times && edges_under(a, perm) == eb) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

Tiny permuted(const Tiny& a, std::mt19937& rng)
{
    const int R = a.reagents;
    const int m = static_cast<int>(a.mix_in.size());
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    // keep producers before consumers
    for (int tries = 0; tries < 20; ++tries) {
        std::shuffle(perm.begin(), perm.end(), rng);
        bool ok = true;
        for (int i = 0; i < m; ++i)
            for (int j : {a.mix_in[i].first, a.mix_in[i].second})
                if (j >= R && perm[j - R] >= perm[i]) ok = false;
        if (ok) break;
        std::iota(perm.begin(), perm.end(), 0);
    }
    auto map = [&](int j) { return j < R ? j : perm[j - R] + R; };
    Tiny b = a;
    for (int i = 0; i < m; ++i) {
        b.mix_in[perm[i]] = {map(a.mix_in[i].first), map(a.mix_in[i].second)};
        b.t_mix[perm[i]] = a.t_mix[i];
    }
    for (auto& j : b.out) j = map(j);
    for (auto& j : b.waste) j = map(j);
    return b;
}

using Frac = std::pair<long, long>;  // A share as num/den

std::multiset<Frac> exact_mix_cfs(const Tiny& t)
{
    std::vector<Frac> cf{{1, 1}, {0, 1}};
    std::multiset<Frac> out;
    for (auto [a, b] : t.mix_in) {
        long num = cf[a].first * cf[b].second + cf[b].first * cf[a].second;
        long den = 2 * cf[a].second * cf[b].second;
        long g = std::gcd(num, den);
        cf.push_back({num / g, den / g});
        out.insert(cf.back());
    }
    return out;
}

}  // namespace

TEST(ConformanceOracle, IsomorphicGraphsConform)
{
    std::mt19937 rng(5);
    int iso = 0, pass = 0;
    for (int i = 0; i < 3000; ++i) {
        Tiny a = random_tiny(rng), b = random_tiny(rng);
        if (i % 2) b = permuted(a, rng);
        const bool same = isomorphic(a, b);
        const bool ok = conformance(to_graph(a), to_graph(b), 5, std::nullopt, 0).passed();
        iso += same;
        pass += ok;
        if (same) EXPECT_TRUE(ok) << serialize_sg(to_graph(a)) << "--\n" << serialize_sg(to_graph(b));
        if (ok) EXPECT_EQ(exact_mix_cfs(a), exact_mix_cfs(b));
    }
    EXPECT_GT(iso, 50);
    EXPECT_GE(pass, iso);
}

TEST(ConformanceOracle, RelabelledCopyConforms)
{
    std::mt19937 rng(9);
    for (int i = 0; i < 500; ++i) {
        Tiny a = random_tiny(rng);
        Tiny b = permuted(a, rng);
        SeqGraph g = to_graph(a);
        SeqGraph h = g;
        std::shuffle(h.reagents.begin(), h.reagents.end(), rng);
        for (auto& n : h.nodes) n.id = "x_" + n.id;
        annotate_cf(h);
        EXPECT_TRUE(conformance(g, h, 5, std::nullopt, 0).passed()) << serialize_sg(g);
        EXPECT_TRUE(isomorphic(a, b));
    }
}
