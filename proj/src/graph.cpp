#include "dmfv/graph.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace dmfv {

std::string_view to_string(NodeKind kind)
{
    switch (kind) {
    case NodeKind::Source: return "dispense";
    case NodeKind::Mix: return "mix";
    case NodeKind::Output: return "output";
    case NodeKind::Waste: return "waste";
    case NodeKind::Start: return "start";
    case NodeKind::End: return "end";
    }
    return "?";
}

GraphError::GraphError(Kind kind, int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), kind_(kind), line_(line)
{
}

std::optional<std::size_t> SeqGraph::find(std::string_view id) const
{
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return i;
    return std::nullopt;
}

std::vector<std::size_t> SeqGraph::preds(std::size_t node) const
{
    std::vector<std::size_t> out;
    for (const auto& e : edges)
        if (e.to == node) out.push_back(e.from);
    return out;
}

std::vector<std::size_t> SeqGraph::succs(std::size_t node) const
{
    std::vector<std::size_t> out;
    for (const auto& e : edges)
        if (e.from == node) out.push_back(e.to);
    return out;
}

// ---------------------------------------------------------------------------
// .sg text

namespace {

std::vector<std::string> tokens(std::string_view line)
{
    std::vector<std::string> out;
    std::istringstream in{std::string(line)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

int to_int(const std::string& s, int line)
{
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw GraphError(GraphError::Kind::Syntax, line, "expected an integer, got '" + s + "'");
    return v;
}

}  // namespace

SeqGraph parse_input_sg(std::string_view text)
{
    SeqGraph g;
    bool have_reagents = false;
    int lineno = 0;
    std::vector<int> node_line;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++lineno;
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        auto tk = tokens(line);
        if (tk.empty()) continue;
        if (tk[0] == "reagents") {
            if (have_reagents || !g.nodes.empty()) throw GraphError(GraphError::Kind::Syntax, lineno, "reagents must come first, once");
            if (tk.size() < 2) throw GraphError(GraphError::Kind::Syntax, lineno, "reagents needs at least one name");
            g.reagents.assign(tk.begin() + 1, tk.end());
            have_reagents = true;
        } else if (tk[0] == "node") {
            if (tk.size() < 3) throw GraphError(GraphError::Kind::Syntax, lineno, "expected: node <id> <kind> ...");
            if (g.find(tk[1])) throw GraphError(GraphError::Kind::DuplicateNode, lineno, "node '" + tk[1] + "' declared twice");
            SGNode n;
            n.id = tk[1];
            const std::string& kind = tk[2];
            if (kind == "dispense") {
                if (tk.size() != 4) throw GraphError(GraphError::Kind::Syntax, lineno, "expected: node <id> dispense <reagent>");
                n.kind = NodeKind::Source;
                n.reagent = tk[3];
                auto it = std::find(g.reagents.begin(), g.reagents.end(), n.reagent);
                if (it == g.reagents.end()) {
                    if (have_reagents) throw GraphError(GraphError::Kind::UnknownReagent, lineno, "reagent '" + n.reagent + "' not declared");
                    g.reagents.push_back(n.reagent);
                }
            } else if (kind == "mix") {
                if (tk.size() != 4 && tk.size() != 8) throw GraphError(GraphError::Kind::Syntax, lineno, "expected: node <id> mix <t_mix> [ts <t> te <t>]");
                n.kind = NodeKind::Mix;
                n.t_mix_spec = to_int(tk[3], lineno);
                if (*n.t_mix_spec < 1) throw GraphError(GraphError::Kind::Syntax, lineno, "mixing time must be positive");
                if (tk.size() == 8) {
                    if (tk[4] != "ts" || tk[6] != "te") throw GraphError(GraphError::Kind::Syntax, lineno, "expected ts <t> te <t>");
                    n.t_s = to_int(tk[5], lineno);
                    n.t_e = to_int(tk[7], lineno);
                    if (*n.t_s >= *n.t_e) throw GraphError(GraphError::Kind::Syntax, lineno, "ts must be before te");
                }
            } else if (kind == "output" || kind == "waste") {
                if (tk.size() != 3) throw GraphError(GraphError::Kind::Syntax, lineno, "unexpected tokens after " + kind);
                n.kind = kind == "output" ? NodeKind::Output : NodeKind::Waste;
            } else {
                throw GraphError(GraphError::Kind::Syntax, lineno, "unknown node kind '" + kind + "'");
            }
            g.nodes.push_back(std::move(n));
            node_line.push_back(lineno);
        } else if (tk[0] == "edge") {
            if (tk.size() != 3) throw GraphError(GraphError::Kind::Syntax, lineno, "expected: edge <from> <to>");
            auto a = g.find(tk[1]);
            auto b = g.find(tk[2]);
            if (!a) throw GraphError(GraphError::Kind::UnknownNode, lineno, "unknown node '" + tk[1] + "'");
            if (!b) throw GraphError(GraphError::Kind::UnknownNode, lineno, "unknown node '" + tk[2] + "'");
            g.edges.push_back({*a, *b});
        } else {
            throw GraphError(GraphError::Kind::Syntax, lineno, "unknown directive '" + tk[0] + "'");
        }
    }
    validate_graph(g);
    annotate_cf(g);
    return g;
}

std::string serialize_sg(const SeqGraph& g)
{
    std::ostringstream out;
    out << "reagents";
    for (const auto& r : g.reagents) out << ' ' << r;
    out << '\n';
    for (const auto& n : g.nodes) {
        if (n.kind == NodeKind::Start || n.kind == NodeKind::End) continue;
        out << "node " << n.id << ' ' << to_string(n.kind);
        if (n.kind == NodeKind::Source) out << ' ' << n.reagent;
        if (n.kind == NodeKind::Mix) {
            int tm = n.t_mix_spec.value_or(n.t_s && n.t_e ? *n.t_e - *n.t_s - 1 : 1);
            out << ' ' << tm;
            if (n.t_s && n.t_e) out << " ts " << *n.t_s << " te " << *n.t_e;
        }
        out << '\n';
    }
    for (const auto& e : g.edges) {
        const auto& a = g.nodes[e.from];
        const auto& b = g.nodes[e.to];
        if (a.kind == NodeKind::Start || b.kind == NodeKind::End) continue;
        out << "edge " << a.id << ' ' << b.id << '\n';
    }
    return out.str();
}

std::vector<std::size_t> topo_order(const SeqGraph& g)
{
    std::vector<int> indeg(g.nodes.size(), 0);
    for (const auto& e : g.edges) ++indeg[e.to];
    std::queue<std::size_t> q;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (indeg[i] == 0) q.push(i);
    std::vector<std::size_t> order;
    std::vector<std::vector<std::size_t>> out(g.nodes.size());
    for (const auto& e : g.edges) out[e.from].push_back(e.to);
    while (!q.empty()) {
        auto v = q.front();
        q.pop();
        order.push_back(v);
        for (auto w : out[v])
            if (--indeg[w] == 0) q.push(w);
    }
    if (order.size() != g.nodes.size()) throw GraphError(GraphError::Kind::CycleDetected, 0, "sequencing graph has a cycle");
    return order;
}

void validate_graph(const SeqGraph& g)
{
    topo_order(g);
    std::vector<int> in(g.nodes.size(), 0), out(g.nodes.size(), 0);
    for (const auto& e : g.edges) {
        ++out[e.from];
        ++in[e.to];
    }
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const auto& n = g.nodes[i];
        auto bad = [&](const std::string& why) { throw GraphError(GraphError::Kind::BadArity, 0, "node '" + n.id + "': " + why); };
        switch (n.kind) {
        case NodeKind::Source:
            if (in[i] != 0) bad("dispense node has predecessors");
            break;
        case NodeKind::Mix:
            if (in[i] != 2) bad("mix node needs exactly 2 inputs, has " + std::to_string(in[i]));
            if (out[i] > 2) bad("mix node produces 2 droplets, has " + std::to_string(out[i]) + " uses");
            break;
        case NodeKind::Output:
        case NodeKind::Waste:
            if (out[i] != 0) bad("terminal node has successors");
            break;
        default:
            break;
        }
    }
}

void annotate_cf(SeqGraph& g)
{
    const std::size_t R = g.reagents.size();
    for (auto v : topo_order(g)) {
        auto& n = g.nodes[v];
        if (n.kind == NodeKind::Source) {
            auto it = std::find(g.reagents.begin(), g.reagents.end(), n.reagent);
            if (it == g.reagents.end()) throw GraphError(GraphError::Kind::UnknownReagent, 0, "reagent '" + n.reagent + "' not declared");
            n.cf = CFVector::unit(static_cast<std::size_t>(it - g.reagents.begin()), R);
        } else if (n.kind == NodeKind::Mix) {
            auto p = g.preds(v);
            if (p.size() != 2 || !g.nodes[p[0]].cf || !g.nodes[p[1]].cf)
                throw GraphError(GraphError::Kind::BadArity, 0, "mix node '" + n.id + "' lacks two annotated inputs");
            n.cf = cf_mix(*g.nodes[p[0]].cf, *g.nodes[p[1]].cf);
        }
    }
}

// ---------------------------------------------------------------------------
// Reconstruction

SeqGraph reconstruct(const Trace& trace)
{
    SeqGraph g;
    g.reagents = trace.reagents;
    std::map<int, std::size_t> node_of_origin;
    std::map<std::string, std::size_t> source_of;
    int outputs = 0, wastes = 0;
    for (std::size_t i = 0; i < trace.header.reservoirs.size(); ++i) {
        const auto& r = trace.header.reservoirs[i];
        const int origin = static_cast<int>(i) + 1;
        if (r.kind == ReservoirKind::Reagent) {
            auto it = source_of.find(r.reagent);
            if (it == source_of.end()) {
                SGNode n;
                n.id = r.reagent;
                n.kind = NodeKind::Source;
                n.reagent = r.reagent;
                auto k = std::find(g.reagents.begin(), g.reagents.end(), r.reagent) - g.reagents.begin();
                n.cf = CFVector::unit(static_cast<std::size_t>(k), g.reagents.size());
                g.nodes.push_back(std::move(n));
                it = source_of.emplace(r.reagent, g.nodes.size() - 1).first;
            }
            node_of_origin[origin] = it->second;
        } else {
            SGNode n;
            n.kind = r.kind == ReservoirKind::Output ? NodeKind::Output : NodeKind::Waste;
            n.id = (r.kind == ReservoirKind::Output ? "O" + std::to_string(++outputs) : "W" + std::to_string(++wastes));
            g.nodes.push_back(std::move(n));
            node_of_origin[origin] = g.nodes.size() - 1;
        }
    }
    auto lookup = [&](int origin) {
        auto it = node_of_origin.find(origin);
        if (it == node_of_origin.end())
            throw GraphError(GraphError::Kind::OrphanDroplet, 0, "droplet id " + std::to_string(origin) + " has no node");
        return it->second;
    };
    int mixes = 0;
    for (const auto& m : trace.mixes) {
        SGNode n;
        n.id = "v" + std::to_string(++mixes);
        n.kind = NodeKind::Mix;
        n.cf = m.cf;
        n.t_s = m.t_s;
        n.t_e = m.t_e;
        const auto a = lookup(m.input_origin_a);
        const auto b = lookup(m.input_origin_b);
        g.nodes.push_back(std::move(n));
        const auto v = g.nodes.size() - 1;
        g.edges.push_back({a, v});
        g.edges.push_back({b, v});
        node_of_origin[m.output_origin] = v;
    }
    for (const auto& d : trace.deliveries) g.edges.push_back({lookup(d.droplet_origin), lookup(d.reservoir_origin)});
    return g;
}

// ---------------------------------------------------------------------------
// Conformance

namespace {

struct Sig {
    NodeKind kind = NodeKind::Mix;
    std::string reagent;
    std::vector<std::uint64_t> num;

    auto operator<=>(const Sig&) const = default;
};

struct Prepared {
    const SeqGraph* g = nullptr;
    std::vector<int> level;            // -1 for isolated nodes
    std::vector<std::optional<CFVector>> cf;  // over the union universe, rounded
};

CFVector lift(const CFVector& cf, const std::vector<std::string>& from, const std::vector<std::string>& to, int n)
{
    return round_cf(cf_reindex(cf, from, to), n);
}

Prepared prepare(const SeqGraph& g, const std::vector<std::string>& universe, int n)
{
    Prepared p;
    p.g = &g;
    p.level.assign(g.nodes.size(), -1);
    p.cf.resize(g.nodes.size());
    std::vector<int> in(g.nodes.size(), 0), out(g.nodes.size(), 0);
    for (const auto& e : g.edges) {
        ++in[e.to];
        ++out[e.from];
    }
    // Start dummy feeds every non-isolated root at level 1; longest path gives the level.
    for (auto v : topo_order(g)) {
        if (in[v] == 0 && out[v] == 0) continue;
        if (in[v] == 0) p.level[v] = 1;
        for (auto w : g.succs(v)) p.level[w] = std::max(p.level[w], p.level[v] + 1);
    }
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (g.nodes[i].cf) p.cf[i] = lift(*g.nodes[i].cf, g.reagents, universe, n);
    return p;
}

Sig signature(const Prepared& p, std::size_t v)
{
    Sig s;
    const auto& node = p.g->nodes[v];
    s.kind = node.kind;
    s.reagent = node.reagent;
    if (p.cf[v]) {
        const auto& cf = *p.cf[v];
        for (std::size_t k = 0; k < cf.size(); ++k) s.num.push_back(cf.num(k));
        s.num.push_back(static_cast<std::uint64_t>(cf.exp()));
    }
    return s;
}

std::string ratio_of(const Prepared& p, std::size_t v, int n)
{
    const auto& node = p.g->nodes[v];
    if (node.kind == NodeKind::Source) return node.reagent;
    return p.cf[v] ? cf_ratio_text(*p.cf[v], n) : "?";
}

int duration(const SGNode& n)
{
    if (n.t_s && n.t_e) return *n.t_e - *n.t_s - 1;
    return n.t_mix_spec.value_or(0);
}

std::string node_label(const SGNode& n)
{
    std::string s = n.id;
    if (n.t_s && n.t_e) s += " [" + std::to_string(*n.t_s) + "," + std::to_string(*n.t_e) + "]";
    return s;
}

Violation realization(FailureKind kind, std::string detail, std::string where)
{
    RawFailure f;
    f.kind = kind;
    f.detail = std::move(detail);
    Violation v = classify(f);
    v.instruction = std::move(where);
    return v;
}

/// CF multiset delivered into terminals of one kind.
std::vector<std::pair<Sig, std::string>> terminal_bag(const Prepared& p, NodeKind kind, int n)
{
    std::vector<std::pair<Sig, std::string>> bag;
    const auto& g = *p.g;
    for (const auto& e : g.edges) {
        if (g.nodes[e.to].kind != kind) continue;
        Sig s = signature(p, e.from);
        s.kind = kind;
        s.reagent.clear();
        std::string text = p.cf[e.from] ? cf_ratio_text(*p.cf[e.from], n) : "?";
        bag.emplace_back(std::move(s), std::move(text));
    }
    std::sort(bag.begin(), bag.end());
    return bag;
}

void compare_bags(std::vector<std::pair<Sig, std::string>> in, std::vector<std::pair<Sig, std::string>> syn,
                  const std::string& what, Report& rep)
{
    std::vector<std::string> missing, extra;
    std::size_t i = 0, j = 0;
    while (i < in.size() || j < syn.size()) {
        if (j == syn.size() || (i < in.size() && in[i].first < syn[j].first)) missing.push_back(in[i++].second);
        else if (i == in.size() || syn[j].first < in[i].first) extra.push_back(syn[j++].second);
        else {
            ++i;
            ++j;
        }
    }
    const std::size_t k = std::min(missing.size(), extra.size());
    for (std::size_t x = 0; x < k; ++x)
        rep.violations.push_back(realization(FailureKind::WrongOutput, what + " ratio " + extra[x] + " delivered, " + missing[x] + " specified", what));
    for (std::size_t x = k; x < missing.size(); ++x)
        rep.violations.push_back(realization(FailureKind::WrongOutput, what + " ratio " + missing[x] + " specified but never delivered", what));
    for (std::size_t x = k; x < extra.size(); ++x)
        rep.violations.push_back(realization(FailureKind::WrongOutput, what + " ratio " + extra[x] + " delivered but not specified", what));
}

}  // namespace

Report conformance(const SeqGraph& input, const SeqGraph& synth, int accuracy, std::optional<int> t_max, int final_t,
                   const ConformanceOptions& options)
{
    Report rep;
    rep.final_t = final_t;
    std::vector<std::string> universe = input.reagents;
    for (const auto& r : synth.reagents)
        if (std::find(universe.begin(), universe.end(), r) == universe.end()) universe.push_back(r);

    const Prepared pi = prepare(input, universe, accuracy);
    const Prepared ps = prepare(synth, universe, accuracy);

    if (options.scope == ConformanceScope::Full) {
        int max_level = 0;
        for (int l : pi.level) max_level = std::max(max_level, l);
        for (int l : ps.level) max_level = std::max(max_level, l);
        for (int level = 1; level <= max_level; ++level) {
            std::map<Sig, std::vector<std::size_t>> gi, gs;
            auto collect = [&](const Prepared& p, std::map<Sig, std::vector<std::size_t>>& into) {
                for (std::size_t v = 0; v < p.g->nodes.size(); ++v) {
                    const auto k = p.g->nodes[v].kind;
                    if (p.level[v] != level || (k != NodeKind::Mix && k != NodeKind::Source)) continue;
                    into[signature(p, v)].push_back(v);
                }
            };
            collect(pi, gi);
            collect(ps, gs);

            std::vector<std::size_t> lost_in, lost_syn;
            std::set<Sig> keys;
            for (const auto& [s, v] : gi) keys.insert(s);
            for (const auto& [s, v] : gs) keys.insert(s);
            for (const auto& s : keys) {
                auto vi = gi.count(s) ? gi[s] : std::vector<std::size_t>{};
                auto vs = gs.count(s) ? gs[s] : std::vector<std::size_t>{};
                if (s.kind == NodeKind::Mix) {
                    auto by_duration = [](const Prepared& p) {
                        return [&p](std::size_t a, std::size_t b) { return duration(p.g->nodes[a]) > duration(p.g->nodes[b]); };
                    };
                    std::stable_sort(vi.begin(), vi.end(), by_duration(pi));
                    std::stable_sort(vs.begin(), vs.end(), by_duration(ps));
                    const std::size_t k = std::min(vi.size(), vs.size());
                    for (std::size_t x = 0; x < k; ++x) {
                        const auto& spec = input.nodes[vi[x]];
                        const auto& real = synth.nodes[vs[x]];
                        const int want = spec.t_mix_spec ? *spec.t_mix_spec : duration(spec);
                        const int got = (real.t_s && real.t_e) ? duration(real) : want;
                        if (got < want) {
                            rep.violations.push_back(realization(FailureKind::MixShort,
                                                                 "mixed " + std::to_string(got) + " < " + std::to_string(want),
                                                                 node_label(real)));
                        } else if (got > want) {
                            rep.notes.push_back(node_label(real) + " mixed " + std::to_string(got) + " > " + std::to_string(want) +
                                                " specified");
                        }
                    }
                    for (std::size_t x = k; x < vi.size(); ++x) lost_in.push_back(vi[x]);
                    for (std::size_t x = k; x < vs.size(); ++x) lost_syn.push_back(vs[x]);
                } else {
                    // reservoirs are shared, so a reagent counts once per level
                    vi.resize(std::min<std::size_t>(vi.size(), 1));
                    vs.resize(std::min<std::size_t>(vs.size(), 1));
                    const std::size_t k = std::min(vi.size(), vs.size());
                    for (std::size_t x = k; x < vi.size(); ++x) lost_in.push_back(vi[x]);
                    for (std::size_t x = k; x < vs.size(); ++x) lost_syn.push_back(vs[x]);
                }
            }
            const std::size_t k = std::min(lost_in.size(), lost_syn.size());
            for (std::size_t x = 0; x < k; ++x) {
                const bool src = synth.nodes[lost_syn[x]].kind == NodeKind::Source || input.nodes[lost_in[x]].kind == NodeKind::Source;
                std::string detail = src ? "source " + ratio_of(ps, lost_syn[x], accuracy) + " used, " +
                                               ratio_of(pi, lost_in[x], accuracy) + " specified"
                                         : "ratio " + ratio_of(ps, lost_syn[x], accuracy) + " produced, " +
                                               ratio_of(pi, lost_in[x], accuracy) + " specified";
                rep.violations.push_back(realization(src ? FailureKind::SourceMismatch : FailureKind::WrongMix, detail,
                                                     node_label(synth.nodes[lost_syn[x]])));
            }
            for (std::size_t x = k; x < lost_in.size(); ++x)
                rep.violations.push_back(realization(FailureKind::MissingMix,
                                                     "ratio " + ratio_of(pi, lost_in[x], accuracy) + " specified but not produced",
                                                     input.nodes[lost_in[x]].id));
            for (std::size_t x = k; x < lost_syn.size(); ++x)
                rep.violations.push_back(realization(FailureKind::UnexpectedMix,
                                                     "ratio " + ratio_of(ps, lost_syn[x], accuracy) + " produced but not specified",
                                                     node_label(synth.nodes[lost_syn[x]])));
        }
    }

    compare_bags(terminal_bag(pi, NodeKind::Output, accuracy), terminal_bag(ps, NodeKind::Output, accuracy), "output", rep);
    if (options.scope == ConformanceScope::Full && !options.ignore_waste)
        compare_bags(terminal_bag(pi, NodeKind::Waste, accuracy), terminal_bag(ps, NodeKind::Waste, accuracy), "waste", rep);

    if (t_max && final_t > *t_max) {
        RawFailure f;
        f.kind = FailureKind::TmaxExceeded;
        f.detail = "completes at t=" + std::to_string(final_t) + " > " + std::to_string(*t_max);
        Violation v = classify(f);
        v.t = final_t;
        rep.violations.push_back(v);
    }
    return rep;
}

std::vector<CFVector> output_cfs(const SeqGraph& g, int accuracy, const std::vector<std::string>& reagents)
{
    std::vector<CFVector> out;
    for (const auto& e : g.edges) {
        if (g.nodes[e.to].kind != NodeKind::Output) continue;
        const auto& src = g.nodes[e.from];
        if (src.cf) out.push_back(lift(*src.cf, g.reagents, reagents, accuracy));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string to_dot(const SeqGraph& g, int accuracy)
{
    std::ostringstream out;
    out << "digraph sg {\n";
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const auto& n = g.nodes[i];
        std::string label = n.id;
        if (n.kind == NodeKind::Mix && n.cf) label += "\\n" + cf_text(*n.cf, g.reagents, accuracy);
        if (n.t_s && n.t_e) label += "\\n[" + std::to_string(*n.t_s) + "," + std::to_string(*n.t_e) + "]";
        else if (n.t_mix_spec) label += "\\nt=" + std::to_string(*n.t_mix_spec);
        const char* shape = n.kind == NodeKind::Mix ? "ellipse" : (n.kind == NodeKind::Source ? "box" : "doublecircle");
        out << "  n" << i << " [label=\"" << label << "\", shape=" << shape << "];\n";
    }
    for (const auto& e : g.edges) out << "  n" << e.from << " -> n" << e.to << ";\n";
    out << "}\n";
    return out.str();
}

}  // namespace dmfv
