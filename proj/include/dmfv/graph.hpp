#pragma once

// Sequencing graphs: the `.sg` input description, reconstruction of the
// realized graph from a verified trace, and conformance checking.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dmfv/cf.hpp"
#include "dmfv/diag.hpp"
#include "dmfv/fluidics.hpp"

namespace dmfv {

enum class NodeKind { Source, Mix, Output, Waste, Start, End };

std::string_view to_string(NodeKind kind);

struct SGNode {
    std::string id;
    NodeKind kind = NodeKind::Mix;
    std::string reagent;            // Source only
    std::optional<CFVector> cf;     // Source / Mix
    std::optional<int> t_mix_spec;  // input graphs
    std::optional<int> t_s;         // realized graphs
    std::optional<int> t_e;

    bool operator==(const SGNode&) const = default;
};

struct SGEdge {
    std::size_t from = 0;
    std::size_t to = 0;

    bool operator==(const SGEdge&) const = default;
};

struct SeqGraph {
    std::vector<std::string> reagents;  // component order of every CFVector in the graph
    std::vector<SGNode> nodes;
    std::vector<SGEdge> edges;  // repeated edges carry multiplicity

    std::optional<std::size_t> find(std::string_view id) const;
    std::vector<std::size_t> preds(std::size_t node) const;  // with multiplicity
    std::vector<std::size_t> succs(std::size_t node) const;
    bool operator==(const SeqGraph&) const = default;
};

class GraphError : public std::runtime_error {
public:
    enum class Kind { Syntax, UnknownNode, DuplicateNode, CycleDetected, BadArity, OrphanDroplet, UnknownReagent };
    GraphError(Kind kind, int line, const std::string& what);
    Kind kind() const { return kind_; }
    int line() const { return line_; }

private:
    Kind kind_;
    int line_;
};

SeqGraph parse_input_sg(std::string_view text);
std::string serialize_sg(const SeqGraph& graph);
/// Throws GraphError on cycles or arity problems.
void validate_graph(const SeqGraph& graph);
/// Fills cf of every Source/Mix node from the structure (sources are unit vectors).
void annotate_cf(SeqGraph& graph);
/// Nodes in a topological order; throws GraphError(CycleDetected).
std::vector<std::size_t> topo_order(const SeqGraph& graph);

SeqGraph reconstruct(const Trace& trace);

enum class ConformanceScope { Full, OutputsOnly };

struct ConformanceOptions {
    ConformanceScope scope = ConformanceScope::Full;
    bool ignore_waste = false;
};

Report conformance(const SeqGraph& input, const SeqGraph& synth, int accuracy, std::optional<int> t_max, int final_t,
                   const ConformanceOptions& options = {});

/// Rounded CF vectors delivered to output reservoirs, sorted; used for path comparisons.
std::vector<CFVector> output_cfs(const SeqGraph& graph, int accuracy, const std::vector<std::string>& reagents);

std::string to_dot(const SeqGraph& graph, int accuracy);

}  // namespace dmfv
