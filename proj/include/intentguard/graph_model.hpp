#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentguard/errors.hpp"

namespace intentguard {

/// Declared provenance of a planned tool parameter: the user's instruction,
/// the output of an upstream plan node, or a concrete literal value.
class ParamSource {
public:
    enum class Kind { UserInput, NodeOutput, Literal };

    static ParamSource user_input();
    static ParamSource node_output(std::string source_node_id);
    static ParamSource literal(nlohmann::json value);

    Kind kind() const noexcept { return kind_; }
    /// Valid only for NodeOutput.
    const std::string& source_node_id() const { return source_node_id_; }
    /// Valid only for Literal.
    const nlohmann::json& value() const { return value_; }

    /// Renders back into the plan-file representation: the placeholder
    /// token for UserInput/NodeOutput, the raw value for Literal.
    nlohmann::json to_json() const;

    bool operator==(const ParamSource& other) const;

private:
    ParamSource() = default;

    Kind kind_ = Kind::Literal;
    std::string source_node_id_;
    nlohmann::json value_;
};

/// One planned tool call.
struct ToolNode {
    std::string id;
    std::string node_type = "Tool";
    std::string name;
    std::string description;
    std::map<std::string, ParamSource> parameters;

    bool operator==(const ToolNode& other) const = default;
};

/// Directed edge: target is a valid successor of source. The condition is
/// an opaque label; branch selection belongs to the agent, the monitor only
/// checks successor membership.
struct Edge {
    std::string source_id;
    std::string target_id;
    std::string condition;

    bool operator==(const Edge& other) const = default;
};

/// The pre-planned DAG of tool calls that bounds the agent's allowed
/// behavior. Immutable after construction; update() returns a new revision.
class IntentGraph {
public:
    /// Validates structure: unique non-empty ids, resolvable references,
    /// acyclicity. Throws SchemaError / CycleError / DanglingRefError.
    IntentGraph(std::vector<ToolNode> nodes, std::vector<Edge> edges, int revision = 0);

    IntentGraph() = default;

    const std::vector<ToolNode>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    int revision() const noexcept { return revision_; }
    bool empty() const noexcept { return nodes_.empty(); }

    bool contains(std::string_view node_id) const;
    const ToolNode& node(std::string_view node_id) const;
    /// True if any node's tool name equals `tool_name`.
    bool has_tool(std::string_view tool_name) const;

    nlohmann::json to_json() const;

    /// Node/edge comparison, ignoring revision. Round-tripping through the
    /// plan file format preserves this.
    bool structurally_equal(const IntentGraph& other) const;

    bool operator==(const IntentGraph& other) const;

private:
    std::vector<ToolNode> nodes_;
    std::vector<Edge> edges_;
    int revision_ = 0;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// Parses a plan-file value into a ParamSource. Exactly `{{user.input}}`
/// maps to UserInput and exactly `{{nodes.<id>.output}}` to NodeOutput;
/// placeholder syntax with accessors, embedded text, or other damage is a
/// PlaceholderError; everything else is a Literal.
ParamSource parse_param_source(const nlohmann::json& value);

/// Parses and validates the strict plan JSON (root keys "nodes"/"edges",
/// node keys id/type/name/description/parameters, edge keys
/// source_id/target_id/condition; unknown keys rejected). revision = 0.
IntentGraph parse_intent_graph(std::string_view raw);
IntentGraph parse_intent_graph(const nlohmann::json& doc);

/// Node ids with no incoming edge, lexicographic order.
std::vector<std::string> roots(const IntentGraph& graph);

/// Outgoing (target id, condition) pairs, ordered by target id.
/// Throws DanglingRefError for an unknown node id.
std::vector<std::pair<std::string, std::string>> successors(const IntentGraph& graph,
                                                            std::string_view node_id);

/// Returns a new revision with `approved` inserted (under a fresh id if its
/// own collides) and, when anchor is set, an edge anchor -> approved labeled
/// "Adjudicated". Never removes anything and cannot introduce a cycle.
IntentGraph update_graph(const IntentGraph& graph, const std::optional<std::string>& anchor,
                         ToolNode approved);

} // namespace intentguard
