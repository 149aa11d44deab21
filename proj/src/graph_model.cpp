#include "intentguard/graph_model.hpp"

#include <algorithm>
#include <deque>
#include <regex>
#include <set>

namespace intentguard {

namespace {

using nlohmann::json;

const std::regex kNodeOutputPattern(R"(^\{\{nodes\.([A-Za-z0-9_-]+)\.output\}\}$)");

constexpr std::string_view kUserInputToken = "{{user.input}}";

bool looks_like_placeholder(std::string_view s) {
    return s.find("{{") != std::string_view::npos || s.find("}}") != std::string_view::npos;
}

void require_exact_keys(const json& obj, std::initializer_list<std::string_view> keys,
                        std::string_view what) {
    if (!obj.is_object()) {
        throw SchemaError(std::string(what) + " must be a JSON object");
    }
    for (auto key : keys) {
        if (!obj.contains(key)) {
            throw SchemaError(std::string(what) + " is missing key \"" + std::string(key) + "\"");
        }
    }
    for (const auto& [key, _] : obj.items()) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw SchemaError(std::string(what) + " has unknown key \"" + key + "\"");
        }
    }
}

std::string require_string(const json& obj, std::string_view key, std::string_view what) {
    const auto& v = obj.at(std::string(key));
    if (!v.is_string()) {
        throw SchemaError(std::string(what) + " key \"" + std::string(key) +
                          "\" must be a string");
    }
    return v.get<std::string>();
}

// Kahn's algorithm; throws CycleError if any node is unreachable from the
// zero-in-degree frontier.
void require_acyclic(const std::vector<ToolNode>& nodes, const std::vector<Edge>& edges) {
    std::map<std::string, int> in_degree;
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& n : nodes) {
        in_degree[n.id] = 0;
    }
    for (const auto& e : edges) {
        adj[e.source_id].push_back(e.target_id);
        in_degree[e.target_id]++;
    }
    std::deque<std::string> frontier;
    for (const auto& [id, deg] : in_degree) {
        if (deg == 0) {
            frontier.push_back(id);
        }
    }
    std::size_t visited = 0;
    while (!frontier.empty()) {
        const std::string id = frontier.front();
        frontier.pop_front();
        ++visited;
        for (const auto& next : adj[id]) {
            if (--in_degree[next] == 0) {
                frontier.push_back(next);
            }
        }
    }
    if (visited != nodes.size()) {
        throw CycleError("edge relation is not acyclic");
    }
}

} // namespace

ParamSource ParamSource::user_input() {
    ParamSource p;
    p.kind_ = Kind::UserInput;
    return p;
}

ParamSource ParamSource::node_output(std::string source_node_id) {
    ParamSource p;
    p.kind_ = Kind::NodeOutput;
    p.source_node_id_ = std::move(source_node_id);
    return p;
}

ParamSource ParamSource::literal(nlohmann::json value) {
    ParamSource p;
    p.kind_ = Kind::Literal;
    p.value_ = std::move(value);
    return p;
}

nlohmann::json ParamSource::to_json() const {
    switch (kind_) {
    case Kind::UserInput:
        return std::string(kUserInputToken);
    case Kind::NodeOutput:
        return "{{nodes." + source_node_id_ + ".output}}";
    case Kind::Literal:
        return value_;
    }
    return nullptr;
}

bool ParamSource::operator==(const ParamSource& other) const {
    return kind_ == other.kind_ && source_node_id_ == other.source_node_id_ &&
           value_ == other.value_;
}

ParamSource parse_param_source(const nlohmann::json& value) {
    if (value.is_object() || value.is_array()) {
        throw SchemaError("parameter values must be scalars or placeholder strings");
    }
    if (!value.is_string()) {
        return ParamSource::literal(value);
    }
    const auto s = value.get<std::string>();
    if (s == kUserInputToken) {
        return ParamSource::user_input();
    }
    std::smatch m;
    if (std::regex_match(s, m, kNodeOutputPattern)) {
        return ParamSource::node_output(m[1].str());
    }
    if (looks_like_placeholder(s)) {
        throw PlaceholderError("malformed placeholder: \"" + s + "\"");
    }
    return ParamSource::literal(value);
}

IntentGraph::IntentGraph(std::vector<ToolNode> nodes, std::vector<Edge> edges, int revision)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), revision_(revision) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.id.empty()) {
            throw SchemaError("node id must be non-empty");
        }
        if (n.node_type != "Tool") {
            throw SchemaError("node \"" + n.id + "\" type must be \"Tool\"");
        }
        if (n.name.empty()) {
            throw SchemaError("node \"" + n.id + "\" name must be non-empty");
        }
        if (!index_.emplace(n.id, i).second) {
            throw SchemaError("duplicate node id \"" + n.id + "\"");
        }
    }
    for (const auto& e : edges_) {
        if (!contains(e.source_id)) {
            throw DanglingRefError("edge references unknown node \"" + e.source_id + "\"");
        }
        if (!contains(e.target_id)) {
            throw DanglingRefError("edge references unknown node \"" + e.target_id + "\"");
        }
        if (e.source_id == e.target_id) {
            throw CycleError("self-edge on node \"" + e.source_id + "\"");
        }
    }
    for (const auto& n : nodes_) {
        for (const auto& [param, source] : n.parameters) {
            if (source.kind() != ParamSource::Kind::NodeOutput) {
                continue;
            }
            if (!contains(source.source_node_id())) {
                throw DanglingRefError("node \"" + n.id + "\" parameter \"" + param +
                                       "\" references unknown node \"" +
                                       source.source_node_id() + "\"");
            }
            if (source.source_node_id() == n.id) {
                throw DanglingRefError("node \"" + n.id + "\" parameter \"" + param +
                                       "\" references its own node");
            }
        }
    }
    require_acyclic(nodes_, edges_);
}

bool IntentGraph::contains(std::string_view node_id) const {
    return index_.find(node_id) != index_.end();
}

const ToolNode& IntentGraph::node(std::string_view node_id) const {
    auto it = index_.find(node_id);
    if (it == index_.end()) {
        throw DanglingRefError("unknown node id \"" + std::string(node_id) + "\"");
    }
    return nodes_[it->second];
}

bool IntentGraph::has_tool(std::string_view tool_name) const {
    return std::any_of(nodes_.begin(), nodes_.end(),
                       [&](const ToolNode& n) { return n.name == tool_name; });
}

nlohmann::json IntentGraph::to_json() const {
    json nodes = json::array();
    for (const auto& n : nodes_) {
        json params = json::object();
        for (const auto& [name, source] : n.parameters) {
            params[name] = source.to_json();
        }
        nodes.push_back({{"id", n.id},
                         {"type", n.node_type},
                         {"name", n.name},
                         {"description", n.description},
                         {"parameters", params}});
    }
    json edges = json::array();
    for (const auto& e : edges_) {
        edges.push_back(
            {{"source_id", e.source_id}, {"target_id", e.target_id}, {"condition", e.condition}});
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

bool IntentGraph::structurally_equal(const IntentGraph& other) const {
    return nodes_ == other.nodes_ && edges_ == other.edges_;
}

bool IntentGraph::operator==(const IntentGraph& other) const {
    return revision_ == other.revision_ && structurally_equal(other);
}

IntentGraph parse_intent_graph(const nlohmann::json& doc) {
    require_exact_keys(doc, {"nodes", "edges"}, "plan root");
    if (!doc.at("nodes").is_array() || !doc.at("edges").is_array()) {
        throw SchemaError("\"nodes\" and \"edges\" must be arrays");
    }
    std::vector<ToolNode> nodes;
    for (const auto& item : doc.at("nodes")) {
        require_exact_keys(item, {"id", "type", "name", "description", "parameters"}, "node");
        ToolNode n;
        n.id = require_string(item, "id", "node");
        n.node_type = require_string(item, "type", "node");
        n.name = require_string(item, "name", "node");
        n.description = require_string(item, "description", "node");
        const auto& params = item.at("parameters");
        if (!params.is_object()) {
            throw SchemaError("node \"" + n.id + "\" parameters must be an object");
        }
        for (const auto& [pname, pvalue] : params.items()) {
            n.parameters.emplace(pname, parse_param_source(pvalue));
        }
        nodes.push_back(std::move(n));
    }
    std::vector<Edge> edges;
    for (const auto& item : doc.at("edges")) {
        require_exact_keys(item, {"source_id", "target_id", "condition"}, "edge");
        edges.push_back({require_string(item, "source_id", "edge"),
                         require_string(item, "target_id", "edge"),
                         require_string(item, "condition", "edge")});
    }
    return IntentGraph(std::move(nodes), std::move(edges), 0);
}

IntentGraph parse_intent_graph(std::string_view raw) {
    json doc;
    try {
        doc = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("plan is not valid JSON: ") + e.what());
    }
    return parse_intent_graph(doc);
}

std::vector<std::string> roots(const IntentGraph& graph) {
    std::set<std::string> with_incoming;
    for (const auto& e : graph.edges()) {
        with_incoming.insert(e.target_id);
    }
    std::vector<std::string> out;
    for (const auto& n : graph.nodes()) {
        if (!with_incoming.count(n.id)) {
            out.push_back(n.id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<std::string, std::string>> successors(const IntentGraph& graph,
                                                            std::string_view node_id) {
    if (!graph.contains(node_id)) {
        throw DanglingRefError("unknown node id \"" + std::string(node_id) + "\"");
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : graph.edges()) {
        if (e.source_id == node_id) {
            out.emplace_back(e.target_id, e.condition);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

IntentGraph update_graph(const IntentGraph& graph, const std::optional<std::string>& anchor,
                         ToolNode approved) {
    if (anchor && !graph.contains(*anchor)) {
        throw DanglingRefError("unknown anchor node \"" + *anchor + "\"");
    }
    const int next_revision = graph.revision() + 1;
    if (approved.id.empty()) {
        approved.id = approved.name;
    }
    if (graph.contains(approved.id)) {
        std::string fresh = approved.id + "_adj" + std::to_string(next_revision);
        int attempt = 2;
        while (graph.contains(fresh)) {
            fresh = approved.id + "_adj" + std::to_string(next_revision) + "_" +
                    std::to_string(attempt++);
        }
        approved.id = std::move(fresh);
    }
    std::vector<ToolNode> nodes = graph.nodes();
    std::vector<Edge> edges = graph.edges();
    const std::string new_id = approved.id;
    nodes.push_back(std::move(approved));
    if (anchor) {
        edges.push_back({*anchor, new_id, "Adjudicated"});
    }
    return IntentGraph(std::move(nodes), std::move(edges), next_revision);
}

} // namespace intentguard
