#include "intentguard/flow_monitor.hpp"

#include <algorithm>

#include "intentguard/text_util.hpp"

namespace intentguard {

namespace {

using nlohmann::json;

std::string as_text(const json& value) {
    return value.is_string() ? value.get<std::string>() : value.dump();
}

std::optional<double> numeric_value(const json& value) {
    if (value.is_number()) {
        return value.get<double>();
    }
    if (value.is_string()) {
        return text::parse_number(value.get<std::string>());
    }
    return std::nullopt;
}

bool literal_matches(const json& planned, const json& argument) {
    if (planned.is_boolean() || planned.is_null()) {
        return planned == argument;
    }
    const auto planned_num = numeric_value(planned);
    const auto argument_num = numeric_value(argument);
    if (planned.is_number() || argument.is_number()) {
        return planned_num && argument_num && *planned_num == *argument_num;
    }
    if (planned_num && argument_num) {
        return *planned_num == *argument_num;
    }
    return text::collapse_whitespace(as_text(planned)) ==
           text::collapse_whitespace(as_text(argument));
}

bool containment_consistent(const std::string& upstream_output, const std::string& argument,
                            double max_ratio) {
    const std::string out = text::normalize(upstream_output);
    const std::string arg = text::normalize(argument);
    if (out.find(arg) != std::string::npos) {
        return true;
    }
    return arg.find(out) != std::string::npos &&
           static_cast<double>(arg.size()) <= max_ratio * static_cast<double>(out.size());
}

json attribution_to_json(const std::map<std::string, std::string>& attribution) {
    json out = json::object();
    for (const auto& [arg, tag] : attribution) {
        out[arg] = tag;
    }
    return out;
}

} // namespace

std::string to_string(DeviationReason r) {
    switch (r) {
    case DeviationReason::UnknownTool:
        return "UnknownTool";
    case DeviationReason::NotASuccessor:
        return "NotASuccessor";
    case DeviationReason::ParamProvenanceViolation:
        return "ParamProvenanceViolation";
    case DeviationReason::ParamValueMismatch:
        return "ParamValueMismatch";
    }
    return "UnknownTool";
}

json CheckResult::to_json() const {
    if (compliant) {
        return {{"verdict", "compliant"},
                {"matched_node", matched_node_id},
                {"attribution", attribution_to_json(attribution)}};
    }
    return {{"verdict", "deviation"},
            {"reason", reason ? to_string(*reason) : "unknown"},
            {"detail", detail}};
}

DataFlowResult data_flow_check(const ToolNode& node, const ProposedAction& action,
                               const MonitorState& state, const MonitorConfig& config) {
    DataFlowResult result;
    for (const auto& [name, source] : node.parameters) {
        const auto arg = action.arguments.find(name);
        if (arg == action.arguments.end()) {
            result.reason = DeviationReason::ParamValueMismatch;
            result.detail = "planned parameter \"" + name + "\" missing from the action";
            return result;
        }
        switch (source.kind()) {
        case ParamSource::Kind::Literal:
            if (!literal_matches(source.value(), arg->second)) {
                result.reason = DeviationReason::ParamValueMismatch;
                result.detail = "argument \"" + name + "\" does not match the planned value";
                return result;
            }
            result.attribution[name] = "literal";
            break;
        case ParamSource::Kind::UserInput:
            if (!text::normalized_contains(state.goal, as_text(arg->second))) {
                result.reason = DeviationReason::ParamProvenanceViolation;
                result.detail = "argument \"" + name +
                                "\" is declared user input but does not appear in the goal";
                return result;
            }
            result.attribution[name] = "user_input";
            break;
        case ParamSource::Kind::NodeOutput: {
            const auto& src = source.source_node_id();
            const auto upstream = state.node_outputs.find(src);
            if (upstream == state.node_outputs.end()) {
                result.reason = DeviationReason::ParamProvenanceViolation;
                result.detail = "argument \"" + name + "\" sources node \"" + src +
                                "\" which has not executed";
                return result;
            }
            if (!containment_consistent(upstream->second, as_text(arg->second),
                                        config.containment_max_ratio)) {
                result.reason = DeviationReason::ParamProvenanceViolation;
                result.detail = "argument \"" + name +
                                "\" is not containment-consistent with the output of \"" + src +
                                "\"";
                return result;
            }
            result.attribution[name] = "node_output:" + src;
            break;
        }
        }
    }
    for (const auto& [name, value] : action.arguments) {
        if (!node.parameters.count(name)) {
            result.reason = DeviationReason::ParamProvenanceViolation;
            result.detail = "argument \"" + name + "\" has no planned provenance";
            result.attribution.clear();
            return result;
        }
    }
    result.pass = true;
    return result;
}

CheckResult is_valid_transition(const MonitorState& state, const ProposedAction& action,
                                const MonitorConfig& config) {
    std::vector<std::string> candidates;
    if (state.last_approved) {
        for (const auto& [target, condition] : successors(state.graph, *state.last_approved)) {
            candidates.push_back(target);
        }
    } else {
        candidates = roots(state.graph);
    }

    CheckResult check;
    bool name_matched = false;
    std::optional<DataFlowResult> first_failure;
    for (const auto& id : candidates) {
        const ToolNode& node = state.graph.node(id);
        if (node.name != action.tool_name) {
            continue;
        }
        name_matched = true;
        DataFlowResult flow = data_flow_check(node, action, state, config);
        if (flow.pass) {
            check.compliant = true;
            check.matched_node_id = id;
            check.attribution = std::move(flow.attribution);
            return check;
        }
        if (!first_failure) {
            first_failure = std::move(flow);
        }
    }
    if (name_matched) {
        check.reason = first_failure->reason;
        check.detail = first_failure->detail;
    } else if (state.graph.has_tool(action.tool_name)) {
        check.reason = DeviationReason::NotASuccessor;
        check.detail = "tool \"" + action.tool_name +
                       "\" is not a valid successor of the last approved action";
    } else {
        check.reason = DeviationReason::UnknownTool;
        check.detail = "tool \"" + action.tool_name + "\" does not appear in the plan";
    }
    return check;
}

ScoringAdjudicator::ScoringAdjudicator(const Adjudicator& adjudicator,
                                       std::vector<std::string> available_tools)
    : adjudicator_(adjudicator), available_tools_(std::move(available_tools)) {}

Verdict ScoringAdjudicator::adjudicate(const MonitorState& state, const ProposedAction& action,
                                       const CheckResult& check) {
    AdjudicationContext context;
    context.goal = state.goal;
    context.available_tools = available_tools_;
    context.action_history = json::array();
    for (const auto& entry : state.transcript) {
        if (!entry.executed) {
            continue;
        }
        context.action_history.push_back({{"step", entry.step},
                                          {"tool", entry.action.tool_name},
                                          {"arguments", entry.action.to_json()["arguments"]},
                                          {"output", entry.output}});
    }
    return adjudicator_.adjudicate(context, action);
}

json DecisionCounts::to_json() const {
    return {{"compliant", compliant}, {"approved", approved}, {"blocked", blocked}};
}

json TranscriptEntry::to_json() const {
    json out = {{"step", step},
                {"action", action.to_json()},
                {"decision", decision},
                {"executed", executed},
                {"output", output},
                {"output_ok", output_ok}};
    if (check) {
        out["check"] = check->to_json();
    }
    if (!node_id.empty()) {
        out["node_id"] = node_id;
    }
    if (verdict) {
        out["verdict"] = verdict->to_json();
    }
    return out;
}

json EpisodeReport::to_json() const {
    json entries = json::array();
    for (const auto& entry : transcript) {
        entries.push_back(entry.to_json());
    }
    return {{"goal", goal},
            {"complete", complete},
            {"steps", steps},
            {"decisions", decisions.to_json()},
            {"transcript", entries},
            {"final_graph", final_graph.to_json()},
            {"final_revision", final_graph.revision()},
            {"tokens",
             {{"prompt", prompt_tokens},
              {"completion", completion_tokens},
              {"approximate", tokens_approximate}}}};
}

std::string apply_block_feedback(const MonitorState& state, const ProposedAction& blocked,
                                 const Verdict& verdict) {
    (void)state;
    std::string message = "[monitor] Proposed action \"" + blocked.tool_name +
                          "\" was blocked: " + verdict.reason;
    if (!verdict.next_action.empty()) {
        message += " Suggested next step: " + verdict.next_action;
    }
    return message;
}

namespace {

ToolResult execute_checked(ToolExecutor& executor, const ProposedAction& action,
                           const EpisodeReport& partial) {
    try {
        return executor.execute(action);
    } catch (const std::exception& e) {
        throw EpisodeError(std::string("executor failure: ") + e.what(), partial);
    }
}

EpisodeReport finalize(MonitorState& state, bool complete) {
    EpisodeReport report;
    report.goal = state.goal;
    report.complete = complete;
    report.steps = state.step;
    report.final_graph = state.graph;
    for (const auto& entry : state.transcript) {
        if (entry.decision == "compliant") {
            report.decisions.compliant++;
        } else if (entry.decision == "approved") {
            report.decisions.approved++;
        } else if (entry.decision == "blocked") {
            report.decisions.blocked++;
        }
        if (entry.verdict) {
            report.prompt_tokens += entry.verdict->prompt_tokens;
            report.completion_tokens += entry.verdict->completion_tokens;
        }
    }
    report.transcript = std::move(state.transcript);
    return report;
}

} // namespace

EpisodeReport run_episode(const std::string& goal, const IntentGraph& graph, AgentPolicy& policy,
                          ToolExecutor& executor, DeviationAdjudicator& adjudicator,
                          int max_steps, const MonitorConfig& config) {
    if (max_steps < 1) {
        throw ConfigError("max_steps must be at least 1");
    }
    MonitorState state;
    state.goal = goal;
    state.graph = graph;

    bool complete = false;
    while (state.step < max_steps) {
        std::optional<ProposedAction> proposal;
        try {
            proposal = policy.propose(state);
        } catch (const std::exception& e) {
            throw EpisodeError(std::string("policy failure: ") + e.what(),
                               finalize(state, false));
        }
        if (!proposal) {
            complete = true;
            break;
        }
        const ProposedAction action = std::move(*proposal);
        TranscriptEntry entry;
        entry.step = state.step;
        entry.action = action;

        CheckResult check = is_valid_transition(state, action, config);
        entry.check = check;
        if (check.compliant) {
            const ToolResult result =
                execute_checked(executor, action, finalize(state, false));
            entry.decision = "compliant";
            entry.executed = true;
            entry.node_id = check.matched_node_id;
            entry.output = result.output;
            entry.output_ok = result.ok;
            state.node_outputs[check.matched_node_id] = result.output;
            state.last_approved = check.matched_node_id;
            policy.observe({result.ok ? Observation::Kind::ToolOutput
                                      : Observation::Kind::ToolError,
                            result.output, result.source_id});
        } else {
            Verdict verdict;
            try {
                verdict = adjudicator.adjudicate(state, action, check);
            } catch (const std::exception&) {
                verdict.decision = Decision::Block;
                verdict.reason = "adjudicator unavailable";
                verdict.s_align = 0.0;
            }
            entry.verdict = verdict;
            if (verdict.decision == Decision::Approve) {
                const ProposedAction exec_action = verdict.amended_action.value_or(action);
                ToolNode approved;
                approved.id = exec_action.tool_name;
                approved.name = exec_action.tool_name;
                approved.description = exec_action.justification.empty()
                                           ? "Adjudicated deviation"
                                           : exec_action.justification;
                for (const auto& [name, value] : exec_action.arguments) {
                    approved.parameters.emplace(name, ParamSource::literal(value));
                }
                state.graph = update_graph(state.graph, state.last_approved, approved);
                const std::string new_id = state.graph.nodes().back().id;
                const ToolResult result =
                    execute_checked(executor, exec_action, finalize(state, false));
                entry.decision = "approved";
                entry.executed = true;
                entry.action = exec_action;
                entry.node_id = new_id;
                entry.output = result.output;
                entry.output_ok = result.ok;
                state.node_outputs[new_id] = result.output;
                state.last_approved = new_id;
                policy.observe({result.ok ? Observation::Kind::ToolOutput
                                          : Observation::Kind::ToolError,
                                result.output, result.source_id});
            } else {
                // BLOCK, and ESCALATE in headless runs: state unchanged.
                entry.decision = "blocked";
                entry.executed = false;
                entry.output = apply_block_feedback(state, action, verdict);
                policy.observe({Observation::Kind::Blocked, entry.output, "monitor"});
            }
        }
        state.transcript.push_back(std::move(entry));
        state.step++;
    }
    return finalize(state, complete);
}

EpisodeReport run_unguarded_episode(const std::string& goal, AgentPolicy& policy,
                                    ToolExecutor& executor, int max_steps) {
    if (max_steps < 1) {
        throw ConfigError("max_steps must be at least 1");
    }
    MonitorState state;
    state.goal = goal;

    bool complete = false;
    while (state.step < max_steps) {
        std::optional<ProposedAction> proposal;
        try {
            proposal = policy.propose(state);
        } catch (const std::exception& e) {
            throw EpisodeError(std::string("policy failure: ") + e.what(),
                               finalize(state, false));
        }
        if (!proposal) {
            complete = true;
            break;
        }
        const ProposedAction action = std::move(*proposal);
        TranscriptEntry entry;
        entry.step = state.step;
        entry.action = action;
        const ToolResult result = execute_checked(executor, action, finalize(state, false));
        entry.decision = "executed";
        entry.executed = true;
        entry.output = result.output;
        entry.output_ok = result.ok;
        policy.observe({result.ok ? Observation::Kind::ToolOutput
                                  : Observation::Kind::ToolError,
                        result.output, result.source_id});
        state.transcript.push_back(std::move(entry));
        state.step++;
    }
    return finalize(state, complete);
}

} // namespace intentguard
