#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace intentguard {

/// An action the agent proposes to take, with the evidence the monitor and
/// adjudicator need: the agent's stated reason, the most recent observation
/// text that motivated the action, and the id of that observation's source.
struct ProposedAction {
    std::string tool_name;
    std::map<std::string, nlohmann::json> arguments;
    std::string justification;
    std::string triggering_content;
    std::string source_id;

    nlohmann::json to_json() const;
    static ProposedAction from_json(const nlohmann::json& doc);

    bool operator==(const ProposedAction& other) const = default;
};

/// Natural-language rendering used for embeddings:
/// "call <tool> with <k=v, ...> because <justification>".
std::string render_action_text(const ProposedAction& action);

} // namespace intentguard
