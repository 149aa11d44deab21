#include "intentguard/action.hpp"

namespace intentguard {

nlohmann::json ProposedAction::to_json() const {
    nlohmann::json args = nlohmann::json::object();
    for (const auto& [name, value] : arguments) {
        args[name] = value;
    }
    return {{"tool_name", tool_name},
            {"arguments", args},
            {"justification", justification},
            {"triggering_content", triggering_content},
            {"source_id", source_id}};
}

ProposedAction ProposedAction::from_json(const nlohmann::json& doc) {
    ProposedAction action;
    action.tool_name = doc.at("tool_name").get<std::string>();
    for (const auto& [name, value] : doc.value("arguments", nlohmann::json::object()).items()) {
        action.arguments[name] = value;
    }
    action.justification = doc.value("justification", "");
    action.triggering_content = doc.value("triggering_content", "");
    action.source_id = doc.value("source_id", "");
    return action;
}

std::string render_action_text(const ProposedAction& action) {
    std::string args;
    for (const auto& [name, value] : action.arguments) {
        if (!args.empty()) {
            args += ", ";
        }
        args += name + "=";
        args += value.is_string() ? value.get<std::string>() : value.dump();
    }
    return "call " + action.tool_name + " with " + args + " because " + action.justification;
}

} // namespace intentguard
