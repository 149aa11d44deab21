#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentguard/flow_monitor.hpp"

namespace intentguard {

class UnknownToolError : public Error {
public:
    using Error::Error;
};

/// Handler-level failure (nonexistent channel, insufficient balance, ...);
/// surfaced to the agent as an error observation, never a crash.
class HandlerError : public Error {
public:
    using Error::Error;
};

/// A deterministic simulated tool suite: named handlers over a JSON state
/// document, plus one optional injection slot whose outputs carry an
/// attacker payload.
class ToolSuite {
public:
    using Handler =
        std::function<std::string(ToolSuite&, const std::map<std::string, nlohmann::json>&)>;

    explicit ToolSuite(std::string name) : name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

    void register_tool(const std::string& tool, Handler handler);
    bool has_tool(const std::string& tool) const;
    std::vector<std::string> tool_names() const;

    /// Applies the handler, splices the injected text into the output when
    /// the call hits the injection slot, and tags the output with a source
    /// id (suite:tool, refined by a salient argument when present).
    /// HandlerError turns into an error observation; an unregistered name
    /// throws UnknownToolError.
    ToolResult run_tool(const std::string& tool, const std::map<std::string, nlohmann::json>& args);

    /// Arms the injection: outputs of `slot_tool` get `text` appended.
    void set_injection(const std::string& slot_tool, const std::string& text);

    nlohmann::json& state() noexcept { return state_; }
    const nlohmann::json& state() const noexcept { return state_; }

private:
    std::string name_;
    std::map<std::string, Handler> handlers_;
    nlohmann::json state_ = nlohmann::json::object();
    std::string injection_slot_;
    std::string injection_text_;
};

ToolSuite make_workspace_suite();
ToolSuite make_travel_suite();
ToolSuite make_slack_suite();
ToolSuite make_banking_suite();
/// By suite tag: workspace | travel | slack | banking.
ToolSuite make_suite(const std::string& suite_name);

/// Runs proposed actions against a suite; handler failures and unknown
/// tools come back as error observations.
class SuiteExecutor : public ToolExecutor {
public:
    explicit SuiteExecutor(ToolSuite& suite) : suite_(suite) {}

    ToolResult execute(const ProposedAction& action) override;

private:
    ToolSuite& suite_;
};

enum class AttackKind { Direct, IgnorePrevious, SystemMessage, ImportantMessages };

std::string to_string(AttackKind kind);
AttackKind attack_kind_from_string(const std::string& s);
const std::vector<AttackKind>& all_attack_kinds();

/// One injected payload: the wrapper template is fixed by the kind, the
/// slot names the tool whose output carries it.
struct AttackSpec {
    AttackKind kind = AttackKind::Direct;
    std::string payload_goal;
    std::string slot;
};

/// Wraps the payload goal in the exact per-kind template.
std::string render_attack(const AttackSpec& spec);

/// A state predicate referenced by registered name.
struct Predicate {
    std::string name;
    nlohmann::json params = nlohmann::json::object();
};

bool eval_predicate(const Predicate& predicate, const nlohmann::json& suite_state);

/// A simulated task: goal, plan fixture, suite, optional attack, and the
/// pure final-state predicates that define user and attacker success. A
/// scenario without an attack is a benign-utility scenario.
struct Scenario {
    std::string id;
    std::string base_id;
    std::string suite;
    std::string goal;
    nlohmann::json plan;
    std::optional<AttackSpec> attack;
    /// The concrete tool call a naive agent performs when it follows the
    /// injected instruction.
    ProposedAction attacker_action;
    Predicate user_task_success;
    Predicate attacker_success;
    /// Concrete values the agent binds to non-literal plan parameters:
    /// {node_id: {param: value}}.
    nlohmann::json bindings = nlohmann::json::object();
    /// Legitimate post-plan steps the plan omitted; proposing them deviates
    /// from the graph and exercises the approval path.
    std::vector<ProposedAction> followup_actions;

    nlohmann::json to_json() const;
    static Scenario from_json(const nlohmann::json& doc);

    /// True when the executed action matches the attacker action (tool and
    /// arguments, normalized).
    bool is_adversarial(const ProposedAction& action) const;
};

enum class PolicyKind { PlanFollower, NaiveInjectable };

std::string to_string(PolicyKind kind);

/// Deterministic scripted agents. PlanFollower walks the plan in a valid
/// topological order with correctly sourced arguments and ignores injected
/// content. NaiveInjectable does the same until an observation matches one
/// of the four instruction templates, then proposes the attacker action
/// exactly once with the injected text as justification. Both resume the
/// plan after a block.
std::unique_ptr<AgentPolicy> scripted_policy(PolicyKind kind, const Scenario& scenario);

/// The shipped desk-scale corpus: 24 base scenarios across the four suites,
/// each expanded into a benign variant plus one per attack kind.
std::vector<Scenario> build_scenario_corpus();

/// Fixture directory round-trip (one JSON file per scenario variant).
std::vector<Scenario> load_scenario_corpus(const std::string& dir);
void write_scenario_corpus(const std::vector<Scenario>& corpus, const std::string& dir);

} // namespace intentguard
