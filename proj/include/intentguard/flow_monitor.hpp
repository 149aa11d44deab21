#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentguard/action.hpp"
#include "intentguard/adjudicator.hpp"
#include "intentguard/graph_model.hpp"

namespace intentguard {

enum class DeviationReason { UnknownTool, NotASuccessor, ParamProvenanceViolation,
                             ParamValueMismatch };

std::string to_string(DeviationReason r);

/// Outcome of the two-fold integrity check for one proposed action.
struct CheckResult {
    bool compliant = false;
    /// Set iff compliant: the plan node the action was matched to.
    std::string matched_node_id;
    /// Set iff not compliant.
    std::optional<DeviationReason> reason;
    std::string detail;
    /// Set iff compliant: argument name -> provenance tag
    /// ("literal" | "user_input" | "node_output:<id>").
    std::map<std::string, std::string> attribution;

    nlohmann::json to_json() const;
};

struct DataFlowResult {
    bool pass = false;
    DeviationReason reason = DeviationReason::ParamValueMismatch;
    std::string detail;
    std::map<std::string, std::string> attribution;
};

/// Tunables for the data-flow containment semantics.
struct MonitorConfig {
    /// An argument may contain the upstream output (field extraction in
    /// reverse) only while staying within this length ratio.
    double containment_max_ratio = 4.0;
};

struct TranscriptEntry {
    int step = 0;
    ProposedAction action;
    /// Absent when the episode ran without enforcement.
    std::optional<CheckResult> check;
    /// "compliant" | "approved" | "blocked" | "executed".
    std::string decision;
    bool executed = false;
    std::string node_id;
    std::string output;
    bool output_ok = true;
    std::optional<Verdict> verdict;

    nlohmann::json to_json() const;
};

/// The execution-loop state: user goal, current graph revision, the anchor
/// node for the control-flow check, recorded outputs of executed nodes, and
/// the transcript so far.
struct MonitorState {
    std::string goal;
    IntentGraph graph;
    std::optional<std::string> last_approved;
    std::map<std::string, std::string> node_outputs;
    int step = 0;
    std::vector<TranscriptEntry> transcript;
};

/// Control-flow + data-flow check of Algorithm 1's IsValidTransition line.
/// Candidates are the successors of the last approved node (the roots when
/// none). Compliant iff some candidate has the proposed tool name and the
/// data-flow check passes; candidates are tried in lexicographic node-id
/// order and the first pass wins. Total: never throws.
CheckResult is_valid_transition(const MonitorState& state, const ProposedAction& action,
                                const MonitorConfig& config = {});

/// Validates every argument of `action` against the provenance declared by
/// `node`: literals must match (numbers numerically, strings after
/// whitespace normalization), user-input values must appear in the goal,
/// node-output values must be containment-consistent with the recorded
/// upstream output. Arguments missing from the plan fail — ambient context
/// is exactly the injection surface.
DataFlowResult data_flow_check(const ToolNode& node, const ProposedAction& action,
                               const MonitorState& state, const MonitorConfig& config = {});

struct Observation {
    enum class Kind { ToolOutput, ToolError, Blocked };
    Kind kind = Kind::ToolOutput;
    std::string text;
    std::string source_id;
};

/// The agent under supervision. propose() returns nullopt when the policy
/// declares the task complete.
class AgentPolicy {
public:
    virtual ~AgentPolicy() = default;
    virtual std::optional<ProposedAction> propose(const MonitorState& state) = 0;
    virtual void observe(const Observation& obs) = 0;
};

struct ToolResult {
    std::string output;
    std::string source_id;
    bool ok = true;
};

class ToolExecutor {
public:
    virtual ~ToolExecutor() = default;
    virtual ToolResult execute(const ProposedAction& action) = 0;
};

/// Escalation target for detected deviations. Exceptions thrown here are
/// treated as BLOCK by the monitor (fail closed).
class DeviationAdjudicator {
public:
    virtual ~DeviationAdjudicator() = default;
    virtual Verdict adjudicate(const MonitorState& state, const ProposedAction& action,
                               const CheckResult& check) = 0;
};

/// Bridges the monitor to the scoring adjudicator by assembling the
/// adjudication context (goal, executed-action history, tool inventory)
/// from the monitor state.
class ScoringAdjudicator : public DeviationAdjudicator {
public:
    ScoringAdjudicator(const Adjudicator& adjudicator, std::vector<std::string> available_tools);

    Verdict adjudicate(const MonitorState& state, const ProposedAction& action,
                       const CheckResult& check) override;

private:
    const Adjudicator& adjudicator_;
    std::vector<std::string> available_tools_;
};

struct DecisionCounts {
    int compliant = 0;
    int approved = 0;
    int blocked = 0;

    nlohmann::json to_json() const;
};

struct EpisodeReport {
    std::string goal;
    bool complete = false;
    int steps = 0;
    DecisionCounts decisions;
    std::vector<TranscriptEntry> transcript;
    IntentGraph final_graph;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    bool tokens_approximate = false;

    nlohmann::json to_json() const;
};

/// Wraps a policy or executor failure together with the transcript
/// accumulated up to that point.
class EpisodeError : public Error {
public:
    EpisodeError(const std::string& msg, EpisodeReport partial)
        : Error(msg), partial_(std::move(partial)) {}

    const EpisodeReport& partial_report() const noexcept { return partial_; }

private:
    EpisodeReport partial_;
};

/// The guarded execution loop. Compliant actions execute immediately and
/// advance the anchor; deviations go to the adjudicator — APPROVE extends
/// the graph with the (possibly amended) action and executes it, BLOCK
/// leaves the state unchanged and feeds the verdict back to the policy.
/// ESCALATE is mapped to BLOCK in headless runs. Ends on policy completion
/// or after max_steps proposals. Throws ConfigError for max_steps < 1 and
/// EpisodeError on policy/executor failure.
EpisodeReport run_episode(const std::string& goal, const IntentGraph& graph, AgentPolicy& policy,
                          ToolExecutor& executor, DeviationAdjudicator& adjudicator,
                          int max_steps, const MonitorConfig& config = {});

/// Reference loop with no enforcement: every proposed action executes.
EpisodeReport run_unguarded_episode(const std::string& goal, AgentPolicy& policy,
                                    ToolExecutor& executor, int max_steps);

/// Feedback message for a blocked action, quoting the verdict's reason and,
/// when present, its suggested next step.
std::string apply_block_feedback(const MonitorState& state, const ProposedAction& blocked,
                                 const Verdict& verdict);

} // namespace intentguard
