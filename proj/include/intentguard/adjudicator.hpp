#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentguard/action.hpp"
#include "intentguard/model_gateway.hpp"
#include "intentguard/risk_registry.hpp"
#include "intentguard/trust_store.hpp"

namespace intentguard {

/// Weights of the four alignment sub-scores. Each must lie in [0, 1] and
/// they must sum to 1 within kWeightSumTolerance (loose enough to admit the
/// renormalized ablation rows, which are rounded to three decimals).
struct ScoreWeights {
    double sem = 0.1;
    double causal = 0.7;
    double prov = 0.1;
    double risk = 0.1;

    static constexpr double kWeightSumTolerance = 0.015;

    /// Throws ConfigError when invalid.
    void validate() const;

    static ScoreWeights from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

/// Named weight rows for the component ablation study; "full" is the
/// default configuration. Throws ConfigError for unknown names.
ScoreWeights ablation_config(const std::string& name);
const std::vector<std::string>& ablation_names();

struct SubScores {
    double sem = 0.0;
    double causal = 0.0;
    double prov = 0.0;
    double risk = 0.0;

    nlohmann::json to_json() const;
};

/// Weighted intent alignment score. Risk enters inverted, as (1 - risk), so
/// higher values consistently mean safer calls; the result is clamped to
/// [0, 1] (the printed ablation rows can sum slightly above 1).
double aggregate(const SubScores& sub, const ScoreWeights& weights);

enum class Decision { Approve, Block, Escalate };

std::string to_string(Decision d);
Decision decision_from_string(const std::string& s);

/// The adjudicator's outcome for one deviation.
struct Verdict {
    SubScores sub_scores;
    double s_align = 0.0;
    Decision decision = Decision::Block;
    std::string reason;
    std::string next_action;
    std::optional<ProposedAction> amended_action;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;

    nlohmann::json to_json() const;
};

/// Everything the adjudicator model sees about the decision event besides
/// the proposed action itself.
struct AdjudicationContext {
    std::string goal;
    nlohmann::json action_history = nlohmann::json::array();
    std::vector<std::string> available_tools;
};

/// Emits the auditor prompt with the six context blocks (primary directive,
/// action history, triggering content, available tools, proposed action,
/// stated reason).
std::string render_adjudicator_prompt(const AdjudicationContext& context,
                                      const ProposedAction& action);

/// s_sem per the cosine form (cos + 1) / 2 over embeddings of the rendered
/// action text and the goal.
double semantic_score(const ProposedAction& action, const std::string& goal, Embedder& embedder);

struct CausalAssessment {
    double score = 0.0;
    std::string reason;
    std::string next_action;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
};

/// Queries the adjudicator model and maps its integer 1..10 verdict onto
/// [0, 1] as score/10. Malformed replies are retried with the identical
/// prompt up to `max_retries` more times, then raised as ModelProtocolError
/// (callers fail closed).
CausalAssessment causal_score(const ProposedAction& action, const AdjudicationContext& context,
                              CompletionBackend& model, int max_retries = 2, bool strict = false);

/// Current trust of the triggering source, clamped to [0, 1].
double provenance_score(const std::string& source_id, const TrustStore& trust);

/// Static per-tool risk; unknown tools get `unknown_tool_risk`.
double risk_score(const std::string& tool_name, const RiskTable& table,
                  double unknown_tool_risk = 0.8);

/// Best-effort parse of the model's suggested next step back into an
/// action. Accepts the prompt's own phrasing, e.g.
///   use the 'send_channel_message' tool with the 'channel' parameter set
///   to 'general' ...
/// Returns nullopt when no tool name is recognizable.
std::optional<ProposedAction> parse_amended_action(const std::string& next_action);

struct AdjudicatorConfig {
    ScoreWeights weights;
    double threshold = 0.5;
    int max_retries = 2;
    double unknown_tool_risk = 0.8;
    bool strict_json = false;
    TrustMode trust_mode = TrustMode::Dynamic;

    /// Accepts {"weights": <name or object>, "threshold", "retry_budget",
    /// "trust_mode": "static"|"dynamic", "unknown_tool_risk",
    /// "strict_json"}; all keys optional.
    static AdjudicatorConfig from_json(const nlohmann::json& doc);
    static AdjudicatorConfig from_file(const std::string& path);
};

/// Pillar II: scores a detected deviation on the four dimensions,
/// aggregates, and thresholds into APPROVE/BLOCK. Immutable configuration;
/// safe to share across episodes.
class Adjudicator {
public:
    Adjudicator(AdjudicatorConfig config, Embedder& embedder, CompletionBackend& model,
                TrustStore& trust, const RiskTable& risks);

    /// On APPROVE records a benign outcome for the triggering source, on
    /// BLOCK a malicious one (dynamic trust mode only). A model protocol
    /// failure yields BLOCK with reason "adjudicator unavailable".
    Verdict adjudicate(const AdjudicationContext& context, const ProposedAction& action) const;

    const AdjudicatorConfig& config() const noexcept { return config_; }

private:
    AdjudicatorConfig config_;
    Embedder& embedder_;
    CompletionBackend& model_;
    TrustStore& trust_;
    const RiskTable& risks_;
};

} // namespace intentguard
