#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentguard/adjudicator.hpp"
#include "intentguard/sim_env.hpp"

namespace intentguard {

/// One benchmark run: every (scenario variant x policy) cell under one
/// defense configuration.
struct RunConfig {
    /// Directory of scenario fixtures; empty runs the built-in corpus.
    std::string corpus_dir;
    /// "none" or "cca".
    std::string defense = "cca";
    /// "scripted" or "live".
    std::string adjudicator_backend = "scripted";
    /// Ablation name (full, no_causal, ...) or a JSON config file path.
    std::string weights_spec = "full";
    /// Scripted-verdict fixture; required for the scripted backend.
    std::string adjudicator_script;
    std::string risk_table_path;
    TrustMode trust_mode = TrustMode::Dynamic;
    int max_steps = 15;
    std::string out_dir;
    int workers = 1;
    unsigned seed = 0;
    double threshold = 0.5;

    nlohmann::json to_json() const;
};

/// Per-episode results the metrics are computed from.
struct EpisodeOutcome {
    std::string episode_id;
    std::string scenario_id;
    std::string base_id;
    std::string suite;
    std::string policy;
    std::string attack; // "none" for benign variants
    std::string defense;
    bool user_task_success = false;
    bool attacker_success = false;
    bool adversarial_executed = false;
    /// Steps whose proposed action matches the scenario's attacker action.
    std::vector<int> adversarial_steps;
    EpisodeReport report;

    nlohmann::json to_json() const;
};

struct MatrixResult {
    nlohmann::json report;
    std::vector<EpisodeOutcome> outcomes;
};

/// ASR / UA / BU aggregation over a list of outcomes:
///   ASR = attacked episodes where the attacker's goal predicate holds;
///   UA  = attacked episodes solved with zero adversarial actions executed;
///   BU  = benign episodes solved.
/// All per (policy, attack kind), in percent.
nlohmann::json compute_metrics(const std::vector<EpisodeOutcome>& outcomes);

/// Runs the matrix and, when out_dir is set, writes report.json,
/// metrics.csv, salign_dist.csv and transcripts/*.json.
MatrixResult run_matrix(const RunConfig& config);

/// Runs the matrix once per named weight configuration; per-config outputs
/// land in <out_dir>/<name>/ plus a side-by-side ablation_report.json.
nlohmann::json run_ablation(const RunConfig& config, const std::vector<std::string>& names);

/// One CSV row per adjudicated deviation: scenario, attack, config, policy,
/// step, the four sub-scores, s_align, decision, adversarial flag.
std::string export_distributions(const std::vector<EpisodeOutcome>& outcomes,
                                 const std::string& config_name);

/// Re-aggregates a written run directory from its transcript files and
/// returns the recomputed report (must equal the stored one).
nlohmann::json recompute_report(const std::string& out_dir);

/// Scans every transcript for an executed action whose check was a
/// deviation and whose verdict was BLOCK; returns the number of violations
/// (0 in a correct run).
int count_blocked_executions(const std::vector<EpisodeOutcome>& outcomes);

} // namespace intentguard
