#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentguard/errors.hpp"

namespace intentguard {

/// A single model invocation. Temperature stays at 0.0 in reproducibility
/// mode; overrides are echoed into the request log.
struct ModelRequest {
    std::string prompt;
    double temperature = 0.0;
    int max_retries = 2;
};

struct Completion {
    std::string text;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    /// True when the backend reported no usage data and the counts are a
    /// whitespace-token approximation.
    bool approximate = false;
};

/// Thread-safe accounting of per-call token usage.
class TokenLedger {
public:
    struct CallRecord {
        std::string label;
        std::size_t prompt_tokens = 0;
        std::size_t completion_tokens = 0;
        bool approximate = false;
    };

    void record(CallRecord record);

    std::size_t call_count() const;
    /// Sum of (prompt, completion) tokens over calls [begin, end).
    std::pair<std::size_t, std::size_t> totals(std::size_t begin = 0) const;
    bool any_approximate(std::size_t begin = 0) const;
    std::vector<CallRecord> records() const;

private:
    mutable std::mutex mutex_;
    std::vector<CallRecord> records_;
};

/// Transport for the adjudicator model: live HTTP or scripted mock.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    /// Throws TransportError once retries are exhausted.
    virtual Completion complete(const ModelRequest& request) = 0;
};

/// Chat-completions-style HTTP client. Endpoint and credential come from a
/// config struct or the INTENTGUARD_MODEL_URL / INTENTGUARD_MODEL_KEY /
/// INTENTGUARD_MODEL_NAME environment variables.
class HttpChatBackend : public CompletionBackend {
public:
    struct Config {
        std::string base_url;
        std::string path = "/v1/chat/completions";
        std::string api_key;
        std::string model;
        int timeout_seconds = 60;
    };

    HttpChatBackend(Config config, std::shared_ptr<TokenLedger> ledger);
    static Config config_from_env();

    Completion complete(const ModelRequest& request) override;

private:
    Config config_;
    std::shared_ptr<TokenLedger> ledger_;
};

/// One scripted verdict rule: a case-insensitive regex matched against the
/// rendered prompt. Scope "decision" restricts matching to the triggering
/// content and proposed action blocks, so payload echoes in the action
/// history cannot re-trigger a rule; "prompt" matches the whole prompt.
/// When `raw_reply` is set it is returned verbatim (protocol-violation
/// testing); otherwise reason/next_action/score are serialized into the
/// strict reply object.
struct ScriptRule {
    enum class Scope { Decision, Prompt };

    std::string pattern;
    std::string reason;
    std::string next_action;
    int score = 5;
    Scope scope = Scope::Decision;
    std::optional<std::string> raw_reply;
};

/// The triggering-content and proposed-action blocks of a rendered
/// adjudicator prompt; the full prompt when the markers are absent.
std::string decision_sections(const std::string& prompt);

/// Deterministic scripted stand-in for the adjudicator model. Unmatched
/// prompts get `default_score`.
class ScriptedAdjudicatorBackend : public CompletionBackend {
public:
    ScriptedAdjudicatorBackend(std::vector<ScriptRule> rules, int default_score = 7,
                               std::shared_ptr<TokenLedger> ledger = nullptr);

    /// Fixture format: {"default_score": n, "rules": [{"pattern": ...,
    /// "reason": ..., "next_action": ..., "score": n, "raw_reply"?: ...}]}.
    static ScriptedAdjudicatorBackend from_json(const nlohmann::json& doc,
                                                std::shared_ptr<TokenLedger> ledger = nullptr);
    static ScriptedAdjudicatorBackend from_file(const std::string& path,
                                                std::shared_ptr<TokenLedger> ledger = nullptr);

    Completion complete(const ModelRequest& request) override;

private:
    std::vector<ScriptRule> rules_;
    int default_score_;
    std::shared_ptr<TokenLedger> ledger_;
};

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dims() const noexcept { return values.size(); }
};

/// Cosine similarity in [-1, 1]; zero-norm inputs are treated as orthogonal.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed(const std::string& text) = 0;
    virtual std::size_t dims() const = 0;
};

/// Offline deterministic embedder: feature-hashed counts of lowercased word
/// tokens, L2-normalized, 384 dimensions by default.
class HashingEmbedder : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dims = 384);

    EmbeddingVector embed(const std::string& text) override;
    std::size_t dims() const override { return dims_; }

    /// Bucket index a token hashes into; exposed so tests can build
    /// collision-free fixtures.
    std::size_t bucket(const std::string& token) const;

private:
    std::size_t dims_;
};

/// HTTP embedding provider (embeddings-style endpoint).
class HttpEmbedder : public Embedder {
public:
    struct Config {
        std::string base_url;
        std::string path = "/v1/embeddings";
        std::string api_key;
        std::string model;
        int timeout_seconds = 60;
    };

    explicit HttpEmbedder(Config config);

    EmbeddingVector embed(const std::string& text) override;
    std::size_t dims() const override { return 384; }

private:
    Config config_;
};

/// The adjudicator model's strict reply contract.
struct AdjudicatorReply {
    std::string reason;
    std::string next_action;
    int score = 0;
};

/// Parses the strict single-object reply {"reason", "next_action", "score"}
/// with score an integer in 1..10. Unless `strict` is set, surrounding
/// markdown code fences are stripped before parsing (live models emit them
/// despite the prompt's prohibition). Throws MalformedVerdict.
AdjudicatorReply parse_adjudicator_reply(const std::string& text, bool strict = false);

} // namespace intentguard
