#include "intentguard/model_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>

#include <httplib.h>

#include "intentguard/text_util.hpp"

namespace intentguard {

namespace {

using nlohmann::json;

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value ? std::string(value) : fallback;
}

std::size_t approx_or(std::size_t reported, const std::string& text, bool& approximate) {
    if (reported > 0) {
        return reported;
    }
    approximate = true;
    return text::approx_token_count(text);
}

} // namespace

void TokenLedger::record(CallRecord record) {
    std::lock_guard lock(mutex_);
    records_.push_back(std::move(record));
}

std::size_t TokenLedger::call_count() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::pair<std::size_t, std::size_t> TokenLedger::totals(std::size_t begin) const {
    std::lock_guard lock(mutex_);
    std::size_t prompt = 0;
    std::size_t completion = 0;
    for (std::size_t i = begin; i < records_.size(); ++i) {
        prompt += records_[i].prompt_tokens;
        completion += records_[i].completion_tokens;
    }
    return {prompt, completion};
}

bool TokenLedger::any_approximate(std::size_t begin) const {
    std::lock_guard lock(mutex_);
    for (std::size_t i = begin; i < records_.size(); ++i) {
        if (records_[i].approximate) {
            return true;
        }
    }
    return false;
}

std::vector<TokenLedger::CallRecord> TokenLedger::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

HttpChatBackend::HttpChatBackend(Config config, std::shared_ptr<TokenLedger> ledger)
    : config_(std::move(config)), ledger_(std::move(ledger)) {
    if (config_.base_url.empty()) {
        throw ConfigError("HttpChatBackend requires a base URL");
    }
}

HttpChatBackend::Config HttpChatBackend::config_from_env() {
    Config config;
    config.base_url = env_or("INTENTGUARD_MODEL_URL", "");
    config.api_key = env_or("INTENTGUARD_MODEL_KEY", "");
    config.model = env_or("INTENTGUARD_MODEL_NAME", "");
    return config;
}

Completion HttpChatBackend::complete(const ModelRequest& request) {
    const json body = {
        {"model", config_.model},
        {"temperature", request.temperature},
        {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
    };
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= request.max_retries; ++attempt) {
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!config_.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.api_key);
        }
        auto res = client.Post(config_.path, headers, payload, "application/json");
        if (!res) {
            last_error = "connection failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error: HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("chat backend rejected request: HTTP " +
                                 std::to_string(res->status));
        }
        json reply;
        try {
            reply = json::parse(res->body);
        } catch (const json::parse_error& e) {
            last_error = std::string("unparseable reply: ") + e.what();
            continue;
        }
        Completion out;
        try {
            out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            last_error = std::string("reply missing choices: ") + e.what();
            continue;
        }
        if (reply.contains("usage")) {
            out.prompt_tokens = reply["usage"].value("prompt_tokens", 0);
            out.completion_tokens = reply["usage"].value("completion_tokens", 0);
        }
        out.prompt_tokens = approx_or(out.prompt_tokens, request.prompt, out.approximate);
        out.completion_tokens = approx_or(out.completion_tokens, out.text, out.approximate);
        if (ledger_) {
            ledger_->record({"chat", out.prompt_tokens, out.completion_tokens, out.approximate});
        }
        return out;
    }
    throw TransportError("chat backend unreachable after retries: " + last_error);
}

ScriptedAdjudicatorBackend::ScriptedAdjudicatorBackend(std::vector<ScriptRule> rules,
                                                       int default_score,
                                                       std::shared_ptr<TokenLedger> ledger)
    : rules_(std::move(rules)), default_score_(default_score), ledger_(std::move(ledger)) {}

std::string decision_sections(const std::string& prompt) {
    const auto trigger_begin = prompt.find("**[Triggering Content]**");
    const auto trigger_end = prompt.find("**[Available Tools]**");
    const auto action_begin = prompt.find("**[Proposed Action]**");
    const auto action_end = prompt.find("# Causal Chain Analysis");
    if (trigger_begin == std::string::npos || trigger_end == std::string::npos ||
        action_begin == std::string::npos || action_end == std::string::npos) {
        return prompt;
    }
    return prompt.substr(trigger_begin, trigger_end - trigger_begin) +
           prompt.substr(action_begin, action_end - action_begin);
}

ScriptedAdjudicatorBackend
ScriptedAdjudicatorBackend::from_json(const json& doc, std::shared_ptr<TokenLedger> ledger) {
    if (!doc.is_object()) {
        throw ParseError("adjudicator script must be a JSON object");
    }
    std::vector<ScriptRule> rules;
    for (const auto& item : doc.value("rules", json::array())) {
        ScriptRule rule;
        rule.pattern = item.at("pattern").get<std::string>();
        rule.reason = item.value("reason", "");
        rule.next_action = item.value("next_action", "");
        rule.score = item.value("score", 5);
        const std::string scope = item.value("scope", "decision");
        if (scope == "prompt") {
            rule.scope = ScriptRule::Scope::Prompt;
        } else if (scope == "decision") {
            rule.scope = ScriptRule::Scope::Decision;
        } else {
            throw ParseError("rule scope must be \"decision\" or \"prompt\"");
        }
        if (item.contains("raw_reply")) {
            rule.raw_reply = item.at("raw_reply").get<std::string>();
        }
        rules.push_back(std::move(rule));
    }
    return ScriptedAdjudicatorBackend(std::move(rules), doc.value("default_score", 7),
                                      std::move(ledger));
}

ScriptedAdjudicatorBackend
ScriptedAdjudicatorBackend::from_file(const std::string& path,
                                      std::shared_ptr<TokenLedger> ledger) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open adjudicator script: " + path);
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ParseError("adjudicator script is not valid JSON: " + std::string(e.what()));
    }
    return from_json(doc, std::move(ledger));
}

Completion ScriptedAdjudicatorBackend::complete(const ModelRequest& request) {
    const std::string decision_text = decision_sections(request.prompt);
    std::string reply_text;
    bool matched = false;
    for (const auto& rule : rules_) {
        const std::regex pattern(rule.pattern,
                                 std::regex_constants::ECMAScript | std::regex_constants::icase);
        const std::string& subject =
            rule.scope == ScriptRule::Scope::Prompt ? request.prompt : decision_text;
        if (!std::regex_search(subject, pattern)) {
            continue;
        }
        if (rule.raw_reply) {
            reply_text = *rule.raw_reply;
        } else {
            reply_text = json{{"reason", rule.reason},
                              {"next_action", rule.next_action},
                              {"score", rule.score}}
                             .dump();
        }
        matched = true;
        break;
    }
    if (!matched) {
        reply_text = json{{"reason", "no scripted rule matched"},
                          {"next_action", ""},
                          {"score", default_score_}}
                         .dump();
    }
    Completion out;
    out.text = reply_text;
    out.approximate = true;
    out.prompt_tokens = text::approx_token_count(request.prompt);
    out.completion_tokens = text::approx_token_count(reply_text);
    if (ledger_) {
        ledger_->record({"scripted", out.prompt_tokens, out.completion_tokens, true});
    }
    return out;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.values.size() != b.values.size()) {
        throw EmbedderError("embedding dimension mismatch");
    }
    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        norm_a += a.values[i] * a.values[i];
        norm_b += b.values[i] * b.values[i];
    }
    if (norm_a == 0.0 || norm_b == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

HashingEmbedder::HashingEmbedder(std::size_t dims) : dims_(dims) {
    if (dims_ == 0) {
        throw ConfigError("embedder dimension must be positive");
    }
}

std::size_t HashingEmbedder::bucket(const std::string& token) const {
    return static_cast<std::size_t>(text::fnv1a(token) % dims_);
}

EmbeddingVector HashingEmbedder::embed(const std::string& text_in) {
    EmbeddingVector v;
    v.values.assign(dims_, 0.0);
    for (const auto& token : text::tokenize(text::to_lower(text_in))) {
        v.values[bucket(token)] += 1.0;
    }
    double norm = 0.0;
    for (double x : v.values) {
        norm += x * x;
    }
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v.values) {
            x /= norm;
        }
    }
    return v;
}

HttpEmbedder::HttpEmbedder(Config config) : config_(std::move(config)) {
    if (config_.base_url.empty()) {
        throw ConfigError("HttpEmbedder requires a base URL");
    }
}

EmbeddingVector HttpEmbedder::embed(const std::string& text_in) {
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    const json body = {{"model", config_.model}, {"input", text_in}};
    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res || res->status != 200) {
        throw TransportError("embedding backend failure" +
                             (res ? ": HTTP " + std::to_string(res->status) : ""));
    }
    try {
        const json reply = json::parse(res->body);
        EmbeddingVector v;
        v.values = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
        return v;
    } catch (const json::exception& e) {
        throw TransportError("embedding reply malformed: " + std::string(e.what()));
    }
}

AdjudicatorReply parse_adjudicator_reply(const std::string& text_in, bool strict) {
    std::string body = text::collapse_whitespace(text_in);
    if (!strict) {
        // Live models wrap replies in fences despite the prompt's
        // prohibition; strip one surrounding fence pair.
        std::smatch m;
        static const std::regex fenced(R"(^```(?:json)?\s*(\{.*\})\s*```$)");
        if (std::regex_match(body, m, fenced)) {
            body = m[1].str();
        }
    }
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw MalformedVerdict("verdict is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object() || doc.size() != 3 || !doc.contains("reason") ||
        !doc.contains("next_action") || !doc.contains("score")) {
        throw MalformedVerdict("verdict must contain exactly reason/next_action/score");
    }
    if (!doc["reason"].is_string() || !doc["next_action"].is_string()) {
        throw MalformedVerdict("verdict reason/next_action must be strings");
    }
    if (!doc["score"].is_number_integer()) {
        throw MalformedVerdict("verdict score must be an integer");
    }
    AdjudicatorReply reply;
    reply.reason = doc["reason"].get<std::string>();
    reply.next_action = doc["next_action"].get<std::string>();
    reply.score = doc["score"].get<int>();
    if (reply.score < 1 || reply.score > 10) {
        throw MalformedVerdict("verdict score out of 1..10: " + std::to_string(reply.score));
    }
    return reply;
}

} // namespace intentguard
