#pragma once

#include <map>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

namespace intentguard {

enum class TrustMode { Dynamic, Static };
enum class SourceOutcome { Benign, Malicious };

/// Decay/reward/penalty parameters for the per-source trust update
///   T' = (1 - delta) * T + alpha * [benign] - beta * [malicious]
/// clamped to [0, 1]. Defaults make one malicious event cost more than
/// three benign events recover.
struct TrustParams {
    double delta = 0.05;
    double alpha = 0.1;
    double beta = 0.3;
    double preset = 0.5;
    TrustMode mode = TrustMode::Dynamic;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Shared, synchronized table of per-source trust scores. In Static mode
/// reads return the stored (or preset) value and updates are no-ops.
class TrustStore {
public:
    explicit TrustStore(TrustParams params = {});

    /// Stored value or the preset for unseen sources; the read does not
    /// insert.
    double get_trust(const std::string& source_id) const;

    /// Applies the update rule and returns the new value. No-op in Static
    /// mode (returns the current value).
    double record_outcome(const std::string& source_id, SourceOutcome outcome);

    int update_count(const std::string& source_id) const;
    const TrustParams& params() const noexcept { return params_; }

    /// Snapshot format: {source_id: {"trust": t, "update_count": n}}.
    nlohmann::json snapshot() const;
    void load_snapshot(const nlohmann::json& snap);

private:
    struct Entry {
        double trust = 0.0;
        int update_count = 0;
    };

    TrustParams params_;
    mutable std::mutex mutex_;
    std::map<std::string, Entry> entries_;
};

} // namespace intentguard
