#include "intentguard/trust_store.hpp"

#include <algorithm>

#include "intentguard/errors.hpp"

namespace intentguard {

void TrustParams::validate() const {
    if (delta < 0.0 || delta >= 1.0) {
        throw ConfigError("trust delta must be in [0, 1)");
    }
    if (alpha < 0.0 || beta < 0.0) {
        throw ConfigError("trust alpha/beta must be non-negative");
    }
    if (preset < 0.0 || preset > 1.0) {
        throw ConfigError("trust preset must be in [0, 1]");
    }
}

TrustStore::TrustStore(TrustParams params) : params_(params) {
    params_.validate();
}

double TrustStore::get_trust(const std::string& source_id) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(source_id);
    return it == entries_.end() ? params_.preset : it->second.trust;
}

double TrustStore::record_outcome(const std::string& source_id, SourceOutcome outcome) {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(source_id);
    const double current = it == entries_.end() ? params_.preset : it->second.trust;
    if (params_.mode == TrustMode::Static) {
        return current;
    }
    double next = (1.0 - params_.delta) * current;
    if (outcome == SourceOutcome::Benign) {
        next += params_.alpha;
    } else {
        next -= params_.beta;
    }
    next = std::clamp(next, 0.0, 1.0);
    auto& entry = entries_[source_id];
    entry.trust = next;
    entry.update_count++;
    return next;
}

int TrustStore::update_count(const std::string& source_id) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(source_id);
    return it == entries_.end() ? 0 : it->second.update_count;
}

nlohmann::json TrustStore::snapshot() const {
    std::lock_guard lock(mutex_);
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [source, entry] : entries_) {
        out[source] = {{"trust", entry.trust}, {"update_count", entry.update_count}};
    }
    return out;
}

void TrustStore::load_snapshot(const nlohmann::json& snap) {
    if (!snap.is_object()) {
        throw ParseError("trust snapshot must be a JSON object");
    }
    std::lock_guard lock(mutex_);
    for (const auto& [source, value] : snap.items()) {
        if (!value.is_object() || !value.contains("trust")) {
            throw ParseError("trust snapshot entry for \"" + source + "\" is malformed");
        }
        const double trust = value.at("trust").get<double>();
        if (trust < 0.0 || trust > 1.0) {
            throw RangeError("trust snapshot value for \"" + source + "\" out of [0, 1]");
        }
        Entry entry;
        entry.trust = trust;
        entry.update_count = value.value("update_count", 0);
        entries_[source] = entry;
    }
}

} // namespace intentguard
