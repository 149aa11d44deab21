#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace intentguard {

/// Static table of per-tool inherent risk scores in [0, 1], quantifying a
/// tool's intrinsic potential for significant or irreversible state change
/// independent of its arguments. Immutable after load.
class RiskTable {
public:
    RiskTable() = default;

    /// Parses the flat {"tool": risk, ..., "_default": risk} format.
    /// Throws ParseError on malformed input, RangeError for values
    /// outside [0, 1].
    static RiskTable from_json(const nlohmann::json& doc);

    double lookup(const std::string& tool_name) const;
    bool contains(const std::string& tool_name) const;
    double default_risk() const noexcept { return default_risk_; }
    std::size_t size() const noexcept { return entries_.size(); }

    /// Suite tag for a known tool (generic/workspace/travel/slack/banking),
    /// derived from the bundled grouping; nullopt for unknown tools.
    std::optional<std::string> suite_tag(const std::string& tool_name) const;

    const std::map<std::string, double>& entries() const noexcept { return entries_; }

private:
    std::map<std::string, double> entries_;
    std::map<std::string, std::string> tags_;
    double default_risk_ = 0.8;
};

/// Loads a risk table from a JSON file on disk.
RiskTable load_risk_table(const std::string& path);

} // namespace intentguard
