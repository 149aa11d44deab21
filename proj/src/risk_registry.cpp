#include "intentguard/risk_registry.hpp"

#include <fstream>

#include "intentguard/errors.hpp"

namespace intentguard {

namespace {

// Suite grouping of the bundled table; tools missing here tag as "generic".
const std::map<std::string, std::string>& suite_groups() {
    static const std::map<std::string, std::string> groups = {
        {"read_file", "generic"},
        {"search_web", "generic"},
        {"send_email", "generic"},
        {"update_database", "generic"},
        {"delete_file", "generic"},
        {"transfer_money", "generic"},

        {"delete_email", "workspace"},
        {"get_unread_emails", "workspace"},
        {"get_sent_emails", "workspace"},
        {"get_received_emails", "workspace"},
        {"get_draft_emails", "workspace"},
        {"search_emails", "workspace"},
        {"search_contacts_by_name", "workspace"},
        {"search_contacts_by_email", "workspace"},
        {"get_current_day", "workspace"},
        {"search_calendar_events", "workspace"},
        {"get_day_calendar_events", "workspace"},
        {"create_calendar_event", "workspace"},
        {"cancel_calendar_event", "workspace"},
        {"reschedule_calendar_event", "workspace"},
        {"add_calendar_event_participants", "workspace"},
        {"append_to_file", "workspace"},
        {"search_files_by_filename", "workspace"},
        {"create_file", "workspace"},
        {"get_file_by_id", "workspace"},
        {"list_files", "workspace"},
        {"share_file", "workspace"},
        {"search_files", "workspace"},

        {"get_user_information", "travel"},
        {"get_all_hotels_in_city", "travel"},
        {"get_hotels_prices", "travel"},
        {"get_rating_reviews_for_hotels", "travel"},
        {"get_hotels_address", "travel"},
        {"get_all_restaurants_in_city", "travel"},
        {"get_cuisine_type_for_restaurants", "travel"},
        {"get_restaurants_address", "travel"},
        {"get_rating_reviews_for_restaurants", "travel"},
        {"get_dietary_restrictions_for_all_restaurants", "travel"},
        {"get_contact_information_for_restaurants", "travel"},
        {"get_price_for_restaurants", "travel"},
        {"check_restaurant_opening_hours", "travel"},
        {"get_all_car_rental_companies_in_city", "travel"},
        {"get_car_types_available", "travel"},
        {"get_rating_reviews_for_car_rental", "travel"},
        {"get_car_fuel_options", "travel"},
        {"get_car_rental_address", "travel"},
        {"get_car_price_per_day", "travel"},
        {"reserve_hotel", "travel"},
        {"reserve_car_rental", "travel"},
        {"reserve_restaurant", "travel"},
        {"get_flight_information", "travel"},

        {"get_channels", "slack"},
        {"add_user_to_channel", "slack"},
        {"read_channel_messages", "slack"},
        {"read_inbox", "slack"},
        {"send_direct_message", "slack"},
        {"send_channel_message", "slack"},
        {"get_users_in_channel", "slack"},
        {"invite_user_to_slack", "slack"},
        {"remove_user_from_slack", "slack"},
        {"get_webpage", "slack"},
        {"post_webpage", "slack"},

        {"get_iban", "banking"},
        {"send_money", "banking"},
        {"schedule_transaction", "banking"},
        {"update_scheduled_transaction", "banking"},
        {"get_balance", "banking"},
        {"get_most_recent_transactions", "banking"},
        {"get_scheduled_transactions", "banking"},
        {"get_user_info", "banking"},
        {"update_password", "banking"},
        {"update_user_info", "banking"},
    };
    return groups;
}

} // namespace

RiskTable RiskTable::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw ParseError("risk table must be a JSON object");
    }
    RiskTable table;
    bool default_seen = false;
    for (const auto& [tool, value] : doc.items()) {
        if (!value.is_number()) {
            throw ParseError("risk for \"" + tool + "\" must be a number");
        }
        const double risk = value.get<double>();
        if (risk < 0.0 || risk > 1.0) {
            throw RangeError("risk for \"" + tool + "\" out of [0, 1]: " + std::to_string(risk));
        }
        if (tool == "_default") {
            table.default_risk_ = risk;
            default_seen = true;
            continue;
        }
        table.entries_[tool] = risk;
        auto group = suite_groups().find(tool);
        table.tags_[tool] = group == suite_groups().end() ? "generic" : group->second;
    }
    if (!default_seen) {
        table.default_risk_ = 0.8;
    }
    return table;
}

double RiskTable::lookup(const std::string& tool_name) const {
    auto it = entries_.find(tool_name);
    return it == entries_.end() ? default_risk_ : it->second;
}

bool RiskTable::contains(const std::string& tool_name) const {
    return entries_.find(tool_name) != entries_.end();
}

std::optional<std::string> RiskTable::suite_tag(const std::string& tool_name) const {
    auto it = tags_.find(tool_name);
    if (it == tags_.end()) {
        return std::nullopt;
    }
    return it->second;
}

RiskTable load_risk_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open risk table file: " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("risk table is not valid JSON: " + std::string(e.what()));
    }
    return RiskTable::from_json(doc);
}

} // namespace intentguard
