#pragma once

// JSON encodings shared by the verdicts file, reports and run manifests.

#include <json.hpp>

#include "screenwise/error.hpp"
#include "screenwise/llmlink.hpp"
#include "screenwise/oracle.hpp"

namespace screenwise::detail {

using json = nlohmann::ordered_json;

inline json rule_ids_to_json(auto const& ids) {
    json arr = json::array();
    for (const auto& id : ids) arr.push_back(id.str());
    return arr;
}

inline std::vector<rules::RuleId> rule_ids_from_json(const json& j, const char* field) {
    if (!j.is_array()) throw FormatError(std::string("'") + field + "' must be an array");
    std::vector<rules::RuleId> out;
    for (const auto& item : j) {
        auto id = item.is_string() ? rules::parse_rule_id(item.get<std::string>()) : std::nullopt;
        if (!id) throw FormatError(std::string("'") + field + "' holds a malformed rule id");
        out.push_back(*id);
    }
    return out;
}

inline const json& require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw FormatError(std::string("missing field '") + key + "'");
    return *it;
}

inline json oracle_to_json(const oracle::OracleVerdict& v, bool include_trace) {
    json j;
    j["case_id"] = v.case_id;
    j["triggered"] = rule_ids_to_json(v.triggered);
    j["recommendation"] = rules::to_string(v.recommendation);
    if (include_trace) {
        json trace = json::array();
        for (const auto& t : v.trace) {
            json e;
            e["rule_id"] = t.rule_id.str();
            e["condition"] = rules::to_dsl(t.condition);
            e["holds"] = t.holds;
            trace.push_back(std::move(e));
        }
        j["trace"] = std::move(trace);
    }
    return j;
}

inline oracle::OracleVerdict oracle_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("verdict must be a JSON object");
    oracle::OracleVerdict v;
    try {
        v.case_id = require(j, "case_id").get<int>();
        v.triggered = rule_ids_from_json(require(j, "triggered"), "triggered");
        auto rec = rules::parse_recommendation(require(j, "recommendation").get<std::string>());
        if (!rec) throw FormatError("unknown recommendation");
        v.recommendation = *rec;
        if (auto it = j.find("trace"); it != j.end()) {
            for (const auto& e : *it) {
                auto id = rules::parse_rule_id(require(e, "rule_id").get<std::string>());
                if (!id) throw FormatError("trace holds a malformed rule id");
                v.trace.push_back({*id, rules::parse_condition(require(e, "condition").get<std::string>()),
                                   require(e, "holds").get<bool>()});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("verdict has a mistyped field: ") + e.what());
    } catch (const SyntaxError& e) {
        throw FormatError(std::string("verdict trace condition: ") + e.what());
    }
    return v;
}

inline json llm_to_json(const llm::LlmVerdict& v) {
    json j;
    j["case_id"] = v.case_id;
    j["recommendation"] = llm::recommendation_label(v.recommendation);
    j["cited_rules"] = rule_ids_to_json(v.cited_rules);
    j["unknown_citations"] = rule_ids_to_json(v.unknown_citations);
    j["explanation"] = v.explanation_text;
    j["raw_response"] = v.raw_response;
    return j;
}

inline llm::LlmVerdict llm_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("llm verdict must be a JSON object");
    llm::LlmVerdict v;
    try {
        v.case_id = require(j, "case_id").get<int>();
        const auto rec = require(j, "recommendation").get<std::string>();
        if (rec != "UNPARSEABLE") {
            v.recommendation = rules::parse_recommendation(rec);
            if (!v.recommendation) throw FormatError("unknown recommendation '" + rec + "'");
        }
        for (auto id : rule_ids_from_json(require(j, "cited_rules"), "cited_rules")) v.cited_rules.insert(id);
        for (auto id : rule_ids_from_json(require(j, "unknown_citations"), "unknown_citations")) {
            v.unknown_citations.insert(id);
        }
        v.explanation_text = require(j, "explanation").get<std::string>();
        v.raw_response = require(j, "raw_response").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("llm verdict has a mistyped field: ") + e.what());
    }
    return v;
}

}  // namespace screenwise::detail
