#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "screenwise/domain.hpp"

namespace screenwise::rules {

// Screening actions, declared in ascending conflict-resolution priority.
// CONSULT_PHYSICIAN ranks above every screening action: it is both the
// zero-trigger fallback and the outcome for a personal cancer history, which
// needs individual follow-up regardless of what else fires.
enum class Recommendation : std::uint8_t {
    NO_ROUTINE_SCREENING,
    OPTIONAL_ANNUAL_MAMMOGRAM,
    BIENNIAL_OR_ANNUAL_MAMMOGRAM,
    ANNUAL_MAMMOGRAM,
    ANNUAL_MRI_AND_MAMMOGRAM,
    CONSULT_PHYSICIAN,
};

inline constexpr std::array kAllRecommendations{
    Recommendation::NO_ROUTINE_SCREENING,     Recommendation::OPTIONAL_ANNUAL_MAMMOGRAM,
    Recommendation::BIENNIAL_OR_ANNUAL_MAMMOGRAM, Recommendation::ANNUAL_MAMMOGRAM,
    Recommendation::ANNUAL_MRI_AND_MAMMOGRAM, Recommendation::CONSULT_PHYSICIAN,
};

int priority(Recommendation r) noexcept;
std::string_view to_string(Recommendation r) noexcept;
// English phrase used in rule prompts, e.g. "annual MRI and mammogram".
std::string_view phrase(Recommendation r) noexcept;
std::optional<Recommendation> parse_recommendation(std::string_view code) noexcept;

// "R<positive integer>". Ordered numerically.
struct RuleId {
    std::uint32_t number = 0;

    std::string str() const { return "R" + std::to_string(number); }
    friend auto operator<=>(const RuleId&, const RuleId&) = default;
};

std::optional<RuleId> parse_rule_id(std::string_view text) noexcept;

struct GenderIs {
    Gender gender;
    friend bool operator==(const GenderIs&, const GenderIs&) = default;
};

// Inclusive on both ends.
struct AgeInRange {
    int low;
    int high;
    friend bool operator==(const AgeInRange&, const AgeInRange&) = default;
};

struct HasRiskFactor {
    RiskFactor factor;
    friend bool operator==(const HasRiskFactor&, const HasRiskFactor&) = default;
};

struct RiskFactorCountAtLeast {
    int threshold;
    friend bool operator==(const RiskFactorCountAtLeast&, const RiskFactorCountAtLeast&) = default;
};

using Condition = std::variant<GenderIs, AgeInRange, HasRiskFactor, RiskFactorCountAtLeast>;

inline constexpr int kMinAgeBound = 0;
inline constexpr int kMaxAgeBound = 130;

// DSL spelling, e.g. "age_in(30,130)".
std::string to_dsl(const Condition& c);
// Prompt spelling, e.g. "the person's age is between 30 and 130".
std::string to_phrase(const Condition& c);

struct Rule {
    RuleId id;
    std::string name;
    std::vector<Condition> conditions;
    Recommendation recommendation = Recommendation::CONSULT_PHYSICIAN;
    std::string source_note;

    friend bool operator==(const Rule&, const Rule&) = default;
};

class RuleSet {
public:
    RuleSet() = default;
    // Throws DuplicateRuleId; an empty conditions list is an InvariantViolation.
    RuleSet(std::vector<Rule> rules, std::string version);

    const std::vector<Rule>& rules() const noexcept { return rules_; }
    const std::string& version() const noexcept { return version_; }
    // Hex SHA-256 of serialize(*this).
    const std::string& checksum() const noexcept { return checksum_; }

    bool empty() const noexcept { return rules_.empty(); }
    std::size_t size() const noexcept { return rules_.size(); }
    const Rule* find(RuleId id) const noexcept;
    bool contains(RuleId id) const noexcept { return find(id) != nullptr; }

    friend bool operator==(const RuleSet&, const RuleSet&) = default;

private:
    std::vector<Rule> rules_;
    std::string version_;
    std::string checksum_;
};

// Parses the line-oriented rule DSL:
//
//   file       = { line } ;
//   line       = blank | comment | version | rule ;
//   comment    = "#" { any } ;
//   version    = "VERSION" string ;
//   rule       = "RULE" rule_id string "IF" condition { "AND" condition }
//                "THEN" recommendation [ "SOURCE" string ] ;
//   condition  = "gender_is" "(" ( "female" | "male" ) ")"
//              | "age_in" "(" int "," int ")"
//              | "has_risk_factor" "(" CODE ")"
//              | "risk_factor_count_at_least" "(" int ")" ;
//   rule_id    = "R" digit { digit } ;   (value >= 1)
//   string     = '"' { any but '"' or '\' | '\' any } '"' ;
//
// Throws SyntaxError, DuplicateRuleId, UnknownRiskFactor. Never aborts.
RuleSet parse_rules(std::string_view text);
RuleSet load_rules_file(const std::string& path);
// One condition in DSL spelling. Throws SyntaxError, UnknownRiskFactor.
Condition parse_condition(std::string_view text);

// Canonical form: optional VERSION line, then one rule per line.
std::string serialize(const RuleSet& rs);
std::string serialize(const Rule& r);

// "Rule R1: IF ... AND ... THEN recommend <phrase>."
std::string render_rule_prompt(const Rule& r);

struct RuleConflict {
    RuleId first;
    RuleId second;
    Recommendation first_recommendation;
    Recommendation second_recommendation;
};

struct ValidationReport {
    std::vector<RuleId> unreachable;
    std::vector<RuleConflict> conflicts;

    bool ok() const noexcept { return unreachable.empty(); }
};

// Satisfiability is judged over the case domain: ages 16..90, up to four
// distinct risk factors from the registry, one gender.
inline constexpr int kCaseMinAge = 16;
inline constexpr int kCaseMaxAge = 90;
inline constexpr int kCaseMaxRiskFactors = 4;

bool satisfiable(const std::vector<Condition>& conjunction);
ValidationReport validate_ruleset(const RuleSet& rs);
std::string format_report(const ValidationReport& report, const RuleSet& rs);

}  // namespace screenwise::rules
