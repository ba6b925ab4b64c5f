#include "screenwise/rules.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "screenwise/error.hpp"
#include "screenwise/sha256.hpp"

namespace screenwise::rules {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void append_quoted(std::string& out, std::string_view s) {
    out.push_back('"');
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
}

bool has_control_chars(std::string_view s) {
    return std::any_of(s.begin(), s.end(),
                       [](char c) { return static_cast<unsigned char>(c) < 0x20 || c == 0x7f; });
}

}  // namespace

int priority(Recommendation r) noexcept { return static_cast<int>(r); }

std::string_view to_string(Recommendation r) noexcept {
    switch (r) {
        case Recommendation::NO_ROUTINE_SCREENING: return "NO_ROUTINE_SCREENING";
        case Recommendation::OPTIONAL_ANNUAL_MAMMOGRAM: return "OPTIONAL_ANNUAL_MAMMOGRAM";
        case Recommendation::BIENNIAL_OR_ANNUAL_MAMMOGRAM: return "BIENNIAL_OR_ANNUAL_MAMMOGRAM";
        case Recommendation::ANNUAL_MAMMOGRAM: return "ANNUAL_MAMMOGRAM";
        case Recommendation::ANNUAL_MRI_AND_MAMMOGRAM: return "ANNUAL_MRI_AND_MAMMOGRAM";
        case Recommendation::CONSULT_PHYSICIAN: return "CONSULT_PHYSICIAN";
    }
    return "CONSULT_PHYSICIAN";
}

std::string_view phrase(Recommendation r) noexcept {
    switch (r) {
        case Recommendation::NO_ROUTINE_SCREENING: return "no routine screening";
        case Recommendation::OPTIONAL_ANNUAL_MAMMOGRAM: return "optional annual mammogram";
        case Recommendation::BIENNIAL_OR_ANNUAL_MAMMOGRAM: return "biennial or annual mammogram";
        case Recommendation::ANNUAL_MAMMOGRAM: return "annual mammogram";
        case Recommendation::ANNUAL_MRI_AND_MAMMOGRAM: return "annual MRI and mammogram";
        case Recommendation::CONSULT_PHYSICIAN: return "consulting a physician";
    }
    return "consulting a physician";
}

std::optional<Recommendation> parse_recommendation(std::string_view code) noexcept {
    for (auto r : kAllRecommendations) {
        if (to_string(r) == code) return r;
    }
    return std::nullopt;
}

std::optional<RuleId> parse_rule_id(std::string_view text) noexcept {
    if (text.size() < 2 || text.size() > 10 || text.front() != 'R') return std::nullopt;
    std::uint64_t value = 0;
    for (char c : text.substr(1)) {
        if (c < '0' || c > '9') return std::nullopt;
        value = value * 10 + static_cast<std::uint64_t>(c - '0');
    }
    if (value == 0 || value > 0xffffffffULL) return std::nullopt;
    return RuleId{static_cast<std::uint32_t>(value)};
}

std::string to_dsl(const Condition& c) {
    return std::visit(
        overloaded{
            [](const GenderIs& g) { return "gender_is(" + std::string(to_string(g.gender)) + ")"; },
            [](const AgeInRange& a) {
                return "age_in(" + std::to_string(a.low) + "," + std::to_string(a.high) + ")";
            },
            [](const HasRiskFactor& h) {
                return "has_risk_factor(" + std::string(to_string(h.factor)) + ")";
            },
            [](const RiskFactorCountAtLeast& n) {
                return "risk_factor_count_at_least(" + std::to_string(n.threshold) + ")";
            },
        },
        c);
}

std::string to_phrase(const Condition& c) {
    return std::visit(
        overloaded{
            [](const GenderIs& g) {
                return "the person's gender is " + std::string(to_string(g.gender));
            },
            [](const AgeInRange& a) {
                return "the person's age is between " + std::to_string(a.low) + " and " +
                       std::to_string(a.high);
            },
            [](const HasRiskFactor& h) {
                return "the person has risk factor " + std::string(display_name(h.factor));
            },
            [](const RiskFactorCountAtLeast& n) {
                return "the person has at least " + std::to_string(n.threshold) +
                       (n.threshold == 1 ? " risk factor" : " risk factors");
            },
        },
        c);
}

RuleSet::RuleSet(std::vector<Rule> rules, std::string version)
    : rules_(std::move(rules)), version_(std::move(version)) {
    if (has_control_chars(version_)) throw InvariantViolation("version contains control characters");
    std::set<RuleId> seen;
    for (const auto& r : rules_) {
        if (r.id.number == 0) throw InvariantViolation("rule id must be R<positive integer>");
        if (!seen.insert(r.id).second) throw DuplicateRuleId(r.id.str(), 0);
        if (r.conditions.empty()) throw InvariantViolation(r.id.str() + " has no conditions");
        if (has_control_chars(r.name) || has_control_chars(r.source_note)) {
            throw InvariantViolation(r.id.str() + " name/source contains control characters");
        }
        for (const auto& c : r.conditions) {
            if (const auto* a = std::get_if<AgeInRange>(&c)) {
                if (a->low < kMinAgeBound || a->high > kMaxAgeBound || a->low > kMaxAgeBound ||
                    a->high < kMinAgeBound) {
                    throw InvariantViolation(r.id.str() + " age bound outside [0,130]");
                }
            } else if (const auto* n = std::get_if<RiskFactorCountAtLeast>(&c)) {
                if (n->threshold < 0) throw InvariantViolation(r.id.str() + " negative threshold");
            }
        }
    }
    checksum_ = sha256_hex(serialize(*this));
}

const Rule* RuleSet::find(RuleId id) const noexcept {
    auto it = std::find_if(rules_.begin(), rules_.end(), [&](const Rule& r) { return r.id == id; });
    return it == rules_.end() ? nullptr : &*it;
}

std::string serialize(const Rule& r) {
    std::string out = "RULE " + r.id.str() + " ";
    append_quoted(out, r.name);
    out += " IF ";
    for (std::size_t i = 0; i < r.conditions.size(); ++i) {
        if (i) out += " AND ";
        out += to_dsl(r.conditions[i]);
    }
    out += " THEN ";
    out += to_string(r.recommendation);
    if (!r.source_note.empty()) {
        out += " SOURCE ";
        append_quoted(out, r.source_note);
    }
    return out;
}

std::string serialize(const RuleSet& rs) {
    std::string out;
    if (!rs.version().empty()) {
        out += "VERSION ";
        append_quoted(out, rs.version());
        out += '\n';
    }
    for (const auto& r : rs.rules()) {
        out += serialize(r);
        out += '\n';
    }
    return out;
}

std::string render_rule_prompt(const Rule& r) {
    std::string out = "Rule " + r.id.str() + ": IF ";
    for (std::size_t i = 0; i < r.conditions.size(); ++i) {
        if (i) out += " AND ";
        out += to_phrase(r.conditions[i]);
    }
    out += " THEN recommend ";
    out += phrase(r.recommendation);
    out += '.';
    return out;
}

bool satisfiable(const std::vector<Condition>& conjunction) {
    std::optional<Gender> gender;
    int low = kCaseMinAge;
    int high = kCaseMaxAge;
    std::set<RiskFactor> required;
    int min_count = 0;
    for (const auto& c : conjunction) {
        if (const auto* g = std::get_if<GenderIs>(&c)) {
            if (gender && *gender != g->gender) return false;
            gender = g->gender;
        } else if (const auto* a = std::get_if<AgeInRange>(&c)) {
            low = std::max(low, a->low);
            high = std::min(high, a->high);
        } else if (const auto* h = std::get_if<HasRiskFactor>(&c)) {
            required.insert(h->factor);
        } else if (const auto* n = std::get_if<RiskFactorCountAtLeast>(&c)) {
            min_count = std::max(min_count, n->threshold);
        }
    }
    if (low > high) return false;
    const int needed = std::max(static_cast<int>(required.size()), min_count);
    const int available = std::min(kCaseMaxRiskFactors, static_cast<int>(risk_factor_registry().size()));
    return needed <= available;
}

ValidationReport validate_ruleset(const RuleSet& rs) {
    ValidationReport report;
    const auto& rules = rs.rules();
    for (const auto& r : rules) {
        if (!satisfiable(r.conditions)) report.unreachable.push_back(r.id);
    }
    for (std::size_t i = 0; i < rules.size(); ++i) {
        for (std::size_t j = i + 1; j < rules.size(); ++j) {
            if (rules[i].recommendation == rules[j].recommendation) continue;
            auto merged = rules[i].conditions;
            merged.insert(merged.end(), rules[j].conditions.begin(), rules[j].conditions.end());
            if (satisfiable(merged)) {
                report.conflicts.push_back({rules[i].id, rules[j].id, rules[i].recommendation,
                                            rules[j].recommendation});
            }
        }
    }
    return report;
}

std::string format_report(const ValidationReport& report, const RuleSet& rs) {
    std::ostringstream out;
    out << "rules: " << rs.size() << "\n";
    out << "version: " << (rs.version().empty() ? "(none)" : rs.version()) << "\n";
    out << "checksum: " << rs.checksum() << "\n";
    out << "unreachable: " << report.unreachable.size() << "\n";
    for (const auto& id : report.unreachable) {
        out << "  " << id.str() << ": conditions cannot all hold for any case\n";
    }
    out << "conflicts (informational): " << report.conflicts.size() << "\n";
    for (const auto& c : report.conflicts) {
        out << "  " << c.first.str() << " (" << to_string(c.first_recommendation) << ") overlaps "
            << c.second.str() << " (" << to_string(c.second_recommendation) << ")\n";
    }
    return out.str();
}

}  // namespace screenwise::rules
