#include <algorithm>
#include <cctype>

#include "screenwise/error.hpp"
#include "screenwise/llmlink.hpp"
#include "screenwise/oracle.hpp"

namespace screenwise::llm {

namespace {

constexpr std::string_view kBeginCase = "BEGIN CASE\n";
constexpr std::string_view kEndCase = "\nEND CASE";
constexpr std::string_view kCaseHeader = "Use case ";

std::string lowercase(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::optional<int> leading_int(std::string_view s) {
    int value = 0;
    std::size_t i = 0;
    while (i < s.size() && i < 9 && std::isdigit(static_cast<unsigned char>(s[i]))) {
        value = value * 10 + (s[i] - '0');
        ++i;
    }
    if (i == 0) return std::nullopt;
    return value;
}

Recommendation corrupt(Recommendation r) {
    const auto n = rules::kAllRecommendations.size();
    const auto idx = static_cast<std::size_t>(r);
    return rules::kAllRecommendations[(idx + 1) % n];
}

std::string explain(const oracle::OracleVerdict& v, const rules::RuleSet& rs) {
    if (v.triggered.empty()) {
        return "No stored rule has all of its conditions satisfied, so the fallback " +
               std::string(rules::to_string(v.recommendation)) + " applies.";
    }
    std::string out;
    for (auto id : v.triggered) {
        const auto* rule = rs.find(id);
        if (!out.empty()) out += ' ';
        out += "Rule " + id.str() + " fires because ";
        for (std::size_t i = 0; i < rule->conditions.size(); ++i) {
            if (i) out += " and ";
            out += rules::to_phrase(rule->conditions[i]);
        }
        out += '.';
    }
    if (v.triggered.size() > 1) {
        out += " The most intensive recommendation, " + std::string(rules::to_string(v.recommendation)) +
               ", takes precedence.";
    }
    return out;
}

}  // namespace

casegen::UseCase extract_case_facts(std::string_view case_text, int case_id) {
    try {
        return casegen::parse_structured(case_text, case_id);
    } catch (const Error&) {
        // Not the structured format; fall through to keyword extraction.
    }

    casegen::UseCase c;
    c.case_id = case_id;
    const std::string text = lowercase(case_text);

    // Gender from whole words.
    bool female = false;
    bool male = false;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
        const std::string_view word(text.data() + i, j - i);
        if (word == "she" || word == "her" || word == "hers" || word == "woman" || word == "female") {
            female = true;
        } else if (word == "he" || word == "him" || word == "his" || word == "man" || word == "male") {
            male = true;
        }
        i = j;
    }
    c.gender = (male && !female) ? Gender::male : Gender::female;

    // First integer token in the case age range.
    c.age = 0;
    for (i = 0; i < text.size();) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        if (auto v = leading_int(std::string_view(text).substr(i, j - i));
            v && j - i <= 3 && *v >= casegen::kMinAge && *v <= casegen::kMaxAge) {
            c.age = *v;
            break;
        }
        i = j;
    }

    for (const auto& entry : risk_factor_registry()) {
        if (text.find(lowercase(entry.display_name)) != std::string::npos) {
            c.risk_factors.push_back(entry.code);
        }
    }
    c.history_text = std::string(case_text);
    return c;
}

std::string mock_respond(std::span<const ChatMessage> messages, BackendKind mode,
                         const NoiseProfile& noise, const rules::RuleSet& loaded_rules) {
    if (mode == BackendKind::remote) throw ProtocolError("mock_respond needs a mock mode");
    auto last = std::find_if(messages.rbegin(), messages.rend(),
                             [](const ChatMessage& m) { return m.role == "user"; });
    if (last == messages.rend()) return "Ready. Send the first rule.";
    const std::string_view prompt = last->content;

    const auto begin = prompt.find(kBeginCase);
    if (begin == std::string_view::npos) {
        // Rule loading: "Rule R<n>: ..." acknowledged verbatim.
        if (prompt.starts_with("Rule R")) {
            const auto colon = prompt.find(':');
            if (auto id = rules::parse_rule_id(prompt.substr(5, colon - 5))) {
                return "CONFIRMED " + id->str();
            }
        }
        return "Understood.";
    }

    int case_id = 0;
    if (const auto h = prompt.find(kCaseHeader); h != std::string_view::npos) {
        case_id = leading_int(prompt.substr(h + kCaseHeader.size())).value_or(0);
    }
    const auto body_begin = begin + kBeginCase.size();
    auto body_end = prompt.find(kEndCase, body_begin);
    if (body_end == std::string_view::npos) body_end = prompt.size();
    const auto facts = extract_case_facts(prompt.substr(body_begin, body_end - body_begin), case_id);

    const auto verdict = oracle::evaluate(facts, loaded_rules);
    Recommendation recommendation = verdict.recommendation;
    std::vector<RuleId> cited = verdict.triggered;
    std::string explanation = explain(verdict, loaded_rules);

    if (mode == BackendKind::mock_noisy) {
        if (noise.wrong_recommendation.count(case_id)) recommendation = corrupt(recommendation);
        if (noise.extra_rule.count(case_id)) {
            for (const auto& rule : loaded_rules.rules()) {
                if (std::find(cited.begin(), cited.end(), rule.id) == cited.end()) {
                    cited.push_back(rule.id);
                    explanation += " Rule " + rule.id.str() + " was also considered relevant.";
                    break;
                }
            }
        }
        if (noise.zero_rule.count(case_id)) cited.clear();
    }

    std::string reply = "Applying the stored rules to use case " + std::to_string(case_id) + ".\n";
    reply += "RECOMMENDATION: ";
    reply += rules::to_string(recommendation);
    reply += "\nTRIGGERED_RULES:";
    for (std::size_t k = 0; k < cited.size(); ++k) {
        reply += k ? ", " : " ";
        reply += cited[k].str();
    }
    reply += "\nEXPLANATION: " + explanation;
    return reply;
}

MockChatBackend::MockChatBackend(BackendKind mode, NoiseProfile noise)
    : mode_(mode), noise_(std::move(noise)) {
    if (mode_ == BackendKind::remote) throw InvariantViolation("MockChatBackend needs a mock mode");
}

std::string MockChatBackend::complete(std::span<const ChatMessage> messages) {
    return mock_respond(messages, mode_, noise_, rules_);
}

}  // namespace screenwise::llm
