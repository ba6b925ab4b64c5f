#include <algorithm>
#include <cctype>

#include "screenwise/llmlink.hpp"

namespace screenwise::llm {

namespace {

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), lower);
    return out;
}

// Lower-case, '_' and '-' as spaces, other punctuation dropped, spaces collapsed.
std::string normalize(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (c == '_' || c == '-' || std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else if (is_alnum(c)) {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(lower(c));
        }
    }
    return out;
}

bool contains_words(std::string_view haystack, std::string_view needle) {
    for (auto pos = haystack.find(needle); pos != std::string_view::npos;
         pos = haystack.find(needle, pos + 1)) {
        const bool left = pos == 0 || haystack[pos - 1] == ' ';
        const auto end = pos + needle.size();
        const bool right = end == haystack.size() || haystack[end] == ' ';
        if (left && right) return true;
    }
    return false;
}

struct LabelHit {
    std::size_t value_begin = std::string_view::npos;
};

// Last occurrence of any spelling of a label; returns where its value starts.
LabelHit find_last_label(const std::string& lowered, std::initializer_list<std::string_view> spellings) {
    LabelHit hit;
    std::size_t best = std::string::npos;
    for (auto s : spellings) {
        auto pos = lowered.rfind(s);
        if (pos != std::string::npos && (best == std::string::npos || pos > best)) {
            best = pos;
            hit.value_begin = pos + s.size();
        }
    }
    return hit;
}

std::string_view rest_of_line(std::string_view raw, std::size_t begin) {
    auto end = raw.find('\n', begin);
    if (end == std::string_view::npos) end = raw.size();
    return raw.substr(begin, end - begin);
}

std::string_view strip_decoration(std::string_view s) {
    auto junk = [](char c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '*' || c == '`' || c == '_';
    };
    while (!s.empty() && junk(s.front())) s.remove_prefix(1);
    while (!s.empty() && junk(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view recommendation_label(const std::optional<Recommendation>& r) noexcept {
    return r ? rules::to_string(*r) : std::string_view("UNPARSEABLE");
}

std::optional<Recommendation> match_recommendation(std::string_view text) {
    const std::string value = normalize(text);
    if (value.empty()) return std::nullopt;
    for (auto r : rules::kAllRecommendations) {
        if (value == normalize(rules::to_string(r)) || value == normalize(rules::phrase(r))) return r;
    }
    // Otherwise the longest vocabulary entry appearing as whole words wins;
    // two different entries of equal length are ambiguous.
    std::optional<Recommendation> best;
    std::size_t best_len = 0;
    bool ambiguous = false;
    for (auto r : rules::kAllRecommendations) {
        for (const auto& candidate : {normalize(rules::to_string(r)), normalize(rules::phrase(r))}) {
            if (!contains_words(value, candidate)) continue;
            if (candidate.size() > best_len) {
                best = r;
                best_len = candidate.size();
                ambiguous = false;
            } else if (candidate.size() == best_len && best != r) {
                ambiguous = true;
            }
        }
    }
    if (ambiguous) return std::nullopt;
    return best;
}

ParsedResponse parse_response(std::string_view raw, const std::set<RuleId>& known_ids) {
    ParsedResponse out;
    const std::string lowered = to_lower(raw);

    if (auto hit = find_last_label(lowered, {"recommendation:"});
        hit.value_begin != std::string::npos) {
        out.recommendation = match_recommendation(strip_decoration(rest_of_line(raw, hit.value_begin)));
    }

    if (auto hit = find_last_label(lowered, {"triggered_rules:", "triggered rules:"});
        hit.value_begin != std::string::npos) {
        const auto line = rest_of_line(raw, hit.value_begin);
        for (std::size_t i = 0; i < line.size(); ++i) {
            if ((line[i] != 'R' && line[i] != 'r') || (i > 0 && is_alnum(line[i - 1]))) continue;
            std::size_t j = i + 1;
            while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
            if (j == i + 1 || (j < line.size() && is_alnum(line[j]))) continue;
            std::string token = "R" + std::string(line.substr(i + 1, j - i - 1));
            if (auto id = rules::parse_rule_id(token)) {
                (known_ids.count(*id) ? out.cited_rules : out.unknown_citations).insert(*id);
            }
            i = j - 1;
        }
    }

    if (auto hit = find_last_label(lowered, {"explanation:"}); hit.value_begin != std::string::npos) {
        std::string_view rest = raw.substr(hit.value_begin);
        // The explanation runs to the end of its paragraph.
        std::size_t end = rest.size();
        for (std::size_t pos = rest.find('\n'); pos != std::string_view::npos;
             pos = rest.find('\n', pos + 1)) {
            std::size_t k = pos + 1;
            while (k < rest.size() && (rest[k] == ' ' || rest[k] == '\t' || rest[k] == '\r')) ++k;
            if (k >= rest.size() || rest[k] == '\n') {
                end = pos;
                break;
            }
        }
        auto text = rest.substr(0, end);
        while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
        while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
        out.explanation = std::string(text);
    }
    return out;
}

bool confirms(std::string_view reply, RuleId id) {
    const std::string lowered = to_lower(reply);
    const std::string_view kw = "confirmed";
    for (auto pos = lowered.find(kw); pos != std::string::npos; pos = lowered.find(kw, pos + 1)) {
        if (pos > 0 && is_alnum(lowered[pos - 1])) continue;
        std::size_t i = pos + kw.size();
        if (i >= lowered.size() || !std::isspace(static_cast<unsigned char>(lowered[i]))) continue;
        while (i < lowered.size() && std::isspace(static_cast<unsigned char>(lowered[i]))) ++i;
        if (i >= lowered.size() || lowered[i] != 'r') continue;
        std::size_t j = i + 1;
        while (j < lowered.size() && std::isdigit(static_cast<unsigned char>(lowered[j]))) ++j;
        if (j < lowered.size() && is_alnum(lowered[j])) continue;
        auto parsed = rules::parse_rule_id("R" + lowered.substr(i + 1, j - i - 1));
        if (parsed && *parsed == id) return true;
    }
    return false;
}

}  // namespace screenwise::llm
