#include "screenwise/casegen.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <numeric>
#include <random>

#include "screenwise/error.hpp"

namespace screenwise::casegen {

namespace {

constexpr std::string_view kTemplatePoolId = "narrative-v1";

// Slots: {name} {age} {article} {noun} {Subj} {subj} {Poss} {poss} {obj} {factors}
constexpr std::array<std::string_view, 6> kNarratives{
    "{name} is {article} {age}-year-old {noun}. {Poss} medical record mentions {factors}.",
    "At {age}, {name} is a {noun} asking about breast screening. During the visit {subj} "
    "described {factors}.",
    "A {noun} named {name}, {age} years old, wants to know whether screening is needed. {Subj} "
    "mentions {factors}.",
    "{name}, a {noun} aged {age}, wants to understand {poss} breast cancer risk. {Poss} "
    "background includes {factors}.",
    "Consider {name}, {article} {age}-year-old {noun}. The relevant background for {obj} is "
    "{factors}.",
    "{name} turned {age} this year. {Subj} is a {noun} whose chart lists {factors}.",
};

constexpr std::array<std::string_view, 8> kFemaleNames{"Maria", "Anna",  "Grace", "Leila",
                                                       "Sofia", "Hannah", "Priya", "Chloe"};
constexpr std::array<std::string_view, 8> kMaleNames{"James", "Omar",   "Daniel", "Mateo",
                                                     "Arjun", "Samuel", "Lucas",  "Tomasz"};

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    // Rejection sampling keeps the draw exact and portable; the standard
    // distributions are implementation-defined.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

std::string join_factors_prose(std::span<const RiskFactor> factors) {
    std::string out;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i > 0) out += (i + 1 == factors.size()) ? " and " : ", ";
        out += display_name(factors[i]);
    }
    return out;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos;
         pos = haystack.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

std::string fill(std::string_view tmpl, const std::vector<std::pair<std::string_view, std::string>>& slots) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i);
            const auto key = tmpl.substr(i + 1, close - i - 1);
            auto it = std::find_if(slots.begin(), slots.end(), [&](const auto& s) { return s.first == key; });
            out += it->second;
            i = close + 1;
        } else {
            out.push_back(tmpl[i++]);
        }
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

void validate(const UseCase& c) {
    if (c.case_id < 1) throw InvariantViolation("case_id must be positive");
    if (c.age < kMinAge || c.age > kMaxAge) {
        throw InvariantViolation("age " + std::to_string(c.age) + " outside [16,90]");
    }
    const auto n = static_cast<int>(c.risk_factors.size());
    if (n < kMinFactors || n > kMaxFactors) {
        throw InvariantViolation("risk factor count " + std::to_string(n) + " outside [1,4]");
    }
    for (std::size_t i = 1; i < c.risk_factors.size(); ++i) {
        if (c.risk_factors[i - 1] >= c.risk_factors[i]) {
            throw InvariantViolation("risk factors must be distinct and in registry order");
        }
    }
    if (c.history_text.empty()) throw InvariantViolation("history is empty");
    if (c.history_text.find_first_of("\r\n") != std::string::npos) {
        throw InvariantViolation("history must be a single line");
    }
    for (auto f : c.risk_factors) {
        if (count_occurrences(c.history_text, display_name(f)) != 1) {
            throw InvariantViolation("history must mention '" + std::string(display_name(f)) +
                                     "' exactly once");
        }
    }
}

std::string compose_history(std::span<const RiskFactor> factors) {
    std::string out = "Background history: ";
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) out += "; ";
        out += display_name(factors[i]);
        out += ", ";
        out += info(factors[i]).onset;
    }
    out += '.';
    return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<UseCase> generate_cases(const GeneratorConfig& cfg) {
    if (cfg.registry.empty()) throw EmptyRegistry();
    if (cfg.count < 1) throw InvariantViolation("count must be at least 1");
    if (cfg.template_pool_id != kTemplatePoolId) {
        throw InvariantViolation("unknown template pool '" + cfg.template_pool_id + "'");
    }

    const auto registry_size = static_cast<std::uint64_t>(cfg.registry.size());
    const auto max_factors = std::min<std::uint64_t>(kMaxFactors, registry_size);

    std::vector<UseCase> cases;
    cases.reserve(static_cast<std::size_t>(cfg.count));
    std::vector<std::size_t> pool(cfg.registry.size());
    for (int id = 1; id <= cfg.count; ++id) {
        std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(id)));
        UseCase c;
        c.case_id = id;
        c.gender = uniform_below(rng, 2) == 0 ? Gender::female : Gender::male;
        c.age = kMinAge + static_cast<int>(uniform_below(rng, kMaxAge - kMinAge + 1));
        const auto k = 1 + uniform_below(rng, max_factors);

        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::uint64_t i = 0; i < k; ++i) {
            const auto j = i + uniform_below(rng, registry_size - i);
            std::swap(pool[i], pool[j]);
            c.risk_factors.push_back(cfg.registry[pool[i]].code);
        }
        std::sort(c.risk_factors.begin(), c.risk_factors.end());
        c.history_text = compose_history(c.risk_factors);
        cases.push_back(std::move(c));
    }
    return cases;
}

std::string_view to_string(RenderMode m) noexcept {
    return m == RenderMode::structured ? "structured" : "unstructured";
}

std::optional<RenderMode> parse_render_mode(std::string_view s) noexcept {
    if (s == "structured") return RenderMode::structured;
    if (s == "unstructured") return RenderMode::unstructured;
    return std::nullopt;
}

RenderedCase render_structured(const UseCase& c) {
    std::string text = "gender: ";
    text += to_string(c.gender);
    text += "\nage: " + std::to_string(c.age);
    text += "\nrisk_factors: ";
    for (std::size_t i = 0; i < c.risk_factors.size(); ++i) {
        if (i) text += ", ";
        text += to_string(c.risk_factors[i]);
    }
    text += "\nhistory: " + c.history_text;
    return {c.case_id, RenderMode::structured, std::move(text)};
}

std::size_t narrative_template_count() noexcept { return kNarratives.size(); }

RenderedCase render_unstructured(const UseCase& c, std::uint64_t template_seed) {
    const auto h = derive_seed(template_seed, static_cast<std::uint64_t>(c.case_id));
    const auto tmpl = kNarratives[h % kNarratives.size()];
    const bool female = c.gender == Gender::female;
    const auto name = female ? kFemaleNames[(h >> 32) % kFemaleNames.size()]
                             : kMaleNames[(h >> 32) % kMaleNames.size()];
    // "an" before ages read with a leading vowel sound: 18, 80-89.
    const bool an = c.age == 18 || (c.age >= 80 && c.age <= 89);

    std::vector<std::pair<std::string_view, std::string>> slots{
        {"name", std::string(name)},
        {"age", std::to_string(c.age)},
        {"article", an ? "an" : "a"},
        {"noun", female ? "woman" : "man"},
        {"Subj", female ? "She" : "He"},
        {"subj", female ? "she" : "he"},
        {"Poss", female ? "Her" : "His"},
        {"poss", female ? "her" : "his"},
        {"obj", female ? "her" : "him"},
        {"factors", join_factors_prose(c.risk_factors)},
    };
    return {c.case_id, RenderMode::unstructured, fill(tmpl, slots)};
}

UseCase parse_structured(std::string_view text, int case_id) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();

    static constexpr std::array<std::string_view, 4> kKeys{"gender:", "age:", "risk_factors:",
                                                           "history:"};
    std::array<std::string_view, 4> values;
    for (std::size_t i = 0; i < kKeys.size(); ++i) {
        if (i >= lines.size() || !lines[i].starts_with(kKeys[i])) {
            throw FormatError("missing or misordered line: expected '" + std::string(kKeys[i]) + "'");
        }
        values[i] = lines[i].substr(kKeys[i].size());
        if (!values[i].empty() && values[i].front() == ' ') values[i].remove_prefix(1);
        if (!values[i].empty() && values[i].back() == '\r') values[i].remove_suffix(1);
    }
    if (lines.size() > kKeys.size()) throw FormatError("unexpected line after 'history:'");

    UseCase c;
    c.case_id = case_id;
    auto g = parse_gender(trim(values[0]));
    if (!g) throw FormatError("gender must be female or male");
    c.gender = *g;

    const auto age_text = trim(values[1]);
    auto [ptr, ec] = std::from_chars(age_text.data(), age_text.data() + age_text.size(), c.age);
    if (ec != std::errc{} || ptr != age_text.data() + age_text.size()) {
        throw FormatError("age must be an integer");
    }

    std::string_view rest = values[2];
    while (!trim(rest).empty()) {
        auto comma = rest.find(',');
        auto code = trim(rest.substr(0, comma));
        auto f = parse_risk_factor(code);
        if (!f) throw FormatError("unknown risk factor '" + std::string(code) + "'");
        c.risk_factors.push_back(*f);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    std::sort(c.risk_factors.begin(), c.risk_factors.end());
    if (std::adjacent_find(c.risk_factors.begin(), c.risk_factors.end()) != c.risk_factors.end()) {
        throw InvariantViolation("duplicate risk factor");
    }
    c.history_text = std::string(values[3]);
    validate(c);
    return c;
}

std::vector<CaseFileEntry> with_renderings(std::span<const UseCase> cases,
                                           std::uint64_t template_seed) {
    std::vector<CaseFileEntry> out;
    out.reserve(cases.size());
    for (const auto& c : cases) {
        out.push_back({c, render_structured(c).text, render_unstructured(c, template_seed).text});
    }
    return out;
}

}  // namespace screenwise::casegen
