#include "screenwise/oracle.hpp"

#include <algorithm>
#include <set>

#include "json_codec.hpp"
#include "screenwise/error.hpp"

namespace screenwise::oracle {

bool holds(const rules::Condition& condition, const casegen::UseCase& c) noexcept {
    if (const auto* g = std::get_if<rules::GenderIs>(&condition)) return c.gender == g->gender;
    if (const auto* a = std::get_if<rules::AgeInRange>(&condition)) {
        return a->low <= c.age && c.age <= a->high;
    }
    if (const auto* h = std::get_if<rules::HasRiskFactor>(&condition)) {
        return std::find(c.risk_factors.begin(), c.risk_factors.end(), h->factor) !=
               c.risk_factors.end();
    }
    const auto& n = std::get<rules::RiskFactorCountAtLeast>(condition);
    return static_cast<int>(c.risk_factors.size()) >= n.threshold;
}

OracleVerdict evaluate(const casegen::UseCase& c, const rules::RuleSet& rs) {
    OracleVerdict v;
    v.case_id = c.case_id;
    std::vector<Recommendation> fired;
    for (const auto& rule : rs.rules()) {
        bool all = true;
        for (const auto& cond : rule.conditions) {
            const bool ok = holds(cond, c);
            v.trace.push_back({rule.id, cond, ok});
            all = all && ok;
        }
        if (all) {
            v.triggered.push_back(rule.id);
            fired.push_back(rule.recommendation);
        }
    }
    v.recommendation = resolve_conflicts(fired);
    return v;
}

Recommendation resolve_conflicts(std::span<const Recommendation> triggered) noexcept {
    if (triggered.empty()) return Recommendation::CONSULT_PHYSICIAN;
    return *std::max_element(triggered.begin(), triggered.end(),
                             [](Recommendation a, Recommendation b) {
                                 return rules::priority(a) < rules::priority(b);
                             });
}

std::vector<int> grid_ages(const rules::RuleSet& rs) {
    std::set<int> ages{casegen::kMinAge, casegen::kMaxAge};
    auto add = [&](int a) {
        if (a >= casegen::kMinAge && a <= casegen::kMaxAge) ages.insert(a);
    };
    for (const auto& rule : rs.rules()) {
        for (const auto& cond : rule.conditions) {
            if (const auto* a = std::get_if<rules::AgeInRange>(&cond)) {
                add(a->low - 1);
                add(a->low);
                add(a->low + 1);
                add(a->high);
                add(a->high + 1);
            }
        }
    }
    return {ages.begin(), ages.end()};
}

InputGrid::InputGrid(const rules::RuleSet& rs, std::span<const RiskFactorInfo> registry)
    : ages_(grid_ages(rs)) {
    std::vector<RiskFactor> codes;
    for (const auto& entry : registry) codes.push_back(entry.code);
    std::sort(codes.begin(), codes.end());
    const std::size_t n = codes.size();
    const std::size_t max_k = std::min<std::size_t>(casegen::kMaxFactors, n);

    // Subsets by size, then lexicographically by registry index.
    for (std::size_t k = 0; k <= max_k; ++k) {
        std::vector<std::size_t> idx(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        for (;;) {
            std::vector<RiskFactor> subset;
            for (auto i : idx) subset.push_back(codes[i]);
            subsets_.push_back(std::move(subset));
            std::size_t pos = k;
            while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
        }
    }
}

casegen::UseCase InputGrid::at(std::size_t index) const {
    const std::size_t per_gender = ages_.size() * subsets_.size();
    casegen::UseCase c;
    c.case_id = static_cast<int>(index) + 1;
    c.gender = index < per_gender ? Gender::female : Gender::male;
    const std::size_t rest = index % per_gender;
    c.age = ages_[rest / subsets_.size()];
    c.risk_factors = subsets_[rest % subsets_.size()];
    c.history_text = c.risk_factors.empty() ? "No relevant background history."
                                            : casegen::compose_history(c.risk_factors);
    return c;
}

InputGrid enumerate_input_grid(const rules::RuleSet& rs, std::span<const RiskFactorInfo> registry) {
    return InputGrid(rs, registry);
}

std::string to_jsonl_line(const OracleVerdict& v, bool include_trace) {
    return detail::oracle_to_json(v, include_trace).dump();
}

OracleVerdict from_jsonl_line(std::string_view line) {
    detail::json j;
    try {
        j = detail::json::parse(line);
    } catch (const detail::json::parse_error& e) {
        throw FormatError(std::string("verdict line is not JSON: ") + e.what());
    }
    return detail::oracle_from_json(j);
}

}  // namespace screenwise::oracle
