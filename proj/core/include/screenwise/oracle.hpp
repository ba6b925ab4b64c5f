#pragma once

#include <cstddef>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "screenwise/casegen.hpp"
#include "screenwise/rules.hpp"

namespace screenwise::oracle {

using rules::Recommendation;
using rules::RuleId;

struct TraceEntry {
    RuleId rule_id;
    rules::Condition condition;
    bool holds = false;

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct OracleVerdict {
    int case_id = 0;
    // Fired rules, in rule-set order.
    std::vector<RuleId> triggered;
    Recommendation recommendation = Recommendation::CONSULT_PHYSICIAN;
    // One entry per (rule, condition) pair, rule-set order then declaration order.
    std::vector<TraceEntry> trace;

    friend bool operator==(const OracleVerdict&, const OracleVerdict&) = default;
};

bool holds(const rules::Condition& condition, const casegen::UseCase& c) noexcept;

// Single-pass forward chaining: a rule fires iff every condition holds.
OracleVerdict evaluate(const casegen::UseCase& c, const rules::RuleSet& rs);

// Highest-priority element. Permutation invariant. An empty input yields the
// zero-trigger fallback, CONSULT_PHYSICIAN.
Recommendation resolve_conflicts(std::span<const Recommendation> triggered) noexcept;

// Probe ages for a rule set: 16 and 90, plus for every age_in(lo,hi) the
// values lo-1, lo, lo+1, hi, hi+1 that fall inside [16,90]. Sorted, unique.
std::vector<int> grid_ages(const rules::RuleSet& rs);

// Finite input grid: gender x grid_ages x every risk-factor subset of size
// 0..4. Cases are materialized on dereference. Cases with an empty subset
// fall outside the generator's invariants and exist only to probe rules.
class InputGrid {
public:
    InputGrid(const rules::RuleSet& rs, std::span<const RiskFactorInfo> registry);

    class iterator {
    public:
        using iterator_category = std::input_iterator_tag;
        using value_type = casegen::UseCase;
        using difference_type = std::ptrdiff_t;
        using pointer = void;
        using reference = casegen::UseCase;

        iterator() = default;
        casegen::UseCase operator*() const { return grid_->at(index_); }
        iterator& operator++() {
            ++index_;
            return *this;
        }
        iterator operator++(int) {
            auto copy = *this;
            ++index_;
            return copy;
        }
        friend bool operator==(const iterator& a, const iterator& b) {
            return a.index_ == b.index_;
        }

    private:
        friend class InputGrid;
        iterator(const InputGrid* grid, std::size_t index) : grid_(grid), index_(index) {}
        const InputGrid* grid_ = nullptr;
        std::size_t index_ = 0;
    };

    iterator begin() const { return {this, 0}; }
    iterator end() const { return {this, size()}; }
    std::size_t size() const noexcept { return 2 * ages_.size() * subsets_.size(); }
    casegen::UseCase at(std::size_t index) const;

    const std::vector<int>& ages() const noexcept { return ages_; }
    std::size_t subset_count() const noexcept { return subsets_.size(); }

private:
    std::vector<int> ages_;
    std::vector<std::vector<RiskFactor>> subsets_;
};

InputGrid enumerate_input_grid(const rules::RuleSet& rs,
                               std::span<const RiskFactorInfo> registry = risk_factor_registry());

// ---- verdicts file (JSON Lines) ---------------------------------------------

std::string to_jsonl_line(const OracleVerdict& v, bool include_trace = false);
// Throws FormatError.
OracleVerdict from_jsonl_line(std::string_view line);

}  // namespace screenwise::oracle
