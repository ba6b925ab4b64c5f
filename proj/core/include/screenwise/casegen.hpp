#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "screenwise/domain.hpp"

namespace screenwise::casegen {

inline constexpr int kMinAge = 16;
inline constexpr int kMaxAge = 90;
inline constexpr int kMinFactors = 1;
inline constexpr int kMaxFactors = 4;
inline constexpr int kDefaultCaseCount = 50;

struct UseCase {
    int case_id = 1;
    Gender gender = Gender::female;
    int age = kMinAge;
    // Distinct, in registry order.
    std::vector<RiskFactor> risk_factors;
    std::string history_text;

    friend bool operator==(const UseCase&, const UseCase&) = default;
};

// Throws InvariantViolation naming the first broken invariant.
void validate(const UseCase& c);

// Background sentence naming every factor's display name once.
std::string compose_history(std::span<const RiskFactor> factors);

struct GeneratorConfig {
    std::uint64_t seed = 1;
    int count = kDefaultCaseCount;
    std::span<const RiskFactorInfo> registry = risk_factor_registry();
    std::string template_pool_id = "narrative-v1";
};

// Exactly cfg.count cases with ids 1..count. Each case draws from its own
// stream seeded by (seed, case_id), so the output is independent of
// generation order. Throws EmptyRegistry, InvariantViolation (count < 1).
std::vector<UseCase> generate_cases(const GeneratorConfig& cfg);

// Derives a 64-bit stream seed from a base seed and a salt (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept;

enum class RenderMode : std::uint8_t { structured, unstructured };

std::string_view to_string(RenderMode m) noexcept;
std::optional<RenderMode> parse_render_mode(std::string_view s) noexcept;

struct RenderedCase {
    int case_id = 0;
    RenderMode mode = RenderMode::structured;
    std::string text;

    friend bool operator==(const RenderedCase&, const RenderedCase&) = default;
};

// Four lines: gender:, age:, risk_factors:, history:.
RenderedCase render_structured(const UseCase& c);

// Narrative paragraph drawn from the template pool; the template and the
// person's name depend only on (template_seed, case_id).
RenderedCase render_unstructured(const UseCase& c, std::uint64_t template_seed);

std::size_t narrative_template_count() noexcept;

// Inverse of render_structured. The structured text carries no case id, so
// the caller supplies it. Throws FormatError, InvariantViolation.
UseCase parse_structured(std::string_view text, int case_id = 1);

// ---- cases file (JSON Lines) ----------------------------------------------

struct CaseFileEntry {
    UseCase use_case;
    std::optional<std::string> rendered_structured;
    std::optional<std::string> rendered_unstructured;

    friend bool operator==(const CaseFileEntry&, const CaseFileEntry&) = default;
};

std::string to_jsonl_line(const CaseFileEntry& e);
CaseFileEntry from_jsonl_line(std::string_view line);

void write_cases(std::ostream& out, std::span<const CaseFileEntry> entries);
std::vector<CaseFileEntry> read_cases(std::istream& in);
std::vector<CaseFileEntry> read_cases_file(const std::string& path);

// Convenience: entries with both renderings filled in.
std::vector<CaseFileEntry> with_renderings(std::span<const UseCase> cases,
                                           std::uint64_t template_seed);

}  // namespace screenwise::casegen
