#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace screenwise {

enum class Gender : std::uint8_t { female, male };

std::string_view to_string(Gender g) noexcept;
std::optional<Gender> parse_gender(std::string_view text) noexcept;

// Closed registry of screening risk factors. Enumerator order is registry
// order: structured renderings and risk-factor sets sort by it.
enum class RiskFactor : std::uint8_t {
    BRCA_MUTATION,
    FIRST_DEGREE_RELATIVE_BRCA,
    FAMILY_HISTORY_BREAST_CANCER,
    CHEST_RADIATION_THERAPY_AGE_10_30,
    LI_FRAUMENI_SYNDROME,
    COWDEN_SYNDROME,
    BANNAYAN_RILEY_RUVALCABA_SYNDROME,
    PERSONAL_HISTORY_BREAST_CANCER,
    DENSE_BREAST_TISSUE,
};

struct RiskFactorInfo {
    RiskFactor code;
    std::string_view code_name;
    // Human-readable label. No label is a substring of another and none
    // contains an integer in the case age range, so labels can be located
    // in free text unambiguously.
    std::string_view display_name;
    // Short onset phrase used when composing background history sentences.
    std::string_view onset;
};

// The full registry, in registry order.
std::span<const RiskFactorInfo> risk_factor_registry() noexcept;

const RiskFactorInfo& info(RiskFactor f) noexcept;
std::string_view to_string(RiskFactor f) noexcept;
std::string_view display_name(RiskFactor f) noexcept;
std::optional<RiskFactor> parse_risk_factor(std::string_view code) noexcept;

}  // namespace screenwise
