#include "screenwise/domain.hpp"

#include <array>

namespace screenwise {

namespace {

constexpr std::array<RiskFactorInfo, 9> kRegistry{{
    {RiskFactor::BRCA_MUTATION, "BRCA_MUTATION", "known BRCA1/BRCA2 gene mutation",
     "confirmed by genetic testing"},
    {RiskFactor::FIRST_DEGREE_RELATIVE_BRCA, "FIRST_DEGREE_RELATIVE_BRCA",
     "parent, sibling or child carrying a BRCA mutation", "reported after a relative was tested"},
    {RiskFactor::FAMILY_HISTORY_BREAST_CANCER, "FAMILY_HISTORY_BREAST_CANCER",
     "family history of breast cancer", "noted on the intake questionnaire"},
    {RiskFactor::CHEST_RADIATION_THERAPY_AGE_10_30, "CHEST_RADIATION_THERAPY_AGE_10_30",
     "radiation therapy to the chest between ages ten and thirty",
     "received as treatment for an earlier illness"},
    {RiskFactor::LI_FRAUMENI_SYNDROME, "LI_FRAUMENI_SYNDROME", "Li-Fraumeni syndrome",
     "diagnosed by a genetic counselor"},
    {RiskFactor::COWDEN_SYNDROME, "COWDEN_SYNDROME", "Cowden syndrome",
     "diagnosed by a genetic counselor"},
    {RiskFactor::BANNAYAN_RILEY_RUVALCABA_SYNDROME, "BANNAYAN_RILEY_RUVALCABA_SYNDROME",
     "Bannayan-Riley-Ruvalcaba syndrome", "identified in childhood"},
    {RiskFactor::PERSONAL_HISTORY_BREAST_CANCER, "PERSONAL_HISTORY_BREAST_CANCER",
     "personal history of breast cancer", "treated in the past"},
    {RiskFactor::DENSE_BREAST_TISSUE, "DENSE_BREAST_TISSUE", "dense breast tissue",
     "seen on a previous imaging report"},
}};

}  // namespace

std::string_view to_string(Gender g) noexcept {
    return g == Gender::female ? "female" : "male";
}

std::optional<Gender> parse_gender(std::string_view text) noexcept {
    if (text == "female") return Gender::female;
    if (text == "male") return Gender::male;
    return std::nullopt;
}

std::span<const RiskFactorInfo> risk_factor_registry() noexcept { return kRegistry; }

const RiskFactorInfo& info(RiskFactor f) noexcept {
    return kRegistry[static_cast<std::size_t>(f)];
}

std::string_view to_string(RiskFactor f) noexcept { return info(f).code_name; }

std::string_view display_name(RiskFactor f) noexcept { return info(f).display_name; }

std::optional<RiskFactor> parse_risk_factor(std::string_view code) noexcept {
    for (const auto& entry : kRegistry) {
        if (entry.code_name == code) return entry.code;
    }
    return std::nullopt;
}

}  // namespace screenwise
