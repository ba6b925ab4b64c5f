#include <gtest/gtest.h>

#include <random>

#include "screenwise/error.hpp"
#include "screenwise/prompts.hpp"
#include "screenwise/rules.hpp"
#include "support.hpp"

using namespace screenwise;
using namespace screenwise::rules;
using screenwise::testing::read_text;
using screenwise::testing::test_data;

namespace {

constexpr std::string_view kR1 =
    R"(RULE R1 "brca_high_risk" IF has_risk_factor(BRCA_MUTATION) AND age_in(30,130) THEN ANNUAL_MRI_AND_MAMMOGRAM)";

RuleSet default_pack() { return load_rules_file(llm::default_rules_path()); }

}  // namespace

TEST(RiskFactorRegistry, HoldsTheRequiredCodesWithNonEmptyNames) {
    const std::vector<std::string> required{
        "BRCA_MUTATION",        "FIRST_DEGREE_RELATIVE_BRCA", "FAMILY_HISTORY_BREAST_CANCER",
        "CHEST_RADIATION_THERAPY_AGE_10_30", "LI_FRAUMENI_SYNDROME", "COWDEN_SYNDROME",
        "BANNAYAN_RILEY_RUVALCABA_SYNDROME", "PERSONAL_HISTORY_BREAST_CANCER", "DENSE_BREAST_TISSUE"};
    for (const auto& code : required) {
        auto f = parse_risk_factor(code);
        ASSERT_TRUE(f.has_value()) << code;
        EXPECT_EQ(to_string(*f), code);
        EXPECT_FALSE(display_name(*f).empty());
    }
    EXPECT_FALSE(parse_risk_factor("SMOKER").has_value());
}

TEST(Recommendation, PriorityIsATotalOrderWithMriHighestAmongScreening) {
    std::set<int> seen;
    for (auto r : kAllRecommendations) {
        EXPECT_TRUE(seen.insert(priority(r)).second);
        EXPECT_EQ(parse_recommendation(to_string(r)), r);
        if (r != Recommendation::CONSULT_PHYSICIAN && r != Recommendation::ANNUAL_MRI_AND_MAMMOGRAM) {
            EXPECT_LT(priority(r), priority(Recommendation::ANNUAL_MRI_AND_MAMMOGRAM));
        }
    }
}

TEST(RuleId, AcceptsOnlyRWithPositiveInteger) {
    EXPECT_EQ(parse_rule_id("R1")->number, 1u);
    EXPECT_EQ(parse_rule_id("R42")->str(), "R42");
    EXPECT_FALSE(parse_rule_id("R0"));
    EXPECT_FALSE(parse_rule_id("R"));
    EXPECT_FALSE(parse_rule_id("r1"));
    EXPECT_FALSE(parse_rule_id("R1a"));
    EXPECT_LT(*parse_rule_id("R2"), *parse_rule_id("R10"));
}

TEST(ParseRules, SingleRule) {
    const auto rs = parse_rules(kR1);
    ASSERT_EQ(rs.size(), 1u);
    const auto& r = rs.rules()[0];
    EXPECT_EQ(r.id.str(), "R1");
    EXPECT_EQ(r.name, "brca_high_risk");
    ASSERT_EQ(r.conditions.size(), 2u);
    EXPECT_EQ(r.conditions[0], Condition{HasRiskFactor{RiskFactor::BRCA_MUTATION}});
    EXPECT_EQ(r.conditions[1], (Condition{AgeInRange{30, 130}}));
    EXPECT_EQ(r.recommendation, Recommendation::ANNUAL_MRI_AND_MAMMOGRAM);
    EXPECT_EQ(r.source_note, "");
}

TEST(ParseRules, DefaultPackHasEightUniqueRulesInOrder) {
    const auto rs = default_pack();
    ASSERT_EQ(rs.size(), 8u);
    for (std::size_t i = 0; i < rs.size(); ++i) EXPECT_EQ(rs.rules()[i].id.number, i + 1);
    EXPECT_EQ(rs.version(), "acs-2024.1");
    // Hand count of the pack's conditions.
    const std::vector<std::size_t> sizes{2, 2, 2, 2, 2, 2, 2, 1};
    for (std::size_t i = 0; i < sizes.size(); ++i) EXPECT_EQ(rs.rules()[i].conditions.size(), sizes[i]);
}

TEST(ParseRules, MissingThenIsASyntaxErrorOnThatLine) {
    try {
        parse_rules("# header\n\nRULE R1 \"x\" IF age_in(30,130)\n");
        FAIL() << "expected SyntaxError";
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(e.expected().find("THEN"), std::string::npos);
    }
}

TEST(ParseRules, DuplicateIdIsRejected) {
    const std::string text = std::string(kR1) + "\n" + std::string(kR1) + "\n";
    try {
        parse_rules(text);
        FAIL() << "expected DuplicateRuleId";
    } catch (const DuplicateRuleId& e) {
        EXPECT_EQ(e.rule_id(), "R1");
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(ParseRules, UnknownRiskFactorIsRejected) {
    EXPECT_THROW(parse_rules(R"(RULE R1 "x" IF has_risk_factor(SMOKER) THEN ANNUAL_MAMMOGRAM)"), UnknownRiskFactor);
}

TEST(ParseRules, AgeBoundsOutsideRangeAreRejected) {
    EXPECT_THROW(parse_rules(R"(RULE R1 "x" IF age_in(10,131) THEN ANNUAL_MAMMOGRAM)"), Error);
    EXPECT_THROW(parse_rules(R"(RULE R1 "x" IF age_in(-1,20) THEN ANNUAL_MAMMOGRAM)"), Error);
}

TEST(ParseRules, CommentsBlankLinesAndCrlf) {
    const auto rs = parse_rules("# c\r\n\r\n" + std::string(kR1) + "\r\n# trailing\r\n");
    EXPECT_EQ(rs.size(), 1u);
}

TEST(ParseRules, SourceNoteEscapes) {
    const auto rs = parse_rules(R"(RULE R3 "a" IF gender_is(male) THEN NO_ROUTINE_SCREENING SOURCE "say \"hi\" \\ ok")");
    EXPECT_EQ(rs.rules()[0].source_note, "say \"hi\" \\ ok");
    EXPECT_EQ(parse_rules(serialize(rs)), rs);
}

TEST(ParseRules, RoundTripsTheDefaultPack) {
    const auto rs = default_pack();
    const auto again = parse_rules(serialize(rs));
    EXPECT_EQ(again, rs);
    EXPECT_EQ(again.checksum(), rs.checksum());
    EXPECT_EQ(serialize(again), serialize(rs));
}

TEST(ParseRules, ChecksumTracksContent) {
    const auto a = parse_rules(kR1);
    const auto b = parse_rules(std::string(kR1) + "  # same rule\n");
    EXPECT_EQ(a.checksum(), b.checksum());
    const auto c = parse_rules(R"(RULE R1 "brca_high_risk" IF has_risk_factor(BRCA_MUTATION) AND age_in(31,130) THEN ANNUAL_MRI_AND_MAMMOGRAM)");
    EXPECT_NE(a.checksum(), c.checksum());
    EXPECT_EQ(a.checksum().size(), 64u);
}

TEST(ParseRules, RegistryClosure) {
    const auto rs = default_pack();
    for (const auto& r : rs.rules()) {
        for (const auto& c : r.conditions) {
            if (auto* f = std::get_if<HasRiskFactor>(&c)) {
                EXPECT_TRUE(parse_risk_factor(to_string(f->factor)));
            }
        }
    }
}

// Random mutations of valid text: every outcome is a RuleSet or a library
// error carrying a position, never anything else.
TEST(ParseRulesProperty, TotalOverMutatedInput) {
    const std::string base = read_text(llm::default_rules_path());
    const std::string alphabet = "RULEIFANDTHENSOURCE() ,\"#\\\n0123456789abc_R-";
    std::mt19937_64 rng(20240611);
    int errors = 0;
    for (int iter = 0; iter < 3000; ++iter) {
        std::string text = base;
        const int edits = 1 + static_cast<int>(rng() % 6);
        for (int e = 0; e < edits; ++e) {
            const std::size_t pos = rng() % (text.size() + 1);
            switch (rng() % 3) {
                case 0: text.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
                case 1: if (pos < text.size()) text.erase(pos, 1); break;
                default: if (pos < text.size()) text[pos] = static_cast<char>(rng() % 256); break;
            }
        }
        try {
            const auto rs = parse_rules(text);
            EXPECT_EQ(parse_rules(serialize(rs)), rs);
        } catch (const SyntaxError& e) {
            EXPECT_GE(e.line(), 1u);
            ++errors;
        } catch (const DuplicateRuleId& e) {
            EXPECT_GE(e.line(), 1u);
            ++errors;
        } catch (const UnknownRiskFactor& e) {
            EXPECT_GE(e.line(), 1u);
            ++errors;
        } catch (const InvariantViolation&) {
            ++errors;
        }
    }
    EXPECT_GT(errors, 0);
}

TEST(ParseRulesProperty, RandomRuleSetsRoundTrip) {
    std::mt19937_64 rng(7);
    const auto& reg = risk_factor_registry();
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<Rule> rules;
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) {
            Rule r;
            r.id = RuleId{static_cast<std::uint32_t>(i * 3 + 1 + rng() % 3)};
            r.name = "rule_" + std::to_string(rng() % 1000);
            const int k = 1 + static_cast<int>(rng() % 4);
            for (int j = 0; j < k; ++j) {
                switch (rng() % 4) {
                    case 0: r.conditions.push_back(GenderIs{rng() % 2 ? Gender::female : Gender::male}); break;
                    case 1: {
                        int lo = static_cast<int>(rng() % 131), hi = static_cast<int>(rng() % 131);
                        r.conditions.push_back(AgeInRange{lo, hi});
                        break;
                    }
                    case 2: r.conditions.push_back(HasRiskFactor{reg[rng() % reg.size()].code}); break;
                    default: r.conditions.push_back(RiskFactorCountAtLeast{static_cast<int>(rng() % 6)}); break;
                }
            }
            r.recommendation = kAllRecommendations[rng() % kAllRecommendations.size()];
            r.source_note = rng() % 2 ? "" : "note \"" + std::to_string(rng() % 99) + "\" \\";
            rules.push_back(std::move(r));
        }
        const RuleSet rs(std::move(rules), "v" + std::to_string(iter));
        EXPECT_EQ(parse_rules(serialize(rs)), rs);
    }
}

TEST(Validate, DefaultPackHasNoUnreachableRules) {
    const auto report = validate_ruleset(default_pack());
    EXPECT_TRUE(report.unreachable.empty());
    EXPECT_TRUE(report.ok());
}

TEST(Validate, EmptyAgeIntervalIsUnreachable) {
    const auto rs = parse_rules(R"(RULE R1 "ok" IF gender_is(female) THEN ANNUAL_MAMMOGRAM
RULE R2 "bad" IF age_in(50,40) THEN ANNUAL_MAMMOGRAM)");
    const auto report = validate_ruleset(rs);
    ASSERT_EQ(report.unreachable.size(), 1u);
    EXPECT_EQ(report.unreachable[0].str(), "R2");
}

TEST(Validate, ContradictoryGenderIsUnreachable) {
    const auto rs = parse_rules(R"(RULE R1 "x" IF gender_is(female) AND gender_is(male) THEN ANNUAL_MAMMOGRAM
RULE R2 "y" IF risk_factor_count_at_least(5) THEN ANNUAL_MAMMOGRAM)");
    EXPECT_EQ(validate_ruleset(rs).unreachable.size(), 2u);
}

TEST(Validate, IdenticalConditionsWithDifferentRecommendationsConflict) {
    const auto rs = parse_rules(R"(RULE R1 "a" IF gender_is(female) AND age_in(45,54) THEN ANNUAL_MAMMOGRAM
RULE R2 "b" IF gender_is(female) AND age_in(45,54) THEN OPTIONAL_ANNUAL_MAMMOGRAM)");
    const auto report = validate_ruleset(rs);
    ASSERT_EQ(report.conflicts.size(), 1u);
    EXPECT_EQ(report.conflicts[0].first.str(), "R1");
    EXPECT_EQ(report.conflicts[0].second.str(), "R2");
    EXPECT_TRUE(report.ok());
    const auto text = format_report(report, rs);
    EXPECT_NE(text.find("R1"), std::string::npos);
    EXPECT_NE(text.find("R2"), std::string::npos);
}

TEST(RenderRulePrompt, MatchesTheFixedTemplate) {
    const auto rs = parse_rules(kR1);
    EXPECT_EQ(render_rule_prompt(rs.rules()[0]),
              "Rule R1: IF the person has risk factor known BRCA1/BRCA2 gene mutation AND the person's age is "
              "between 30 and 130 THEN recommend annual MRI and mammogram.");
}

TEST(RenderRulePrompt, SingleConditionHasNoAnd) {
    const auto rs = default_pack();
    const auto text = render_rule_prompt(rs.rules()[7]);
    EXPECT_EQ(text.find(" AND "), std::string::npos);
    EXPECT_EQ(text, "Rule R8: IF the person has risk factor personal history of breast cancer THEN recommend "
                    "consulting a physician.");
}

TEST(RenderRulePrompt, DefaultPackMatchesGoldenFile) {
    const auto rs = default_pack();
    std::string rendered;
    for (const auto& r : rs.rules()) rendered += render_rule_prompt(r) + "\n";
    EXPECT_EQ(rendered, read_text(test_data("default_rule_prompts.txt")));
    std::string again;
    for (const auto& r : rs.rules()) again += render_rule_prompt(r) + "\n";
    EXPECT_EQ(rendered, again);
}
