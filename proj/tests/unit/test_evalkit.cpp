#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "screenwise/error.hpp"
#include "screenwise/evalkit.hpp"
#include "screenwise/prompts.hpp"
#include "support.hpp"

using namespace screenwise;
using namespace screenwise::eval;
using rules::Recommendation;
using rules::RuleId;

namespace {

RuleId rid(int n) { return RuleId{static_cast<std::uint32_t>(n)}; }

oracle::OracleVerdict oracle_v(int id, Recommendation rec, std::vector<RuleId> fired) {
    oracle::OracleVerdict v;
    v.case_id = id;
    v.recommendation = rec;
    v.triggered = std::move(fired);
    return v;
}

llm::LlmVerdict llm_v(int id, std::optional<Recommendation> rec, std::set<RuleId> cited,
                      std::set<RuleId> unknown = {}) {
    llm::LlmVerdict v;
    v.case_id = id;
    v.recommendation = rec;
    v.cited_rules = std::move(cited);
    v.unknown_citations = std::move(unknown);
    v.explanation_text = "because";
    v.raw_response = "RECOMMENDATION: ...";
    return v;
}

// Records with the given outcome counts: `wrong` incorrect, then citation
// shapes assigned independently of correctness.
std::vector<EvaluationRecord> fixture(RenderMode mode, int total, int wrong, int zero, int multi) {
    std::vector<EvaluationRecord> out;
    for (int i = 1; i <= total; ++i) {
        const auto truth = oracle_v(i, Recommendation::ANNUAL_MAMMOGRAM, {rid(6)});
        std::set<RuleId> cited{rid(6)};
        if (i > total - zero) cited.clear();
        if (i <= multi) cited.insert(rid(1));
        const auto rec = i <= wrong ? Recommendation::OPTIONAL_ANNUAL_MAMMOGRAM : Recommendation::ANNUAL_MAMMOGRAM;
        out.push_back(score_case(truth, llm_v(i, rec, cited), mode));
    }
    return out;
}

std::vector<MetricsSummary> reference_summaries() {
    auto records = fixture(RenderMode::structured, 50, 3, 3, 0);
    auto u = fixture(RenderMode::unstructured, 50, 9, 0, 4);
    records.insert(records.end(), u.begin(), u.end());
    return aggregate(records);
}

}  // namespace

TEST(ScoreCase, ExactMatch) {
    const auto r = score_case(oracle_v(1, Recommendation::ANNUAL_MAMMOGRAM, {rid(6)}),
                              llm_v(1, Recommendation::ANNUAL_MAMMOGRAM, {rid(6)}), RenderMode::structured);
    EXPECT_TRUE(r.correct);
    EXPECT_TRUE(r.faithful);
    EXPECT_EQ(r.n_cited, 1);
    EXPECT_FALSE(r.zero_cited);
}

TEST(ScoreCase, ZeroCitedYetCorrect) {
    const auto r = score_case(oracle_v(1, Recommendation::ANNUAL_MAMMOGRAM, {rid(6)}),
                              llm_v(1, Recommendation::ANNUAL_MAMMOGRAM, {}), RenderMode::structured);
    EXPECT_TRUE(r.correct);
    EXPECT_TRUE(r.zero_cited);
    EXPECT_FALSE(r.faithful);
}

TEST(ScoreCase, WrongWithTwoCitations) {
    const auto r = score_case(oracle_v(1, Recommendation::ANNUAL_MRI_AND_MAMMOGRAM, {rid(1)}),
                              llm_v(1, Recommendation::ANNUAL_MAMMOGRAM, {rid(1), rid(5)}), RenderMode::structured);
    EXPECT_FALSE(r.correct);
    EXPECT_EQ(r.n_cited, 2);
    EXPECT_FALSE(r.faithful);
}

TEST(ScoreCase, UnknownCitationBreaksFaithfulness) {
    const auto r = score_case(oracle_v(1, Recommendation::ANNUAL_MAMMOGRAM, {rid(6)}),
                              llm_v(1, Recommendation::ANNUAL_MAMMOGRAM, {rid(6)}, {rid(99)}), RenderMode::structured);
    EXPECT_TRUE(r.correct);
    EXPECT_FALSE(r.faithful);
    EXPECT_EQ(r.unknown_citations.size(), 1u);
}

TEST(ScoreCase, UnparseableIsIncorrect) {
    const auto r = score_case(oracle_v(1, Recommendation::CONSULT_PHYSICIAN, {}), llm_v(1, std::nullopt, {}),
                              RenderMode::unstructured);
    EXPECT_FALSE(r.correct);
    EXPECT_TRUE(r.faithful);
}

TEST(ScoreCase, IdMismatch) {
    EXPECT_THROW(score_case(oracle_v(1, Recommendation::CONSULT_PHYSICIAN, {}), llm_v(2, std::nullopt, {}),
                            RenderMode::structured),
                 CaseIdMismatch);
}

TEST(Aggregate, ReferenceAccuracies) {
    const auto s = aggregate(fixture(RenderMode::structured, 50, 3, 3, 0), RenderMode::structured);
    EXPECT_EQ(s.n_correct, 47);
    EXPECT_EQ(s.accuracy_text(), "94.0");
    EXPECT_DOUBLE_EQ(*s.accuracy_percent(), 94.0);
    const auto u = aggregate(fixture(RenderMode::unstructured, 50, 9, 0, 4), RenderMode::unstructured);
    EXPECT_EQ(u.n_correct, 41);
    EXPECT_EQ(u.accuracy_text(), "82.0");
    EXPECT_EQ(u.n_one_rule, 46);
    EXPECT_EQ(u.n_multi_rule, 4);
}

TEST(Aggregate, EmptyIsNotApplicable) {
    const auto s = aggregate(std::vector<EvaluationRecord>{}, RenderMode::structured);
    EXPECT_EQ(s.total, 0);
    EXPECT_FALSE(s.accuracy_percent());
    EXPECT_EQ(s.accuracy_text(), "N/A");
    EXPECT_TRUE(aggregate(std::vector<EvaluationRecord>{}).empty());
}

TEST(AggregateProperty, PartitionAndOrderInvariance) {
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<EvaluationRecord> records;
        const int n = static_cast<int>(rng() % 60);
        for (int i = 1; i <= n; ++i) {
            std::set<RuleId> cited;
            const int k = static_cast<int>(rng() % 4);
            for (int j = 0; j < k; ++j) cited.insert(rid(1 + static_cast<int>(rng() % 8)));
            const auto rec = rules::kAllRecommendations[rng() % 6];
            const auto mode = rng() % 2 ? RenderMode::structured : RenderMode::unstructured;
            std::vector<RuleId> fired(cited.begin(), cited.end());
            if (rng() % 3 == 0) fired.push_back(rid(9));
            records.push_back(score_case(oracle_v(i, Recommendation::ANNUAL_MAMMOGRAM, fired),
                                         llm_v(i, rng() % 5 ? std::optional(rec) : std::nullopt, cited), mode));
        }
        const auto base = aggregate(records);
        for (const auto& s : base) {
            EXPECT_EQ(s.n_correct + s.n_incorrect, s.total);
            EXPECT_EQ(s.n_one_rule + s.n_multi_rule + s.n_zero_rule, s.total);
            EXPECT_LE(s.n_faithful, s.total);
        }
        std::shuffle(records.begin(), records.end(), rng);
        EXPECT_EQ(aggregate(records), base);
    }
}

TEST(FaithfulnessProperty, FaithfulImpliesCorrectUnderTheOracle) {
    const auto rs = rules::load_rules_file(llm::default_rules_path());
    casegen::GeneratorConfig gc;
    gc.count = 300;
    for (const auto& c : casegen::generate_cases(gc)) {
        const auto truth = oracle::evaluate(c, rs);
        // A reply that cites exactly the fired rules and resolves them the same way.
        std::vector<Recommendation> recs;
        for (auto id : truth.triggered) recs.push_back(rs.find(id)->recommendation);
        const auto r = score_case(truth,
                                  llm_v(c.case_id, oracle::resolve_conflicts(recs),
                                        std::set<RuleId>(truth.triggered.begin(), truth.triggered.end())),
                                  RenderMode::structured);
        EXPECT_TRUE(r.faithful);
        EXPECT_TRUE(r.correct);
    }
}

TEST(Report, MarkdownRowForTheReferenceFixture) {
    const auto md = emit_report(reference_summaries(), {}, ReportFormat::markdown);
    EXPECT_NE(md.find("| Use Case Type | Correct | Incorrect | 1-Rule | N-Rule | Zero-Rule | Accuracy | Faithful |"),
              std::string::npos);
    EXPECT_NE(md.find("| structured | 47 | 3 | 47 | 0 | 3 | 94.0% |"), std::string::npos);
    EXPECT_NE(md.find("| unstructured | 41 | 9 | 46 | 4 | 0 | 82.0% |"), std::string::npos);
    EXPECT_NE(md.find("Not a medical diagnosis"), std::string::npos);
    EXPECT_EQ(md, emit_report(reference_summaries(), {}, ReportFormat::markdown));
}

TEST(Report, CsvRoundTripAndShape) {
    const auto summaries = reference_summaries();
    const auto csv = emit_report(summaries, {}, ReportFormat::csv);
    EXPECT_EQ(parse_csv_report(csv), summaries);
    const std::vector<MetricsSummary> one{summaries[0]};
    const auto single = emit_report(one, {}, ReportFormat::csv);
    EXPECT_EQ(std::count(single.begin(), single.end(), '\n'), 2);
    EXPECT_THROW(parse_csv_report("bad header\n"), FormatError);
    std::string tampered = csv;
    tampered.replace(tampered.find("94.0"), 4, "95.0");
    EXPECT_THROW(parse_csv_report(tampered), FormatError);
}

TEST(Report, JsonRoundTrip) {
    auto records = fixture(RenderMode::structured, 50, 3, 3, 0);
    const auto summaries = aggregate(records);
    const auto parsed = parse_json_report(emit_report(summaries, records, ReportFormat::json));
    EXPECT_EQ(parsed.summaries, summaries);
    EXPECT_EQ(parsed.records, records);
}

TEST(Report, FormatsAndEmptyInput) {
    EXPECT_THROW(parse_report_format("xml"), UnsupportedFormat);
    EXPECT_EQ(parse_report_format("md"), ReportFormat::markdown);
    EXPECT_THROW(emit_report({}, {}, ReportFormat::csv), InvariantViolation);
}

TEST(VerdictLine, RoundTrip) {
    for (const auto& r : fixture(RenderMode::unstructured, 20, 5, 2, 3)) {
        EXPECT_EQ(from_verdict_line(to_verdict_line(r)), r);
    }
    EXPECT_THROW(from_verdict_line("nope"), FormatError);
}

TEST(Manifest, DeterministicAndSensitive) {
    screenwise::testing::TempDir dir;
    const auto rules_path = dir / "pack.rules";
    screenwise::testing::write_text(rules_path, screenwise::testing::read_text(llm::default_rules_path()));
    RunSnapshot snap;
    snap.rules_path = rules_path.string();
    snap.prompts_dir = llm::default_prompts_dir();
    snap.seed = 1;
    snap.count = 50;
    snap.modes = "paired";
    snap.backend = "mock-perfect";
    snap.model = "gpt-3.5-turbo";
    auto a = run_manifest(snap);
    auto b = run_manifest(snap);
    a.started_at = "t1";
    b.started_at = "t2";
    EXPECT_EQ(a.config_hash(), b.config_hash());
    EXPECT_EQ(a.prompt_hashes.size(), 3u);
    EXPECT_NE(a.to_json(), b.to_json());

    screenwise::testing::write_text(
        rules_path, screenwise::testing::read_text(llm::default_rules_path()) + "RULE R9 \"m\" IF gender_is(male) THEN NO_ROUTINE_SCREENING\n");
    const auto c = run_manifest(snap);
    EXPECT_NE(c.rule_pack_checksum, a.rule_pack_checksum);
    EXPECT_NE(c.config_hash(), a.config_hash());

    snap.prompts_dir = dir.path().string();
    try {
        run_manifest(snap);
        FAIL() << "expected FileError";
    } catch (const FileError& e) {
        EXPECT_NE(std::string(e.what()).find("system_role.txt"), std::string::npos);
    }
}
