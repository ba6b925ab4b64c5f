#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "screenwise/casegen.hpp"
#include "screenwise/llmlink.hpp"
#include "screenwise/oracle.hpp"

namespace screenwise::eval {

using casegen::RenderMode;

struct EvaluationRecord {
    int case_id = 0;
    RenderMode mode = RenderMode::structured;
    oracle::OracleVerdict oracle;
    llm::LlmVerdict llm;
    // Recommendation agreement only; citations never affect it.
    bool correct = false;
    int n_cited = 0;
    bool zero_cited = true;
    // Cited set equals the triggered set and nothing unknown was cited.
    bool faithful = false;
    std::set<rules::RuleId> unknown_citations;

    friend bool operator==(const EvaluationRecord&, const EvaluationRecord&) = default;
};

// Throws CaseIdMismatch.
EvaluationRecord score_case(const oracle::OracleVerdict& o, const llm::LlmVerdict& l, RenderMode mode);

struct MetricsSummary {
    RenderMode mode = RenderMode::structured;
    int total = 0;
    int n_correct = 0;
    int n_incorrect = 0;
    int n_one_rule = 0;
    int n_multi_rule = 0;
    int n_zero_rule = 0;
    int n_faithful = 0;

    // 100 * n_correct / total; nullopt when total is 0.
    std::optional<double> accuracy_percent() const noexcept;
    // One decimal place ("94.0") or "N/A".
    std::string accuracy_text() const;

    friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

// Summary over the records of one mode; total 0 when there are none.
MetricsSummary aggregate(std::span<const EvaluationRecord> records, RenderMode mode);
// One summary per mode present, structured first.
std::vector<MetricsSummary> aggregate(std::span<const EvaluationRecord> records);

enum class ReportFormat { markdown, csv, json };

// Throws UnsupportedFormat.
ReportFormat parse_report_format(std::string_view name);
std::string_view file_extension(ReportFormat f) noexcept;

// Byte-deterministic. Throws InvariantViolation when summaries is empty.
std::string emit_report(std::span<const MetricsSummary> summaries,
                        std::span<const EvaluationRecord> records, ReportFormat format);

// Inverses of the csv and json encodings. Accuracy is derived from the
// counts and checked against the stored one-decimal value. Throw FormatError.
std::vector<MetricsSummary> parse_csv_report(std::string_view text);

struct JsonReport {
    std::vector<MetricsSummary> summaries;
    std::vector<EvaluationRecord> records;
};
JsonReport parse_json_report(std::string_view text);

// ---- verdicts file ------------------------------------------------------------

// Oracle verdict fields (case_id, triggered, recommendation, optional trace)
// plus the arm and the model's verdict, so reports can be rebuilt offline.
std::string to_verdict_line(const EvaluationRecord& r, bool include_trace = false);
EvaluationRecord from_verdict_line(std::string_view line);

// ---- run manifest --------------------------------------------------------------

struct RunSnapshot {
    std::string rules_path;
    std::string prompts_dir;
    std::optional<std::uint64_t> seed;
    int count = 0;
    std::string cases_path;  // empty when cases were generated
    std::string modes;       // structured | unstructured | both | paired
    bool paired = true;
    bool fresh_per_case = false;
    std::string backend;     // remote | mock-perfect | mock-noisy
    std::string model;
    std::string endpoint;
    double temperature = 0.0;
    int max_retries = 2;
    std::string noise_path;
    std::string template_pool_id = "narrative-v1";
};

struct Manifest {
    RunSnapshot snapshot;
    std::string rule_pack_checksum;
    std::string rule_pack_version;
    std::map<std::string, std::string> prompt_hashes;
    std::string cases_checksum;  // sha256 of the cases file when one was read
    std::string noise_checksum;
    std::string started_at;
    std::string finished_at;

    // Hash of everything except timestamps.
    std::string config_hash() const;
    std::string to_json() const;
};

// Reads the rule pack and prompt templates to fingerprint them. Throws
// FileError naming a missing file, plus rule-pack parse errors.
Manifest run_manifest(const RunSnapshot& snapshot);

}  // namespace screenwise::eval
