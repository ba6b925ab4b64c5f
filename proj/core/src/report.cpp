#include <charconv>
#include <sstream>

#include "json_codec.hpp"
#include "screenwise/error.hpp"
#include "screenwise/evalkit.hpp"

namespace screenwise::eval {

using detail::json;

namespace {

constexpr std::string_view kCsvHeader =
    "mode,total,n_correct,n_incorrect,n_one_rule,n_multi_rule,n_zero_rule,accuracy_percent,n_faithful";

std::string join_ids(const auto& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += ", ";
        out += id.str();
    }
    return out.empty() ? "-" : out;
}

std::string markdown(std::span<const MetricsSummary> summaries, std::span<const EvaluationRecord> records) {
    std::ostringstream out;
    out << "# Screening recommendation evaluation\n\n";
    out << "Informational research output. Not a medical diagnosis.\n\n";
    out << "| Use Case Type | Correct | Incorrect | 1-Rule | N-Rule | Zero-Rule | Accuracy | Faithful |\n";
    out << "|---|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& s : summaries) {
        out << "| " << casegen::to_string(s.mode) << " | " << s.n_correct << " | " << s.n_incorrect << " | "
            << s.n_one_rule << " | " << s.n_multi_rule << " | " << s.n_zero_rule << " | "
            << s.accuracy_text() << (s.total ? "%" : "") << " | " << s.n_faithful << " |\n";
    }
    if (!records.empty()) {
        out << "\n## Cases\n\n";
        out << "| Case | Mode | Oracle | Triggered | Model | Cited | Unknown | Correct | Faithful |\n";
        out << "|---:|---|---|---|---|---|---|---|---|\n";
        for (const auto& r : records) {
            out << "| " << r.case_id << " | " << casegen::to_string(r.mode) << " | "
                << rules::to_string(r.oracle.recommendation) << " | " << join_ids(r.oracle.triggered) << " | "
                << llm::recommendation_label(r.llm.recommendation) << " | " << join_ids(r.llm.cited_rules)
                << " | " << join_ids(r.unknown_citations) << " | " << (r.correct ? "yes" : "no") << " | "
                << (r.faithful ? "yes" : "no") << " |\n";
        }
    }
    return out.str();
}

std::string csv(std::span<const MetricsSummary> summaries) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& s : summaries) {
        out << casegen::to_string(s.mode) << ',' << s.total << ',' << s.n_correct << ',' << s.n_incorrect
            << ',' << s.n_one_rule << ',' << s.n_multi_rule << ',' << s.n_zero_rule << ','
            << s.accuracy_text() << ',' << s.n_faithful << '\n';
    }
    return out.str();
}

json summary_json(const MetricsSummary& s) {
    json j;
    j["mode"] = casegen::to_string(s.mode);
    j["total"] = s.total;
    j["n_correct"] = s.n_correct;
    j["n_incorrect"] = s.n_incorrect;
    j["n_one_rule"] = s.n_one_rule;
    j["n_multi_rule"] = s.n_multi_rule;
    j["n_zero_rule"] = s.n_zero_rule;
    j["accuracy_percent"] = s.accuracy_text();
    j["n_faithful"] = s.n_faithful;
    return j;
}

json record_json(const EvaluationRecord& r) {
    json j;
    j["case_id"] = r.case_id;
    j["mode"] = casegen::to_string(r.mode);
    j["oracle"] = detail::oracle_to_json(r.oracle, false);
    j["llm"] = detail::llm_to_json(r.llm);
    j["correct"] = r.correct;
    j["n_cited"] = r.n_cited;
    j["zero_cited"] = r.zero_cited;
    j["faithful"] = r.faithful;
    j["unknown_citations"] = detail::rule_ids_to_json(r.unknown_citations);
    return j;
}

void check_partition(const MetricsSummary& s) {
    if (s.n_correct + s.n_incorrect != s.total || s.n_one_rule + s.n_multi_rule + s.n_zero_rule != s.total ||
        s.n_faithful > s.total || s.total < 0) {
        throw FormatError("summary counts do not partition the total");
    }
}

MetricsSummary summary_from_fields(std::string_view mode, std::span<const int> counts, std::string_view accuracy) {
    auto m = casegen::parse_render_mode(mode);
    if (!m) throw FormatError("unknown mode '" + std::string(mode) + "'");
    MetricsSummary s{*m, counts[0], counts[1], counts[2], counts[3], counts[4], counts[5], counts[6]};
    check_partition(s);
    if (s.accuracy_text() != accuracy) {
        throw FormatError("stored accuracy '" + std::string(accuracy) + "' disagrees with counts");
    }
    return s;
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
    if (name == "markdown" || name == "md") return ReportFormat::markdown;
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    throw UnsupportedFormat(std::string(name));
}

std::string_view file_extension(ReportFormat f) noexcept {
    switch (f) {
        case ReportFormat::markdown: return "md";
        case ReportFormat::csv: return "csv";
        case ReportFormat::json: return "json";
    }
    return "md";
}

std::string emit_report(std::span<const MetricsSummary> summaries, std::span<const EvaluationRecord> records,
                        ReportFormat format) {
    if (summaries.empty()) throw InvariantViolation("report needs at least one summary");
    switch (format) {
        case ReportFormat::markdown: return markdown(summaries, records);
        case ReportFormat::csv: return csv(summaries);
        case ReportFormat::json: {
            json j;
            json sums = json::array();
            for (const auto& s : summaries) sums.push_back(summary_json(s));
            j["summaries"] = std::move(sums);
            json recs = json::array();
            for (const auto& r : records) recs.push_back(record_json(r));
            j["records"] = std::move(recs);
            return j.dump(2) + "\n";
        }
    }
    throw UnsupportedFormat("unknown");
}

std::vector<MetricsSummary> parse_csv_report(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw FormatError("csv report header mismatch");
    std::vector<MetricsSummary> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (cells.size() != 9) throw FormatError("csv report row needs 9 cells");
        std::array<int, 7> counts{};
        const std::array<std::size_t, 7> cols{1, 2, 3, 4, 5, 6, 8};
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const auto& c = cells[cols[i]];
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), counts[i]);
            if (ec != std::errc{} || ptr != c.data() + c.size()) throw FormatError("csv cell '" + c + "' is not an integer");
        }
        out.push_back(summary_from_fields(cells[0], counts, cells[7]));
    }
    return out;
}

JsonReport parse_json_report(std::string_view text) {
    JsonReport report;
    try {
        auto j = json::parse(text);
        for (const auto& s : detail::require(j, "summaries")) {
            const std::array<int, 7> counts{
                detail::require(s, "total").get<int>(),        detail::require(s, "n_correct").get<int>(),
                detail::require(s, "n_incorrect").get<int>(),  detail::require(s, "n_one_rule").get<int>(),
                detail::require(s, "n_multi_rule").get<int>(), detail::require(s, "n_zero_rule").get<int>(),
                detail::require(s, "n_faithful").get<int>()};
            report.summaries.push_back(summary_from_fields(detail::require(s, "mode").get<std::string>(), counts,
                                                           detail::require(s, "accuracy_percent").get<std::string>()));
        }
        for (const auto& r : detail::require(j, "records")) {
            auto mode = casegen::parse_render_mode(detail::require(r, "mode").get<std::string>());
            if (!mode) throw FormatError("record has an unknown mode");
            report.records.push_back(score_case(detail::oracle_from_json(detail::require(r, "oracle")),
                                                detail::llm_from_json(detail::require(r, "llm")), *mode));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("json report: ") + e.what());
    }
    return report;
}

}  // namespace screenwise::eval
