#include "screenwise/evalkit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json_codec.hpp"
#include "screenwise/error.hpp"
#include "screenwise/sha256.hpp"

namespace screenwise::eval {

using detail::json;

EvaluationRecord score_case(const oracle::OracleVerdict& o, const llm::LlmVerdict& l, RenderMode mode) {
    if (o.case_id != l.case_id) throw CaseIdMismatch(o.case_id, l.case_id);
    EvaluationRecord r;
    r.case_id = o.case_id;
    r.mode = mode;
    r.oracle = o;
    r.llm = l;
    r.correct = l.recommendation.has_value() && *l.recommendation == o.recommendation;
    r.n_cited = static_cast<int>(l.cited_rules.size());
    r.zero_cited = r.n_cited == 0;
    r.unknown_citations = l.unknown_citations;
    const std::set<rules::RuleId> triggered(o.triggered.begin(), o.triggered.end());
    r.faithful = l.cited_rules == triggered && l.unknown_citations.empty();
    return r;
}

std::optional<double> MetricsSummary::accuracy_percent() const noexcept {
    if (total == 0) return std::nullopt;
    return 100.0 * n_correct / total;
}

std::string MetricsSummary::accuracy_text() const {
    auto acc = accuracy_percent();
    if (!acc) return "N/A";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", *acc);
    return buf;
}

MetricsSummary aggregate(std::span<const EvaluationRecord> records, RenderMode mode) {
    MetricsSummary s;
    s.mode = mode;
    for (const auto& r : records) {
        if (r.mode != mode) continue;
        ++s.total;
        ++(r.correct ? s.n_correct : s.n_incorrect);
        if (r.n_cited == 0) {
            ++s.n_zero_rule;
        } else if (r.n_cited == 1) {
            ++s.n_one_rule;
        } else {
            ++s.n_multi_rule;
        }
        if (r.faithful) ++s.n_faithful;
    }
    return s;
}

std::vector<MetricsSummary> aggregate(std::span<const EvaluationRecord> records) {
    std::vector<MetricsSummary> out;
    for (auto mode : {RenderMode::structured, RenderMode::unstructured}) {
        auto s = aggregate(records, mode);
        if (s.total > 0) out.push_back(s);
    }
    return out;
}

std::string to_verdict_line(const EvaluationRecord& r, bool include_trace) {
    json j = detail::oracle_to_json(r.oracle, include_trace);
    j["mode"] = casegen::to_string(r.mode);
    j["llm"] = detail::llm_to_json(r.llm);
    return j.dump();
}

EvaluationRecord from_verdict_line(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("verdict line is not JSON: ") + e.what());
    }
    auto o = detail::oracle_from_json(j);
    const auto& mode_j = detail::require(j, "mode");
    auto mode = mode_j.is_string() ? casegen::parse_render_mode(mode_j.get<std::string>()) : std::nullopt;
    if (!mode) throw FormatError("verdict line has an unknown mode");
    auto l = detail::llm_from_json(detail::require(j, "llm"));
    return score_case(o, l, *mode);
}

// ---- manifest -----------------------------------------------------------------

namespace {

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError(path, std::string(what) + " not found");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json snapshot_json(const Manifest& m) {
    const auto& s = m.snapshot;
    json j;
    j["rules_path"] = s.rules_path;
    j["rule_pack_checksum"] = m.rule_pack_checksum;
    j["rule_pack_version"] = m.rule_pack_version;
    j["prompts_dir"] = s.prompts_dir;
    json hashes = json::object();
    for (const auto& [file, hash] : m.prompt_hashes) hashes[file] = hash;
    j["prompt_hashes"] = std::move(hashes);
    j["seed"] = s.seed ? json(*s.seed) : json(nullptr);
    j["count"] = s.count;
    j["cases_path"] = s.cases_path;
    j["cases_checksum"] = m.cases_checksum;
    j["template_pool_id"] = s.template_pool_id;
    j["modes"] = s.modes;
    j["paired"] = s.paired;
    j["fresh_per_case"] = s.fresh_per_case;
    j["backend"] = s.backend;
    j["model"] = s.model;
    j["endpoint"] = s.endpoint;
    j["temperature"] = s.temperature;
    j["max_retries"] = s.max_retries;
    j["noise_path"] = s.noise_path;
    j["noise_checksum"] = m.noise_checksum;
    return j;
}

}  // namespace

std::string Manifest::config_hash() const { return sha256_hex(snapshot_json(*this).dump()); }

std::string Manifest::to_json() const {
    json j = snapshot_json(*this);
    j["config_hash"] = config_hash();
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    return j.dump(2) + "\n";
}

Manifest run_manifest(const RunSnapshot& snapshot) {
    Manifest m;
    m.snapshot = snapshot;
    const auto rules = rules::parse_rules(read_file(snapshot.rules_path, "rule pack"));
    m.rule_pack_checksum = rules.checksum();
    m.rule_pack_version = rules.version();
    m.prompt_hashes = llm::load_prompts(snapshot.prompts_dir).hashes;
    if (!snapshot.cases_path.empty()) {
        m.cases_checksum = sha256_hex(read_file(snapshot.cases_path, "cases file"));
    }
    if (!snapshot.noise_path.empty()) {
        m.noise_checksum = sha256_hex(read_file(snapshot.noise_path, "noise profile"));
    }
    return m;
}

}  // namespace screenwise::eval
