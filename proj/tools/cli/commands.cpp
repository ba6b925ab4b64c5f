#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "screenwise/casegen.hpp"
#include "screenwise/error.hpp"
#include "screenwise/evalkit.hpp"
#include "screenwise/oracle.hpp"
#include "screenwise/prompts.hpp"
#include "screenwise/rules.hpp"

namespace screenwise::cli {

namespace fs = std::filesystem;
using casegen::RenderMode;

namespace {

// Usage/config problems; mapped to exit 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

std::string utc_stamp(const char* fmt) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, fmt);
    return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FileError(path.string(), "cannot write");
    f << content;
    if (!f) throw FileError(path.string(), "write failed");
}

std::string_view mode_name(ModeSelection m) {
    switch (m) {
        case ModeSelection::structured: return "structured";
        case ModeSelection::unstructured: return "unstructured";
        case ModeSelection::both: return "both";
        case ModeSelection::paired: return "paired";
    }
    return "paired";
}

// One experiment arm: the cases it sees, rendered in its mode.
struct Arm {
    RenderMode mode;
    std::vector<casegen::CaseFileEntry> cases;
};

struct ArmResult {
    std::vector<llm::TranscriptEntry> transcript;
    std::vector<eval::EvaluationRecord> records;
    std::exception_ptr failure;
};

casegen::RenderedCase rendered(const casegen::CaseFileEntry& e, RenderMode mode, std::uint64_t template_seed) {
    if (mode == RenderMode::structured) {
        if (e.rendered_structured) return {e.use_case.case_id, mode, *e.rendered_structured};
        return casegen::render_structured(e.use_case);
    }
    if (e.rendered_unstructured) return {e.use_case.case_id, mode, *e.rendered_unstructured};
    return casegen::render_unstructured(e.use_case, template_seed);
}

ArmResult run_arm(const Arm& arm, const RunConfig& cfg, const rules::RuleSet& rs, const llm::PromptSet& prompts,
                  const llm::NoiseSchedule& noise, std::uint64_t template_seed) {
    ArmResult result;
    std::vector<llm::TranscriptEntry>* sink_target = &result.transcript;
    try {
        auto backend_cfg = cfg.backend;
        backend_cfg.noise = noise.for_mode(arm.mode);
        llm::SessionOptions options;
        options.fresh_per_case = cfg.fresh_per_case;
        options.sink = [sink_target](const llm::TranscriptEntry& e) { sink_target->push_back(e); };
        auto session = llm::start_session(backend_cfg, prompts, std::move(options));
        session.load_rules(rs);
        for (const auto& entry : arm.cases) {
            const auto verdict = session.query_case(rendered(entry, arm.mode, template_seed));
            const auto truth = oracle::evaluate(entry.use_case, rs);
            result.records.push_back(eval::score_case(truth, verdict, arm.mode));
        }
    } catch (...) {
        result.failure = std::current_exception();
    }
    return result;
}

std::vector<casegen::CaseFileEntry> generate_entries(std::uint64_t seed, int count, int id_offset) {
    casegen::GeneratorConfig gc;
    gc.seed = seed;
    gc.count = count;
    auto cases = casegen::generate_cases(gc);
    for (auto& c : cases) c.case_id += id_offset;
    // Unstructured narratives are keyed on the run seed so every arm and
    // every rerun picks the same template for a case.
    return casegen::with_renderings(cases, seed);
}

fs::path unique_run_dir(const fs::path& root, const std::string& stem) {
    fs::path dir = root / stem;
    for (int n = 2; fs::exists(dir); ++n) dir = root / (stem + "-" + std::to_string(n));
    return dir;
}

// Values for options the command line left unset: the config file first,
// then the environment.
void apply_fallbacks(CLI::App& cmd, const std::string& config_path) {
    auto fill = [&cmd](const std::string& name, const std::vector<std::string>& values) {
        auto* opt = cmd.get_option_no_throw("--" + name);
        if (!opt || name == "config") throw ConfigError("unknown config key '" + name + "'");
        if (opt->count() > 0) return;
        for (const auto& v : values) opt->add_result(v);
        opt->run_callback();
    };
    if (!config_path.empty()) {
        if (!fs::is_regular_file(config_path)) throw FileError(config_path, "no such config file");
        for (const auto& item : CLI::ConfigTOML().from_file(config_path)) {
            if (!item.parents.empty()) {
                throw ConfigError("config sections are not supported: " + item.fullname());
            }
            std::string key = item.name;
            std::replace(key.begin(), key.end(), '_', '-');
            fill(key, item.inputs);
        }
    }
    for (const auto& [name, var] : {std::pair{"endpoint", "SCREENWISE_ENDPOINT"}, std::pair{"model", "SCREENWISE_MODEL"}}) {
        if (const char* value = std::getenv(var); value && *value) fill(name, {value});
    }
}

}  // namespace

int cmd_rules_check(const std::string& rules_path, std::ostream& out, std::ostream& err) {
    std::error_code ec;
    if (!fs::is_regular_file(rules_path, ec)) {
        err << "error: FileError: " << rules_path << ": no such rule file\n";
        return kExitUsage;
    }
    try {
        const auto rs = rules::load_rules_file(rules_path);
        const auto report = rules::validate_ruleset(rs);
        out << rules::format_report(report, rs);
        if (!report.ok()) {
            err << "error: " << report.unreachable.size() << " unreachable rule(s)\n";
            return kExitRuntime;
        }
        return kExitOk;
    } catch (const FileError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_gen(std::uint64_t seed, int count, const std::string& out_path, std::ostream& out, std::ostream& err) {
    if (count < 1) {
        err << "error: --count must be at least 1\n";
        return kExitUsage;
    }
    try {
        const auto entries = generate_entries(seed, count, 0);
        if (out_path.empty() || out_path == "-") {
            casegen::write_cases(out, entries);
        } else {
            std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
            if (!f) throw FileError(out_path, "cannot write");
            casegen::write_cases(f, entries);
            out << "wrote " << entries.size() << " cases to " << out_path << "\n";
        }
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

RunOutcome cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    RunOutcome outcome;
    const auto started_at = utc_stamp("%Y-%m-%dT%H:%M:%SZ");

    rules::RuleSet rs;
    llm::PromptSet prompts;
    llm::NoiseSchedule noise;
    std::vector<Arm> arms;
    std::vector<casegen::CaseFileEntry> generated;
    eval::Manifest manifest;
    std::uint64_t template_seed = cfg.seed.value_or(1);

    // ---- configuration: every failure here is exit 2 ----
    try {
        if (cfg.cases_path.empty() == !cfg.seed.has_value()) {
            throw ConfigError("give exactly one of --cases or --seed");
        }
        if (cfg.seed && cfg.count < 1) throw ConfigError("--count must be at least 1");
        cfg.backend.validate();
        rs = rules::load_rules_file(cfg.rules_path);
        if (!rules::validate_ruleset(rs).ok()) throw ConfigError("rule pack has unreachable rules");
        prompts = llm::load_prompts(cfg.prompts_dir);
        if (!cfg.noise_path.empty()) noise = llm::load_noise_schedule(cfg.noise_path);

        std::vector<casegen::CaseFileEntry> primary;
        std::vector<casegen::CaseFileEntry> secondary;
        if (cfg.seed) {
            primary = generate_entries(*cfg.seed, cfg.count, 0);
            if (cfg.modes == ModeSelection::both) {
                // Independent draw for the narrative arm; ids continue after the first arm.
                secondary = generate_entries(casegen::derive_seed(*cfg.seed, 0x756e737472ULL), cfg.count, cfg.count);
            }
            generated = primary;
            generated.insert(generated.end(), secondary.begin(), secondary.end());
        } else {
            primary = casegen::read_cases_file(cfg.cases_path);
            if (primary.empty()) throw ConfigError("cases file is empty");
        }
        if (secondary.empty()) secondary = primary;

        switch (cfg.modes) {
            case ModeSelection::structured: arms.push_back({RenderMode::structured, primary}); break;
            case ModeSelection::unstructured: arms.push_back({RenderMode::unstructured, primary}); break;
            case ModeSelection::both:
            case ModeSelection::paired:
                arms.push_back({RenderMode::structured, primary});
                arms.push_back({RenderMode::unstructured, secondary});
                break;
        }
        if (cfg.backend.kind == llm::BackendKind::mock_noisy) {
            for (const auto& arm : arms) {
                int max_id = 0;
                for (const auto& e : arm.cases) max_id = std::max(max_id, e.use_case.case_id);
                llm::check_noise_range(noise.for_mode(arm.mode), max_id);
            }
        }

        eval::RunSnapshot snap;
        snap.rules_path = cfg.rules_path;
        snap.prompts_dir = cfg.prompts_dir;
        snap.seed = cfg.seed;
        snap.count = cfg.seed ? cfg.count : static_cast<int>(primary.size());
        snap.cases_path = cfg.cases_path;
        snap.modes = std::string(mode_name(cfg.modes));
        snap.paired = cfg.modes == ModeSelection::paired;
        snap.fresh_per_case = cfg.fresh_per_case;
        snap.backend = std::string(llm::to_string(cfg.backend.kind));
        snap.model = cfg.backend.model_name;
        snap.endpoint = cfg.backend.endpoint_url;
        snap.temperature = cfg.backend.temperature;
        snap.max_retries = cfg.backend.max_retries;
        snap.noise_path = cfg.noise_path;
        manifest = eval::run_manifest(snap);
        manifest.started_at = started_at;

        outcome.run_dir = unique_run_dir(cfg.out_dir, utc_stamp("%Y%m%dT%H%M%SZ") + "-" +
                                                          manifest.config_hash().substr(0, 8));
        fs::create_directories(outcome.run_dir);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        outcome.exit_code = kExitUsage;
        return outcome;
    } catch (const fs::filesystem_error& e) {
        err << "error: output directory: " << e.what() << "\n";
        outcome.exit_code = kExitUsage;
        return outcome;
    }

    // ---- protocol: sessions are independent, one per arm ----
    std::vector<ArmResult> results;
    if (cfg.parallel_sessions && arms.size() > 1) {
        std::vector<std::future<ArmResult>> futures;
        for (const auto& arm : arms) {
            futures.push_back(std::async(std::launch::async, run_arm, std::cref(arm), std::cref(cfg),
                                         std::cref(rs), std::cref(prompts), std::cref(noise), template_seed));
        }
        for (auto& f : futures) results.push_back(f.get());
    } else {
        for (const auto& arm : arms) {
            results.push_back(run_arm(arm, cfg, rs, prompts, noise, template_seed));
            if (results.back().failure) break;
        }
    }

    std::string transcript;
    std::vector<eval::EvaluationRecord> records;
    std::exception_ptr failure;
    for (auto& r : results) {
        for (const auto& e : r.transcript) transcript += llm::to_jsonl_line(e) + "\n";
        records.insert(records.end(), r.records.begin(), r.records.end());
        if (r.failure && !failure) failure = r.failure;
    }

    try {
        write_file(outcome.run_dir / "transcript.jsonl", transcript);
        if (failure) std::rethrow_exception(failure);

        std::string verdicts;
        for (const auto& r : records) verdicts += eval::to_verdict_line(r, cfg.include_trace) + "\n";
        write_file(outcome.run_dir / "verdicts.jsonl", verdicts);
        if (!generated.empty()) {
            std::ostringstream cases;
            casegen::write_cases(cases, generated);
            write_file(outcome.run_dir / "cases.jsonl", cases.str());
        }
        const auto summaries = eval::aggregate(records);
        for (auto fmt : {eval::ReportFormat::markdown, eval::ReportFormat::csv, eval::ReportFormat::json}) {
            write_file(outcome.run_dir / ("report." + std::string(eval::file_extension(fmt))),
                       eval::emit_report(summaries, records, fmt));
        }
        manifest.finished_at = utc_stamp("%Y-%m-%dT%H:%M:%SZ");
        write_file(outcome.run_dir / "manifest.json", manifest.to_json());

        out << "run directory: " << outcome.run_dir.string() << "\n\n";
        out << eval::emit_report(summaries, {}, eval::ReportFormat::markdown);
    } catch (const Error& e) {
        manifest.finished_at = utc_stamp("%Y-%m-%dT%H:%M:%SZ");
        try {
            write_file(outcome.run_dir / "manifest.json", manifest.to_json());
        } catch (const Error&) {
        }
        err << "error: " << e.what() << "\n";
        outcome.exit_code = kExitRuntime;
    }
    return outcome;
}

int cmd_report(const fs::path& run_dir, const std::string& format, std::ostream& out, std::ostream& err) {
    eval::ReportFormat fmt;
    try {
        fmt = eval::parse_report_format(format);
    } catch (const UnsupportedFormat& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    const auto path = run_dir / "verdicts.jsonl";
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        err << "error: FileError: " << path.string() << ": cannot open\n";
        return kExitUsage;
    }
    try {
        std::vector<eval::EvaluationRecord> records;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) records.push_back(eval::from_verdict_line(line));
        }
        const auto summaries = eval::aggregate(records);
        if (summaries.empty()) {
            err << "error: no verdicts in " << path.string() << "\n";
            return kExitRuntime;
        }
        out << eval::emit_report(summaries, records, fmt);
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"screenwise: rule-grounded evaluation of chat-model screening recommendations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "screenwise 0.3.0");

    const std::string default_rules = llm::default_rules_path();
    const std::string default_prompts = llm::default_prompts_dir();

    // rules check
    auto* rules_cmd = app.add_subcommand("rules", "Rule pack utilities");
    rules_cmd->require_subcommand(1);
    auto* check_cmd = rules_cmd->add_subcommand("check", "Parse and validate a rule pack");
    std::string check_path = default_rules;
    check_cmd->add_option("path", check_path, "Rule file (.rules)");
    check_cmd->add_option("--rules", check_path, "Rule file (.rules)");

    // gen
    auto* gen_cmd = app.add_subcommand("gen", "Generate synthetic use cases as JSON Lines");
    std::uint64_t gen_seed = 1;
    int gen_count = casegen::kDefaultCaseCount;
    std::string gen_out = "-";
    gen_cmd->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
    gen_cmd->add_option("--count", gen_count, "Number of cases")->capture_default_str()->check(CLI::Range(1, 1000000));
    gen_cmd->add_option("--out", gen_out, "Output file, '-' for stdout")->capture_default_str();

    // run
    auto* run_cmd = app.add_subcommand("run", "Load rules into a chat session, query every case, score");
    std::string config_path;
    run_cmd->add_option("--config", config_path, "TOML-style key/value file mirroring the run flags");
    RunConfig cfg;
    cfg.rules_path = default_rules;
    cfg.prompts_dir = default_prompts;
    std::uint64_t seed = 0;
    std::string mode = "paired";
    std::string backend = "mock-perfect";
    bool paired = false;
    run_cmd->add_option("--rules", cfg.rules_path, "Rule pack")->capture_default_str();
    run_cmd->add_option("--prompts", cfg.prompts_dir, "Prompt template directory")->capture_default_str();
    auto* cases_opt = run_cmd->add_option("--cases", cfg.cases_path, "Cases file (JSON Lines)");
    auto* seed_opt = run_cmd->add_option("--seed", seed, "Generate cases from this seed");
    run_cmd->add_option("--count", cfg.count, "Number of generated cases")->capture_default_str()->check(CLI::Range(1, 1000000));
    cases_opt->excludes(seed_opt);
    run_cmd->add_option("--mode", mode, "structured | unstructured | both | paired")
        ->capture_default_str()
        ->check(CLI::IsMember({"structured", "unstructured", "both", "paired"}));
    run_cmd->add_flag("--paired", paired, "Render the same profiles in both modes (same as --mode paired)");
    run_cmd->add_option("--backend", backend, "remote | mock-perfect | mock-noisy")
        ->capture_default_str()
        ->check(CLI::IsMember({"remote", "mock-perfect", "mock-noisy", "mock_perfect", "mock_noisy"}));
    run_cmd->add_option("--endpoint", cfg.backend.endpoint_url, "Chat-completions URL");
    run_cmd->add_option("--model", cfg.backend.model_name, "Model name")
        ->capture_default_str();
    run_cmd->add_option("--temperature", cfg.backend.temperature, "Sampling temperature")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--timeout", cfg.backend.timeout_s, "Per-request timeout in seconds")->capture_default_str();
    run_cmd->add_option("--max-retries", cfg.backend.max_retries, "Re-sends per prompt")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--noise-profile", cfg.noise_path, "Noise schedule JSON for mock-noisy");
    run_cmd->add_option("--out", cfg.out_dir, "Parent directory for run output")->capture_default_str();
    run_cmd->add_flag("--fresh-per-case", cfg.fresh_per_case, "Query each case with only the rule-loading context");
    run_cmd->add_flag("--parallel-sessions", cfg.parallel_sessions, "Run the two arms concurrently");
    run_cmd->add_flag("--trace", cfg.include_trace, "Include per-condition traces in verdicts.jsonl");

    // report
    auto* report_cmd = app.add_subcommand("report", "Rebuild a report from a run directory");
    std::string report_dir;
    std::string report_format = "markdown";
    report_cmd->add_option("run_dir", report_dir, "Run output directory")->required();
    report_cmd->add_option("--format", report_format, "markdown | csv | json")->capture_default_str();

    std::vector<const char*> argv{"screenwise"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    if (check_cmd->parsed()) return cmd_rules_check(check_path, out, err);
    if (gen_cmd->parsed()) return cmd_gen(gen_seed, gen_count, gen_out, out, err);
    if (report_cmd->parsed()) return cmd_report(report_dir, report_format, out, err);

    if (run_cmd->parsed()) {
        try {
            apply_fallbacks(*run_cmd, config_path);
        } catch (const CLI::Error& e) {
            err << "error: " << e.what() << "\n";
            return kExitUsage;
        } catch (const Error& e) {
            err << "error: " << e.what() << "\n";
            return kExitUsage;
        }
        if (seed_opt->count() > 0) cfg.seed = seed;
        cfg.modes = paired                     ? ModeSelection::paired
                    : mode == "structured"     ? ModeSelection::structured
                    : mode == "unstructured"   ? ModeSelection::unstructured
                    : mode == "both"           ? ModeSelection::both
                                               : ModeSelection::paired;
        cfg.backend.kind = *llm::parse_backend_kind(backend);
        return cmd_run(cfg, out, err).exit_code;
    }
    return kExitUsage;
}

}  // namespace screenwise::cli
