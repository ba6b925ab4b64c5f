#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <random>
#include <sstream>

#include "json_codec.hpp"
#include "screenwise/error.hpp"
#include "screenwise/llmlink.hpp"

namespace screenwise::llm {

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const auto secs = std::chrono::system_clock::to_time_t(now);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms
        << 'Z';
    return out.str();
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
    for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
        text.replace(pos, from.size(), to);
    }
    return text;
}

}  // namespace

std::string rule_load_prompt(const rules::Rule& r, const PromptSet& prompts) {
    return rules::render_rule_prompt(r) + "\n" + replace_all(prompts.confirm_rule, "{rule_id}", r.id.str());
}

std::string case_query_prompt(const casegen::RenderedCase& rc, const PromptSet& prompts) {
    return "Use case " + std::to_string(rc.case_id) + ":\nBEGIN CASE\n" + rc.text + "\nEND CASE\n\n" +
           prompts.enforce_explanation;
}

bool LoadReceipt::all_confirmed() const noexcept {
    for (const auto& e : entries) {
        if (!e.confirmed) return false;
    }
    return !entries.empty();
}

std::string to_jsonl_line(const TranscriptEntry& e) {
    detail::json j;
    j["session_id"] = e.session_id;
    j["seq"] = e.seq;
    j["role"] = e.role;
    j["content"] = e.content;
    j["timestamp"] = e.timestamp;
    return j.dump();
}

TranscriptEntry transcript_entry_from_jsonl(std::string_view line) {
    try {
        auto j = detail::json::parse(line);
        TranscriptEntry e;
        e.session_id = detail::require(j, "session_id").get<std::string>();
        e.seq = detail::require(j, "seq").get<std::uint64_t>();
        e.role = detail::require(j, "role").get<std::string>();
        e.content = detail::require(j, "content").get<std::string>();
        e.timestamp = detail::require(j, "timestamp").get<std::string>();
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw FormatError(std::string("transcript line: ") + ex.what());
    }
}

std::string make_session_id() {
    static thread_local std::mt19937_64 rng{[] {
        std::random_device rd;
        return (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
               static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
    }()};
    std::uint64_t hi = rng();
    std::uint64_t lo = rng();
    hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;  // version 4
    lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;  // RFC 4122 variant
    std::ostringstream out;
    out << std::hex << std::setfill('0') << std::setw(8) << (hi >> 32) << '-' << std::setw(4)
        << ((hi >> 16) & 0xffff) << '-' << std::setw(4) << (hi & 0xffff) << '-' << std::setw(4)
        << (lo >> 48) << '-' << std::setw(12) << (lo & 0xffffffffffffULL);
    return out.str();
}

Session::Session(std::string session_id, PromptSet prompts, BackendConfig cfg,
                 std::shared_ptr<ChatBackend> backend, SessionOptions options)
    : session_id_(std::move(session_id)),
      prompts_(std::move(prompts)),
      cfg_(std::move(cfg)),
      backend_(std::move(backend)),
      options_(std::move(options)) {
    if (!backend_) throw InvariantViolation("session needs a backend");
    if (!options_.clock) options_.clock = utc_now;
    append("system", prompts_.system_role);
}

void Session::append(std::string role, std::string content) {
    TranscriptEntry e{session_id_, log_.size() + 1, std::move(role), std::move(content), options_.clock()};
    if (options_.sink) options_.sink(e);
    log_.push_back(std::move(e));
}

std::vector<ChatMessage> Session::context(bool for_case) const {
    const std::size_t end = (for_case && options_.fresh_per_case) ? loaded_end_ : log_.size();
    std::vector<ChatMessage> out;
    for (std::size_t i = 0; i < end; ++i) {
        if (log_[i].role != "error") out.push_back({log_[i].role, log_[i].content});
    }
    return out;
}

std::string Session::exchange(const std::string& prompt, bool for_case, int& sends) {
    for (;;) {
        auto messages = context(for_case);
        messages.push_back({"user", prompt});
        ++sends;
        ++backend_calls_;
        try {
            std::string reply = backend_->complete(messages);
            append("user", prompt);
            append("assistant", reply);
            return reply;
        } catch (const BackendError& e) {
            append("error", e.what());
            if (sends > cfg_.max_retries) throw;
        }
    }
}

LoadReceipt Session::load_rules(const rules::RuleSet& rs) {
    if (rs.empty()) throw EmptyRuleSet();
    rules_loaded_ = false;
    rule_id_map_.clear();
    known_ids_.clear();
    for (const auto& r : rs.rules()) {
        rule_id_map_[r.id] = ConfirmationStatus::pending;
        known_ids_.insert(r.id);
    }
    backend_->attach_rules(rs);

    LoadReceipt receipt;
    for (const auto& r : rs.rules()) {
        const std::string prompt = rule_load_prompt(r, prompts_);
        RuleConfirmation entry{r.id, false, 0, {}};
        while (!entry.confirmed) {
            entry.reply = exchange(prompt, false, entry.attempts);
            entry.confirmed = confirms(entry.reply, r.id);
            if (!entry.confirmed && entry.attempts > cfg_.max_retries) {
                throw ConfirmationFailed(r.id.str(), entry.reply);
            }
        }
        rule_id_map_[r.id] = ConfirmationStatus::confirmed;
        receipt.entries.push_back(std::move(entry));
    }
    rules_loaded_ = true;
    loaded_end_ = log_.size();
    return receipt;
}

LlmVerdict Session::query_case(const casegen::RenderedCase& rc) {
    if (!rules_loaded_) throw ProtocolError("query_case before every rule was confirmed");
    int sends = 0;
    const std::string raw = exchange(case_query_prompt(rc, prompts_), true, sends);
    auto parsed = parse_response(raw, known_ids_);
    return {rc.case_id,
            parsed.recommendation,
            std::move(parsed.cited_rules),
            std::move(parsed.unknown_citations),
            std::move(parsed.explanation),
            raw};
}

Session start_session(const BackendConfig& cfg, PromptSet prompts, SessionOptions options,
                      std::shared_ptr<ChatBackend> backend) {
    cfg.validate();
    if (!backend) {
        if (cfg.kind == BackendKind::remote) {
            const char* key = std::getenv(std::string(kApiKeyVariable).c_str());
            if (!key || !*key) throw MissingCredential(std::string(kApiKeyVariable));
            auto http = std::make_shared<HttpChatBackend>(cfg, key);
            http->probe();
            backend = std::move(http);
        } else {
            backend = std::make_shared<MockChatBackend>(cfg.kind, cfg.noise);
        }
    }
    return Session(make_session_id(), std::move(prompts), cfg, std::move(backend), std::move(options));
}

}  // namespace screenwise::llm
