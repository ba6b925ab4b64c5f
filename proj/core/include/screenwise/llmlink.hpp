#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "screenwise/casegen.hpp"
#include "screenwise/prompts.hpp"
#include "screenwise/rules.hpp"

namespace screenwise::llm {

using rules::Recommendation;
using rules::RuleId;

inline constexpr std::string_view kApiKeyVariable = "SCREENWISE_API_KEY";
inline constexpr std::string_view kDefaultModel = "gpt-3.5-turbo";

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

// ---- reply parsing ----------------------------------------------------------

struct ParsedResponse {
    // nullopt means UNPARSEABLE.
    std::optional<Recommendation> recommendation;
    std::set<RuleId> cited_rules;
    std::set<RuleId> unknown_citations;
    std::string explanation;

    friend bool operator==(const ParsedResponse&, const ParsedResponse&) = default;
};

// Total: never throws on any input. Each label (RECOMMENDATION:,
// TRIGGERED_RULES:, EXPLANATION:) is taken from its last occurrence, so a
// block wrapped in prose or repeated after a draft still parses. Rule ids not
// in known_ids land in unknown_citations.
ParsedResponse parse_response(std::string_view raw, const std::set<RuleId>& known_ids);

// Matches a recommendation code or prose phrase, case-insensitively.
std::optional<Recommendation> match_recommendation(std::string_view text);

std::string_view recommendation_label(const std::optional<Recommendation>& r) noexcept;

struct LlmVerdict {
    int case_id = 0;
    std::optional<Recommendation> recommendation;
    std::set<RuleId> cited_rules;
    std::set<RuleId> unknown_citations;
    std::string explanation_text;
    std::string raw_response;

    friend bool operator==(const LlmVerdict&, const LlmVerdict&) = default;
};

// ---- backends ---------------------------------------------------------------

enum class BackendKind : std::uint8_t { remote, mock_perfect, mock_noisy };

std::string_view to_string(BackendKind k) noexcept;
// Accepts "remote", "mock-perfect"/"mock_perfect", "mock-noisy"/"mock_noisy".
std::optional<BackendKind> parse_backend_kind(std::string_view s) noexcept;

// Deterministic corruption schedule for the noisy mock, keyed by case id.
struct NoiseProfile {
    std::set<int> wrong_recommendation;
    std::set<int> extra_rule;
    std::set<int> zero_rule;

    friend bool operator==(const NoiseProfile&, const NoiseProfile&) = default;
};

// Per-arm schedules. A noise file either has "structured"/"unstructured"
// sections or a single flat profile applied to both arms.
struct NoiseSchedule {
    NoiseProfile structured;
    NoiseProfile unstructured;

    const NoiseProfile& for_mode(casegen::RenderMode m) const noexcept {
        return m == casegen::RenderMode::structured ? structured : unstructured;
    }
};

// Throws FormatError, FileError.
NoiseSchedule parse_noise_schedule(std::string_view json_text);
NoiseSchedule load_noise_schedule(const std::string& path);
// Throws InvariantViolation if any index lies outside [1, case_count].
void check_noise_range(const NoiseProfile& p, int case_count);

struct BackendConfig {
    BackendKind kind = BackendKind::mock_perfect;
    std::string endpoint_url;
    std::string model_name = std::string(kDefaultModel);
    double temperature = 0.0;
    double timeout_s = 60.0;
    int max_retries = 2;
    NoiseProfile noise;

    // Throws InvariantViolation.
    void validate() const;
};

// One chat-completion call. Implementations throw BackendError (or Timeout)
// for transport failures; the session owns retries.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(std::span<const ChatMessage> messages) = 0;
    // Offline backends that emulate the shell read the rule pack directly.
    virtual void attach_rules(const rules::RuleSet&) {}
};

// HTTP POST of {model, temperature, messages} to a chat-completions endpoint
// with a bearer token.
class HttpChatBackend final : public ChatBackend {
public:
    HttpChatBackend(const BackendConfig& cfg, std::string api_key);
    ~HttpChatBackend() override;

    std::string complete(std::span<const ChatMessage> messages) override;
    // Any HTTP response counts as reachable. Throws BackendUnreachable.
    void probe();

    // Request body for the given messages; exposed for wire-format tests.
    std::string request_body(std::span<const ChatMessage> messages) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Replies like a well-behaved expert-system shell by delegating to the
// oracle, then applies the noise profile when mode is mock_noisy.
class MockChatBackend final : public ChatBackend {
public:
    MockChatBackend(BackendKind mode, NoiseProfile noise);

    std::string complete(std::span<const ChatMessage> messages) override;
    void attach_rules(const rules::RuleSet& rs) override { rules_ = rs; }

private:
    BackendKind mode_;
    NoiseProfile noise_;
    rules::RuleSet rules_;
};

// Test double: every call goes to the supplied function.
class CallbackBackend final : public ChatBackend {
public:
    using Fn = std::function<std::string(std::span<const ChatMessage>)>;
    explicit CallbackBackend(Fn fn) : fn_(std::move(fn)) {}
    std::string complete(std::span<const ChatMessage> messages) override { return fn_(messages); }

private:
    Fn fn_;
};

// The mock's reply function. mode must be mock_perfect or mock_noisy.
std::string mock_respond(std::span<const ChatMessage> messages, BackendKind mode,
                         const NoiseProfile& noise, const rules::RuleSet& loaded_rules);

// Recovers case facts from a case prompt body: the structured format when it
// parses, otherwise keyword extraction over display names, gender words and
// the first integer in [16,90].
casegen::UseCase extract_case_facts(std::string_view case_text, int case_id);

// ---- protocol prompts -------------------------------------------------------

std::string rule_load_prompt(const rules::Rule& r, const PromptSet& prompts);
std::string case_query_prompt(const casegen::RenderedCase& rc, const PromptSet& prompts);
bool confirms(std::string_view reply, RuleId id);

// ---- session ----------------------------------------------------------------

struct TranscriptEntry {
    std::string session_id;
    std::uint64_t seq = 0;
    // "system" | "user" | "assistant" | "error"; "error" entries record
    // transport failures and are never sent back to the backend.
    std::string role;
    std::string content;
    std::string timestamp;  // ISO-8601 UTC
};

std::string to_jsonl_line(const TranscriptEntry& e);
TranscriptEntry transcript_entry_from_jsonl(std::string_view line);

enum class ConfirmationStatus : std::uint8_t { pending, confirmed };

struct RuleConfirmation {
    RuleId rule_id;
    bool confirmed = false;
    int attempts = 0;
    std::string reply;
};

struct LoadReceipt {
    std::vector<RuleConfirmation> entries;

    bool all_confirmed() const noexcept;
};

struct SessionOptions {
    // Send each case query with only the system prompt and the rule-loading
    // exchanges as context, instead of the whole conversation so far.
    bool fresh_per_case = false;
    std::function<void(const TranscriptEntry&)> sink;
    std::function<std::string()> clock;  // defaults to wall-clock UTC
};

// A single conversation. Exchanges are strictly sequential; distinct
// sessions share nothing and may run on different threads.
class Session {
public:
    Session(std::string session_id, PromptSet prompts, BackendConfig cfg,
            std::shared_ptr<ChatBackend> backend, SessionOptions options = {});

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;
    Session(Session&&) noexcept = default;
    Session& operator=(Session&&) noexcept = default;

    // One prompt per rule, in order. Throws EmptyRuleSet,
    // ConfirmationFailed, BackendError.
    LoadReceipt load_rules(const rules::RuleSet& rs);

    // Throws ProtocolError before a successful load_rules; BackendError,
    // Timeout after exhausting retries.
    LlmVerdict query_case(const casegen::RenderedCase& rc);

    const std::string& session_id() const noexcept { return session_id_; }
    const std::string& system_role_text() const noexcept { return prompts_.system_role; }
    const std::vector<TranscriptEntry>& message_log() const noexcept { return log_; }
    const std::map<RuleId, ConfirmationStatus>& rule_id_map() const noexcept { return rule_id_map_; }
    bool rules_loaded() const noexcept { return rules_loaded_; }
    std::uint64_t backend_calls() const noexcept { return backend_calls_; }

private:
    void append(std::string role, std::string content);
    std::vector<ChatMessage> context(bool for_case) const;
    // Sends prompt, re-sending on transport errors. `sends` counts every
    // attempt for this prompt; the total never exceeds 1 + max_retries.
    std::string exchange(const std::string& prompt, bool for_case, int& sends);

    std::string session_id_;
    PromptSet prompts_;
    BackendConfig cfg_;
    std::shared_ptr<ChatBackend> backend_;
    SessionOptions options_;
    std::vector<TranscriptEntry> log_;
    std::map<RuleId, ConfirmationStatus> rule_id_map_;
    std::set<RuleId> known_ids_;
    bool rules_loaded_ = false;
    std::size_t loaded_end_ = 0;
    std::uint64_t backend_calls_ = 0;
};

std::string make_session_id();

// Builds the backend named by cfg. Remote backends need SCREENWISE_API_KEY
// (MissingCredential) and a reachable endpoint (BackendUnreachable). A
// non-null backend overrides construction.
Session start_session(const BackendConfig& cfg, PromptSet prompts, SessionOptions options = {},
                      std::shared_ptr<ChatBackend> backend = nullptr);

}  // namespace screenwise::llm
