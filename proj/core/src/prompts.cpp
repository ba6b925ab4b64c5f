#include "screenwise/prompts.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "screenwise/error.hpp"
#include "screenwise/sha256.hpp"

#ifndef SCREENWISE_DEFAULT_DATA_DIR
#define SCREENWISE_DEFAULT_DATA_DIR "data"
#endif

namespace screenwise::llm {

namespace {

std::string read_template(const std::filesystem::path& dir, std::string_view name,
                          std::map<std::string, std::string>& hashes) {
    const auto path = dir / name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError(path.string(), "prompt template not found");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    hashes.emplace(std::string(name), sha256_hex(text));
    // Trailing newlines are an editor artifact, not part of the prompt.
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text;
}

}  // namespace

PromptSet load_prompts(const std::string& directory) {
    PromptSet p;
    p.directory = directory;
    p.system_role = read_template(directory, kSystemRoleFile, p.hashes);
    p.confirm_rule = read_template(directory, kConfirmRuleFile, p.hashes);
    p.enforce_explanation = read_template(directory, kEnforceExplanationFile, p.hashes);
    if (p.confirm_rule.find("{rule_id}") == std::string::npos) {
        throw FileError((std::filesystem::path(directory) / kConfirmRuleFile).string(),
                        "template lacks the {rule_id} placeholder");
    }
    return p;
}

std::string default_data_dir() {
    if (const char* env = std::getenv("SCREENWISE_DATA_DIR"); env && *env) return env;
    return SCREENWISE_DEFAULT_DATA_DIR;
}

std::string default_prompts_dir() {
    return (std::filesystem::path(default_data_dir()) / "prompts" / "v1").string();
}

std::string default_rules_path() {
    return (std::filesystem::path(default_data_dir()) / "rules" / "default.rules").string();
}

}  // namespace screenwise::llm
