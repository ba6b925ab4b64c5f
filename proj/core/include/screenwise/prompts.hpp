#pragma once

#include <map>
#include <string>
#include <string_view>

namespace screenwise::llm {

inline constexpr std::string_view kSystemRoleFile = "system_role.txt";
inline constexpr std::string_view kConfirmRuleFile = "confirm_rule.txt";
inline constexpr std::string_view kEnforceExplanationFile = "enforce_explanation.txt";

// The three prompt templates that define one protocol version. Wording is
// the experiment's independent variable, so each file is hashed and the
// hashes travel with every run.
struct PromptSet {
    std::string directory;
    std::string system_role;
    // Contains the placeholder {rule_id}.
    std::string confirm_rule;
    std::string enforce_explanation;
    // file name -> hex SHA-256 of its bytes
    std::map<std::string, std::string> hashes;
};

// Reads the three templates from a versioned directory (e.g. prompts/v1).
// Throws FileError naming the first missing file.
PromptSet load_prompts(const std::string& directory);

// Default template directory baked in at build time; overridden by the
// SCREENWISE_DATA_DIR environment variable when set.
std::string default_data_dir();
std::string default_prompts_dir();
std::string default_rules_path();

}  // namespace screenwise::llm
