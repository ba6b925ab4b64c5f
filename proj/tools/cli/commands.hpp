#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "screenwise/llmlink.hpp"

namespace screenwise::cli {

// Stable exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

enum class ModeSelection { structured, unstructured, both, paired };

struct RunConfig {
    std::string rules_path;
    std::string prompts_dir;
    // Exactly one of cases_path / seed is the case source.
    std::string cases_path;
    std::optional<std::uint64_t> seed;
    int count = 50;
    ModeSelection modes = ModeSelection::paired;
    llm::BackendConfig backend;
    std::string noise_path;
    std::string out_dir = "runs";
    bool fresh_per_case = false;
    bool parallel_sessions = false;
    bool include_trace = false;
};

struct RunOutcome {
    int exit_code = kExitOk;
    std::filesystem::path run_dir;
};

int cmd_rules_check(const std::string& rules_path, std::ostream& out, std::ostream& err);
int cmd_gen(std::uint64_t seed, int count, const std::string& out_path, std::ostream& out,
            std::ostream& err);
RunOutcome cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& run_dir, const std::string& format, std::ostream& out,
               std::ostream& err);

// Full command line: `rules check`, `gen`, `run`, `report`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace screenwise::cli
