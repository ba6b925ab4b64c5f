#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "screenwise/casegen.hpp"
#include "screenwise/rules.hpp"

namespace screenwise::testing {

// Self-deleting scratch directory.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& text);
std::vector<std::string> read_lines(const std::filesystem::path& p);

// Path to a file under tests/data.
std::string test_data(const std::string& name);

// Hand-coded reading of the shipped rule pack, written straight from the
// guideline table with no use of the parser or the engine. Returns rule
// numbers in ascending order.
std::vector<int> naive_default_triggers(const casegen::UseCase& c);
// Most intensive action wins; nothing fired means see a physician.
rules::Recommendation naive_default_recommendation(const std::vector<int>& fired);

// Generic re-check of a parsed rule against a case, going through the DSL
// text of each condition rather than the engine's variant visitor.
bool naive_rule_fires(const rules::Rule& r, const casegen::UseCase& c);

// Fifty cases built so each fires exactly one rule of the shipped pack.
std::vector<casegen::CaseFileEntry> single_trigger_cases();
// Noise schedule replaying the published outcome counts over those cases.
std::string reference_noise_json();

}  // namespace screenwise::testing
