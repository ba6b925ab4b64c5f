#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace screenwise::testing {

namespace fs = std::filesystem;
using casegen::UseCase;
using rules::Recommendation;

TempDir::TempDir() {
    std::random_device rd;
    const auto base = fs::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto candidate = base / ("screenwise-test-" + std::to_string(rd()));
        if (fs::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
    throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::istringstream in(read_text(p));
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

std::string test_data(const std::string& name) { return std::string(SCREENWISE_TEST_DATA_DIR) + "/" + name; }

namespace {

bool has(const UseCase& c, RiskFactor f) {
    return std::find(c.risk_factors.begin(), c.risk_factors.end(), f) != c.risk_factors.end();
}

}  // namespace

std::vector<int> naive_default_triggers(const UseCase& c) {
    std::vector<int> fired;
    const bool female = c.gender == Gender::female;
    const bool thirty_plus = c.age >= 30;
    if (has(c, RiskFactor::BRCA_MUTATION) && thirty_plus) fired.push_back(1);
    if (has(c, RiskFactor::FIRST_DEGREE_RELATIVE_BRCA) && thirty_plus) fired.push_back(2);
    if (has(c, RiskFactor::CHEST_RADIATION_THERAPY_AGE_10_30) && thirty_plus) fired.push_back(3);
    if (has(c, RiskFactor::LI_FRAUMENI_SYNDROME) && thirty_plus) fired.push_back(4);
    if (female && c.age >= 40 && c.age <= 44) fired.push_back(5);
    if (female && c.age >= 45 && c.age <= 54) fired.push_back(6);
    if (female && c.age >= 55) fired.push_back(7);
    if (has(c, RiskFactor::PERSONAL_HISTORY_BREAST_CANCER)) fired.push_back(8);
    return fired;
}

Recommendation naive_default_recommendation(const std::vector<int>& fired) {
    if (fired.empty()) return Recommendation::CONSULT_PHYSICIAN;
    // Intensity ladder, most intensive first.
    const std::vector<std::pair<int, Recommendation>> ladder{
        {8, Recommendation::CONSULT_PHYSICIAN},
        {1, Recommendation::ANNUAL_MRI_AND_MAMMOGRAM},
        {2, Recommendation::ANNUAL_MRI_AND_MAMMOGRAM},
        {3, Recommendation::ANNUAL_MRI_AND_MAMMOGRAM},
        {4, Recommendation::ANNUAL_MRI_AND_MAMMOGRAM},
        {6, Recommendation::ANNUAL_MAMMOGRAM},
        {7, Recommendation::BIENNIAL_OR_ANNUAL_MAMMOGRAM},
        {5, Recommendation::OPTIONAL_ANNUAL_MAMMOGRAM},
    };
    for (const auto& [rule, rec] : ladder) {
        if (std::find(fired.begin(), fired.end(), rule) != fired.end()) return rec;
    }
    throw std::logic_error("unknown rule number");
}

bool naive_rule_fires(const rules::Rule& r, const UseCase& c) {
    for (const auto& cond : r.conditions) {
        const std::string dsl = rules::to_dsl(cond);
        const auto open = dsl.find('(');
        const std::string head = dsl.substr(0, open);
        const std::string arg = dsl.substr(open + 1, dsl.size() - open - 2);
        bool ok = false;
        if (head == "gender_is") {
            ok = arg == (c.gender == Gender::female ? "female" : "male");
        } else if (head == "age_in") {
            const auto comma = arg.find(',');
            ok = c.age >= std::stoi(arg.substr(0, comma)) && c.age <= std::stoi(arg.substr(comma + 1));
        } else if (head == "has_risk_factor") {
            ok = std::any_of(c.risk_factors.begin(), c.risk_factors.end(),
                             [&](RiskFactor f) { return to_string(f) == arg; });
        } else if (head == "risk_factor_count_at_least") {
            ok = static_cast<int>(c.risk_factors.size()) >= std::stoi(arg);
        } else {
            throw std::logic_error("unexpected condition " + dsl);
        }
        if (!ok) return false;
    }
    return true;
}

std::vector<casegen::CaseFileEntry> single_trigger_cases() {
    std::vector<UseCase> cases;
    for (int i = 0; i < 50; ++i) {
        UseCase c;
        c.case_id = i + 1;
        switch (i % 5) {
            case 0:  // R5
                c.gender = Gender::female;
                c.age = 40 + (i / 5) % 5;
                c.risk_factors = {RiskFactor::DENSE_BREAST_TISSUE};
                break;
            case 1:  // R6
                c.gender = Gender::female;
                c.age = 45 + (i / 5);
                c.risk_factors = {RiskFactor::FAMILY_HISTORY_BREAST_CANCER};
                break;
            case 2:  // R7
                c.gender = Gender::female;
                c.age = 55 + 3 * (i / 5);
                c.risk_factors = {RiskFactor::FAMILY_HISTORY_BREAST_CANCER, RiskFactor::DENSE_BREAST_TISSUE};
                break;
            case 3:  // R1
                c.gender = Gender::male;
                c.age = 30 + 6 * (i / 5);
                c.risk_factors = {RiskFactor::BRCA_MUTATION};
                break;
            default:  // R3
                c.gender = Gender::male;
                c.age = 31 + 5 * (i / 5);
                c.risk_factors = {RiskFactor::CHEST_RADIATION_THERAPY_AGE_10_30, RiskFactor::DENSE_BREAST_TISSUE};
                break;
        }
        c.history_text = casegen::compose_history(c.risk_factors);
        cases.push_back(c);
    }
    return casegen::with_renderings(cases, 7);
}

std::string reference_noise_json() {
    return R"({
  "structured": {"wrong_recommendation": [4, 17, 33], "zero_rule": [9, 26, 48]},
  "unstructured": {"wrong_recommendation": [2, 7, 13, 19, 24, 30, 36, 41, 47], "extra_rule": [5, 21, 38, 50]}
})";
}

}  // namespace screenwise::testing
