#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "screenwise/casegen.hpp"
#include "screenwise/error.hpp"

namespace screenwise::casegen {

using json = nlohmann::ordered_json;

std::string to_jsonl_line(const CaseFileEntry& e) {
    const auto& c = e.use_case;
    json j;
    j["case_id"] = c.case_id;
    j["gender"] = to_string(c.gender);
    j["age"] = c.age;
    json factors = json::array();
    for (auto f : c.risk_factors) factors.push_back(to_string(f));
    j["risk_factors"] = std::move(factors);
    j["history"] = c.history_text;
    if (e.rendered_structured) j["rendered_structured"] = *e.rendered_structured;
    if (e.rendered_unstructured) j["rendered_unstructured"] = *e.rendered_unstructured;
    return j.dump();
}

CaseFileEntry from_jsonl_line(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("cases line is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw FormatError("cases line must be a JSON object");

    auto field = [&](const char* key) -> const json& {
        auto it = j.find(key);
        if (it == j.end()) throw FormatError(std::string("cases line missing '") + key + "'");
        return *it;
    };

    CaseFileEntry e;
    auto& c = e.use_case;
    try {
        c.case_id = field("case_id").get<int>();
        auto g = parse_gender(field("gender").get<std::string>());
        if (!g) throw FormatError("gender must be female or male");
        c.gender = *g;
        c.age = field("age").get<int>();
        for (const auto& code : field("risk_factors")) {
            auto f = parse_risk_factor(code.get<std::string>());
            if (!f) throw FormatError("unknown risk factor '" + code.get<std::string>() + "'");
            c.risk_factors.push_back(*f);
        }
        c.history_text = field("history").get<std::string>();
        if (auto it = j.find("rendered_structured"); it != j.end()) {
            e.rendered_structured = it->get<std::string>();
        }
        if (auto it = j.find("rendered_unstructured"); it != j.end()) {
            e.rendered_unstructured = it->get<std::string>();
        }
    } catch (const json::exception& ex) {
        throw FormatError(std::string("cases line has a mistyped field: ") + ex.what());
    }
    validate(c);
    return e;
}

void write_cases(std::ostream& out, std::span<const CaseFileEntry> entries) {
    for (const auto& e : entries) out << to_jsonl_line(e) << '\n';
}

std::vector<CaseFileEntry> read_cases(std::istream& in) {
    std::vector<CaseFileEntry> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(from_jsonl_line(line));
        } catch (const Error& e) {
            throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<CaseFileEntry> read_cases_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError(path, "cannot open cases file");
    return read_cases(in);
}

}  // namespace screenwise::casegen
