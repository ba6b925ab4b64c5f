#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "screenwise/error.hpp"
#include "screenwise/rules.hpp"

namespace screenwise::rules {

namespace {

enum class Tok { ident, integer, string, lparen, rparen, comma, end };

struct Token {
    Tok kind;
    std::string text;
    std::size_t column;  // 1-based
};

std::string_view describe(Tok t) {
    switch (t) {
        case Tok::ident: return "identifier";
        case Tok::integer: return "integer";
        case Tok::string: return "quoted string";
        case Tok::lparen: return "'('";
        case Tok::rparen: return "')'";
        case Tok::comma: return "','";
        case Tok::end: return "end of line";
    }
    return "token";
}

// Tokenizes and parses one physical line.
class LineParser {
public:
    LineParser(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {
        tokenize();
    }

    // Returns true if the line held a VERSION directive.
    bool parse_version(std::string& version) {
        if (!peek_keyword("VERSION")) return false;
        next();
        version = expect(Tok::string, "quoted version string").text;
        expect(Tok::end, "end of line after VERSION");
        return true;
    }

    Rule parse_rule() {
        expect_keyword("RULE");
        Rule rule;
        const Token& id_tok = expect(Tok::ident, "rule id R<positive integer>");
        auto id = parse_rule_id(id_tok.text);
        if (!id) fail(id_tok.column, "rule id R<positive integer>");
        rule.id = *id;
        rule.name = expect(Tok::string, "quoted rule name").text;
        expect_keyword("IF");
        rule.conditions.push_back(parse_condition());
        while (peek_keyword("AND")) {
            next();
            rule.conditions.push_back(parse_condition());
        }
        if (!peek_keyword("THEN")) fail(peek().column, "AND or THEN");
        next();
        const Token& rec_tok = expect(Tok::ident, "recommendation code");
        auto rec = parse_recommendation(rec_tok.text);
        if (!rec) fail(rec_tok.column, "recommendation code");
        rule.recommendation = *rec;
        if (peek_keyword("SOURCE")) {
            next();
            rule.source_note = expect(Tok::string, "quoted source note").text;
        }
        expect(Tok::end, "end of line");
        return rule;
    }

    std::size_t first_column() const { return tokens_.front().column; }

    Condition parse_lone_condition() {
        Condition c = parse_condition();
        expect(Tok::end, "end of condition");
        return c;
    }

private:
    Condition parse_condition() {
        const Token& head = expect(Tok::ident, "condition");
        const std::string name = head.text;
        expect(Tok::lparen, "'('");
        Condition cond;
        if (name == "gender_is") {
            const Token& t = expect(Tok::ident, "female or male");
            auto g = parse_gender(t.text);
            if (!g) fail(t.column, "female or male");
            cond = GenderIs{*g};
        } else if (name == "age_in") {
            int low = parse_age_bound();
            expect(Tok::comma, "','");
            int high = parse_age_bound();
            cond = AgeInRange{low, high};
        } else if (name == "has_risk_factor") {
            const Token& t = expect(Tok::ident, "risk factor code");
            auto f = parse_risk_factor(t.text);
            if (!f) throw UnknownRiskFactor(t.text, line_no_);
            cond = HasRiskFactor{*f};
        } else if (name == "risk_factor_count_at_least") {
            const Token& t = expect(Tok::integer, "nonnegative integer");
            cond = RiskFactorCountAtLeast{to_int(t, 0, 1'000'000, "nonnegative integer")};
        } else {
            fail(head.column,
                 "condition (gender_is, age_in, has_risk_factor, risk_factor_count_at_least)");
        }
        expect(Tok::rparen, "')'");
        return cond;
    }

    int parse_age_bound() {
        const Token& t = expect(Tok::integer, "age bound");
        return to_int(t, kMinAgeBound, kMaxAgeBound, "age bound in [0,130]");
    }

    int to_int(const Token& t, int lo, int hi, std::string_view what) {
        int value = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
        if (ec != std::errc{} || ptr != t.text.data() + t.text.size() || value < lo || value > hi) {
            fail(t.column, std::string(what));
        }
        return value;
    }

    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() {
        const Token& t = tokens_[pos_];
        if (t.kind != Tok::end) ++pos_;
        return t;
    }

    bool peek_keyword(std::string_view kw) const {
        return peek().kind == Tok::ident && peek().text == kw;
    }

    void expect_keyword(std::string_view kw) {
        if (!peek_keyword(kw)) fail(peek().column, std::string(kw));
        next();
    }

    const Token& expect(Tok kind, std::string_view what) {
        if (peek().kind != kind) {
            fail(peek().column, std::string(what) + " (found " + std::string(describe(peek().kind)) +
                                    ")");
        }
        return next();
    }

    [[noreturn]] void fail(std::size_t column, std::string expected) const {
        throw SyntaxError(line_no_, column, std::move(expected));
    }

    void tokenize() {
        std::size_t i = 0;
        while (i < line_.size()) {
            const char c = line_[i];
            const std::size_t col = i + 1;
            if (c == ' ' || c == '\t') {
                ++i;
            } else if (c == '#') {
                break;
            } else if (c == '(') {
                tokens_.push_back({Tok::lparen, "(", col});
                ++i;
            } else if (c == ')') {
                tokens_.push_back({Tok::rparen, ")", col});
                ++i;
            } else if (c == ',') {
                tokens_.push_back({Tok::comma, ",", col});
                ++i;
            } else if (c == '"') {
                std::string value;
                ++i;
                bool closed = false;
                while (i < line_.size()) {
                    char d = line_[i++];
                    if (d == '\\' && i < line_.size()) {
                        value.push_back(line_[i++]);
                    } else if (d == '"') {
                        closed = true;
                        break;
                    } else {
                        value.push_back(d);
                    }
                }
                if (!closed) fail(line_.size() + 1, "closing '\"'");
                tokens_.push_back({Tok::string, std::move(value), col});
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                std::size_t j = i;
                while (j < line_.size() && std::isdigit(static_cast<unsigned char>(line_[j]))) ++j;
                tokens_.push_back({Tok::integer, std::string(line_.substr(i, j - i)), col});
                i = j;
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t j = i;
                while (j < line_.size() && (std::isalnum(static_cast<unsigned char>(line_[j])) ||
                                            line_[j] == '_')) {
                    ++j;
                }
                tokens_.push_back({Tok::ident, std::string(line_.substr(i, j - i)), col});
                i = j;
            } else {
                fail(col, "token (unexpected character)");
            }
        }
        tokens_.push_back({Tok::end, "", line_.size() + 1});
    }

    std::string_view line_;
    std::size_t line_no_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

}  // namespace

RuleSet parse_rules(std::string_view text) {
    std::vector<Rule> rules;
    std::string version;
    bool have_version = false;
    std::set<RuleId> seen;

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        start = end + 1;

        LineParser parser(line, line_no);
        std::string v;
        // Blank and comment-only lines tokenize to a lone end token.
        if (parser.first_column() == line.size() + 1) {
            if (end == text.size()) break;
            continue;
        }
        if (parser.parse_version(v)) {
            if (have_version) throw SyntaxError(line_no, 1, "at most one VERSION line");
            version = std::move(v);
            have_version = true;
        } else {
            Rule rule = parser.parse_rule();
            if (!seen.insert(rule.id).second) throw DuplicateRuleId(rule.id.str(), line_no);
            rules.push_back(std::move(rule));
        }
        if (end == text.size()) break;
    }
    try {
        return RuleSet(std::move(rules), std::move(version));
    } catch (const InvariantViolation& e) {
        throw SyntaxError(line_no, 1, e.what());
    }
}

Condition parse_condition(std::string_view text) {
    return LineParser(text, 1).parse_lone_condition();
}

RuleSet load_rules_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError(path, "cannot open rule file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_rules(buf.str());
}

}  // namespace screenwise::rules
