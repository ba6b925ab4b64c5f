#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace screenwise {

// Base of every error the library throws. Callers that only need a message
// can catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- rule pack -------------------------------------------------------------

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t line, std::size_t column, std::string expected)
        : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(column) +
                ": expected " + expected),
          line_(line), column_(column), expected_(std::move(expected)) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string expected_;
};

class DuplicateRuleId : public Error {
public:
    DuplicateRuleId(std::string rule_id, std::size_t line)
        : Error("DuplicateRuleId: " + rule_id + " (line " + std::to_string(line) + ")"),
          rule_id_(std::move(rule_id)), line_(line) {}

    const std::string& rule_id() const noexcept { return rule_id_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string rule_id_;
    std::size_t line_;
};

class UnknownRiskFactor : public Error {
public:
    UnknownRiskFactor(std::string code, std::size_t line)
        : Error("UnknownRiskFactor: " + code + " (line " + std::to_string(line) + ")"),
          code_(std::move(code)), line_(line) {}

    const std::string& code() const noexcept { return code_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string code_;
    std::size_t line_;
};

// ---- use cases -------------------------------------------------------------

class EmptyRegistry : public Error {
public:
    EmptyRegistry() : Error("EmptyRegistry: risk-factor registry has no entries") {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error("FormatError: " + what) {}
};

class InvariantViolation : public Error {
public:
    explicit InvariantViolation(const std::string& what) : Error("InvariantViolation: " + what) {}
};

// ---- chat protocol ---------------------------------------------------------

class MissingCredential : public Error {
public:
    explicit MissingCredential(const std::string& variable)
        : Error("MissingCredential: environment variable " + variable + " is not set") {}
};

class BackendUnreachable : public Error {
public:
    explicit BackendUnreachable(const std::string& detail)
        : Error("BackendUnreachable: " + detail) {}
};

class BackendError : public Error {
public:
    explicit BackendError(const std::string& detail) : Error("BackendError: " + detail) {}
};

class Timeout : public BackendError {
public:
    explicit Timeout(const std::string& detail) : BackendError("timeout: " + detail) {}
};

class EmptyRuleSet : public Error {
public:
    EmptyRuleSet() : Error("EmptyRuleSet: nothing to load") {}
};

class ConfirmationFailed : public Error {
public:
    ConfirmationFailed(std::string rule_id, std::string raw_reply)
        : Error("ConfirmationFailed: " + rule_id + " was not acknowledged"),
          rule_id_(std::move(rule_id)), raw_reply_(std::move(raw_reply)) {}

    const std::string& rule_id() const noexcept { return rule_id_; }
    const std::string& raw_reply() const noexcept { return raw_reply_; }

private:
    std::string rule_id_;
    std::string raw_reply_;
};

class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& what) : Error("ProtocolError: " + what) {}
};

// ---- evaluation ------------------------------------------------------------

class CaseIdMismatch : public Error {
public:
    CaseIdMismatch(long oracle_id, long llm_id)
        : Error("CaseIdMismatch: oracle case " + std::to_string(oracle_id) + " vs llm case " +
                std::to_string(llm_id)) {}
};

class UnsupportedFormat : public Error {
public:
    explicit UnsupportedFormat(const std::string& name)
        : Error("UnsupportedFormat: " + name) {}
};

class FileError : public Error {
public:
    FileError(const std::string& path, const std::string& detail)
        : Error("FileError: " + path + ": " + detail), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace screenwise
