#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace citeforecast {

/// Broad failure class; the CLI maps it to an exit status (1 = validation, 2 = numerical).
enum class ErrorKind { validation, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// --- input and data-model failures -------------------------------------------------------------

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class SchemaError : public Error {
public:
    SchemaError(std::size_t row, std::string field, const std::string& detail)
        : Error(ErrorKind::validation,
                "row " + std::to_string(row) + ", field '" + field + "': " + detail),
          row_(row), field_(std::move(field)) {}
    std::size_t row() const noexcept { return row_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t row_;
    std::string field_;
};

class DuplicateIdError : public Error {
public:
    explicit DuplicateIdError(std::string id)
        : Error(ErrorKind::validation, "duplicate publication id: " + id), id_(std::move(id)) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> failures)
        : Error(ErrorKind::validation, join(failures)), failures_(std::move(failures)) {}
    const std::vector<std::string>& failures() const noexcept { return failures_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out = "validation failed";
        for (const auto& f : items) out += "\n  " + f;
        return out;
    }
    std::vector<std::string> failures_;
};

class EmptyCorpusError : public Error {
public:
    EmptyCorpusError() : Error(ErrorKind::validation, "corpus is empty") {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class UnknownScError : public Error {
public:
    explicit UnknownScError(const std::string& sc)
        : Error(ErrorKind::validation, "unknown subject category: " + sc) {}
};

class MissingBaselineError : public Error {
public:
    MissingBaselineError(const std::string& sc, int year, int window)
        : Error(ErrorKind::validation, "no baseline for sc=" + sc + " year=" + std::to_string(year) +
                                           " window=" + std::to_string(window)) {}
};

class ZeroBaselineError : public Error {
public:
    ZeroBaselineError(const std::string& id, int window)
        : Error(ErrorKind::validation, "zero baseline denominator with positive count for " + id +
                                           " at window " + std::to_string(window)) {}
};

class MissingFeatureError : public Error {
public:
    explicit MissingFeatureError(const std::string& name)
        : Error(ErrorKind::validation, "missing feature: " + name) {}
};

// --- numerical failures ------------------------------------------------------------------------

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class UnderdeterminedError : public Error {
public:
    explicit UnderdeterminedError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class NonFiniteError : public Error {
public:
    explicit NonFiniteError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class NestingViolationError : public Error {
public:
    explicit NestingViolationError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class NoDummiesError : public Error {
public:
    NoDummiesError() : Error(ErrorKind::numerical, "fit has no subject-category dummy coefficients") {}
};

}  // namespace citeforecast
