#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace agbench {

/// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input-file validation failure. The message always starts with `file:line`
/// (and `:column` when a single field is at fault).
class DataError : public Error {
public:
    DataError(std::string file, std::size_t line, std::size_t column, const std::string& message)
        : Error(compose(file, line, column, message)),
          file_(std::move(file)),
          line_(line),
          column_(column) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }
    /// 1-based field index, 0 when the whole row is at fault.
    std::size_t column() const noexcept { return column_; }

private:
    static std::string compose(const std::string& file, std::size_t line, std::size_t column,
                               const std::string& message) {
        std::string out = file + ":" + std::to_string(line);
        if (column > 0) out += ":" + std::to_string(column);
        return out + ": " + message;
    }

    std::string file_;
    std::size_t line_;
    std::size_t column_;
};

/// Column layout disagreement between a model, a table, or two tables.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Configuration file or flag problem.
class ConfigError : public Error {
public:
    using Error::Error;
};

/**
 * A feature that cannot be computed for one (unit, year) row. The cause code
 * is what the missing-data policy counts in its exclusion log.
 */
class FeatureGap : public Error {
public:
    FeatureGap(std::string cause, const std::string& message)
        : Error(message), cause_(std::move(cause)) {}

    const std::string& cause() const noexcept { return cause_; }

private:
    std::string cause_;
};

class InsufficientObservations : public FeatureGap {
public:
    explicit InsufficientObservations(const std::string& message)
        : FeatureGap("insufficient_observations", "insufficient observations: " + message) {}
};

class DegenerateDesign : public FeatureGap {
public:
    explicit DegenerateDesign(const std::string& message)
        : FeatureGap("degenerate_design", "degenerate design: " + message) {}
};

class NoCotemporalObservations : public FeatureGap {
public:
    explicit NoCotemporalObservations(const std::string& message)
        : FeatureGap("insufficient_observations", "no co-temporal observations: " + message) {}
};

class MissingMonth : public FeatureGap {
public:
    explicit MissingMonth(const std::string& message)
        : FeatureGap("missing_month", "missing month: " + message) {}
};

class MissingClimate : public FeatureGap {
public:
    explicit MissingClimate(const std::string& message)
        : FeatureGap("missing_climate", "no climate data for month: " + message) {}
};

class MissingEmbedding : public FeatureGap {
public:
    explicit MissingEmbedding(const std::string& message)
        : FeatureGap("missing_embedding", "missing embedding: " + message) {}
};

/// Zero denominator in a spectral index.
class IndexDomainError : public FeatureGap {
public:
    explicit IndexDomainError(const std::string& message)
        : FeatureGap("index_domain", message) {}
};

}  // namespace agbench
