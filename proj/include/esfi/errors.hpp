#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace esfi {

/// Invalid argument or violated precondition.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The adaptive integrator could not advance (step-size underflow, blow-up,
/// or a state component went significantly negative).
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double last_good_time)
        : std::runtime_error(what), last_good_time_(last_good_time) {}

    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

/// Trajectory ended while forwarders were still active.
class NotStableError : public std::runtime_error {
public:
    NotStableError(const std::string& what, double residual_active_fraction)
        : std::runtime_error(what), residual_(residual_active_fraction) {}

    double residual_active_fraction() const noexcept { return residual_; }

private:
    double residual_;
};

/// Dataset parse failure. Row is 1-based line number in the source (0 when the
/// error is not tied to a line), column is the header name or empty.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t row, std::string column)
        : std::runtime_error(what), row_(row), column_(std::move(column)) {}

    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

/// Correlation is undefined because a rank vector is constant.
class UndefinedCorrelation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Output sink failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Analysis ran but could not produce a trustworthy result.
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace esfi
