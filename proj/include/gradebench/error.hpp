#pragma once

#include <stdexcept>
#include <string>

namespace gradebench {

enum class ErrorCode {
    EmptyInput,
    InvalidConfig,
    InvalidArgument,
    IoError,
    SchemaError,
    EmbeddingError,
    DimensionError,
    DegenerateVector,
    EmptyIndex,
    EmptyContext,
    UnknownLabel,
    TransportError,
    ApiError,
    ConfigError,
    InvalidPlan,
    NoBenchmark,
    DegenerateGroup,
    UndefinedCorrelation,
    DegenerateTable,
};

const char* error_code_name(ErrorCode code);

/// Single exception type carrying a machine-readable code. Transport-class
/// errors set `retryable`; HTTP failures carry the status code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, bool retryable = false, int http_status = 0)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code),
          retryable_(retryable),
          http_status_(http_status) {}

    ErrorCode code() const { return code_; }
    bool retryable() const { return retryable_; }
    int http_status() const { return http_status_; }

private:
    ErrorCode code_;
    bool retryable_;
    int http_status_;
};

}  // namespace gradebench
