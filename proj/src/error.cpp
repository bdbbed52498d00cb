#include "gradebench/error.hpp"

namespace gradebench {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::EmbeddingError: return "EmbeddingError";
        case ErrorCode::DimensionError: return "DimensionError";
        case ErrorCode::DegenerateVector: return "DegenerateVector";
        case ErrorCode::EmptyIndex: return "EmptyIndex";
        case ErrorCode::EmptyContext: return "EmptyContext";
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::TransportError: return "TransportError";
        case ErrorCode::ApiError: return "ApiError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::InvalidPlan: return "InvalidPlan";
        case ErrorCode::NoBenchmark: return "NoBenchmark";
        case ErrorCode::DegenerateGroup: return "DegenerateGroup";
        case ErrorCode::UndefinedCorrelation: return "UndefinedCorrelation";
        case ErrorCode::DegenerateTable: return "DegenerateTable";
    }
    return "UnknownError";
}

}  // namespace gradebench
