#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rashodet {

enum class ErrorCode {
    missing_target,
    non_binary_target,
    ragged_row,
    missing_value,
    degenerate_split,
    too_few_per_class,
    invalid_hyperparameter,
    single_class_data,
    single_class,
    version_mismatch,
    corrupt_payload,
    categorical_variable,
    numeric_variable,
    degenerate_domain,
    unknown_variable,
    schema_mismatch,
    grid_mismatch,
    profile_too_short,
    bad_window,
    category_mismatch,
    unknown_explicit_id,
    bundle_incomplete,
    unknown_scenario,
    missing_run_directory,
    io_error,
    bad_argument,
};

inline std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::missing_target: return "MissingTarget";
        case ErrorCode::non_binary_target: return "NonBinaryTarget";
        case ErrorCode::ragged_row: return "RaggedRow";
        case ErrorCode::missing_value: return "MissingValue";
        case ErrorCode::degenerate_split: return "DegenerateSplit";
        case ErrorCode::too_few_per_class: return "TooFewPerClass";
        case ErrorCode::invalid_hyperparameter: return "InvalidHyperparameter";
        case ErrorCode::single_class_data: return "SingleClassData";
        case ErrorCode::single_class: return "SingleClass";
        case ErrorCode::version_mismatch: return "VersionMismatch";
        case ErrorCode::corrupt_payload: return "CorruptPayload";
        case ErrorCode::categorical_variable: return "CategoricalVariable";
        case ErrorCode::numeric_variable: return "NumericVariable";
        case ErrorCode::degenerate_domain: return "DegenerateDomain";
        case ErrorCode::unknown_variable: return "UnknownVariable";
        case ErrorCode::schema_mismatch: return "SchemaMismatch";
        case ErrorCode::grid_mismatch: return "GridMismatch";
        case ErrorCode::profile_too_short: return "ProfileTooShort";
        case ErrorCode::bad_window: return "BadWindow";
        case ErrorCode::category_mismatch: return "CategoryMismatch";
        case ErrorCode::unknown_explicit_id: return "UnknownExplicitId";
        case ErrorCode::bundle_incomplete: return "BundleIncomplete";
        case ErrorCode::unknown_scenario: return "UnknownScenario";
        case ErrorCode::missing_run_directory: return "MissingRunDirectory";
        case ErrorCode::io_error: return "IoError";
        case ErrorCode::bad_argument: return "BadArgument";
    }
    return "Unknown";
}

// Domain exception carrying a stable machine-readable code alongside the
// human-readable message. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code),
          message_(message) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view name() const noexcept { return error_name(code_); }
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

} // namespace rashodet
