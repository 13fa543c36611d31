#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tpnn {

enum class ErrorCode {
    // model-ir
    EmptyNetwork,
    InvalidShape,
    ShapeMismatch,
    NonIntegralPoolOutput,
    SliceOutOfBounds,
    SliceOverlap,
    SliceGap,
    SliceLengthMismatch,
    UnsupportedLayer,
    UnsupportedActivation,
    // ingest
    ManifestSyntax,
    UnsupportedVersion,
    ChecksumMismatch,
    WeightsLengthMismatch,
    IoFailure,
    // interpreter
    ModeMismatch,
    // codegen
    IdentifierCollision,
    NonFiniteWeight,
};

std::string_view to_string(ErrorCode code);

/// One finding produced by network validation or model loading.
struct Diagnostic {
    ErrorCode code;
    std::optional<std::size_t> layer;
    std::string message;

    std::string describe() const;
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);
    explicit Error(std::vector<Diagnostic> diagnostics);

    ErrorCode code() const noexcept { return code_; }

    /// Every finding behind this error; the first one determines code().
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    ErrorCode code_;
    std::vector<Diagnostic> diagnostics_;
};

class WeightsLengthError : public Error {
public:
    WeightsLengthError(std::size_t expected_bytes, std::size_t actual_bytes);

    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

} // namespace tpnn
