#include "tpnn/error.hpp"

namespace tpnn {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::EmptyNetwork: return "EmptyNetwork";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonIntegralPoolOutput: return "NonIntegralPoolOutput";
    case ErrorCode::SliceOutOfBounds: return "SliceOutOfBounds";
    case ErrorCode::SliceOverlap: return "SliceOverlap";
    case ErrorCode::SliceGap: return "SliceGap";
    case ErrorCode::SliceLengthMismatch: return "SliceLengthMismatch";
    case ErrorCode::UnsupportedLayer: return "UnsupportedLayer";
    case ErrorCode::UnsupportedActivation: return "UnsupportedActivation";
    case ErrorCode::ManifestSyntax: return "ManifestSyntax";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::WeightsLengthMismatch: return "WeightsLengthMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ModeMismatch: return "ModeMismatch";
    case ErrorCode::IdentifierCollision: return "IdentifierCollision";
    case ErrorCode::NonFiniteWeight: return "NonFiniteWeight";
    }
    return "Unknown";
}

std::string Diagnostic::describe() const {
    std::string out(to_string(code));
    if (layer) {
        out += " (layer " + std::to_string(*layer) + ")";
    }
    out += ": ";
    out += message;
    return out;
}

namespace {

std::string join(const std::vector<Diagnostic>& diagnostics) {
    std::string out;
    for (const auto& d : diagnostics) {
        if (!out.empty()) {
            out += "; ";
        }
        out += d.describe();
    }
    return out;
}

} // namespace

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      diagnostics_{Diagnostic{code, std::nullopt, message}} {}

Error::Error(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join(diagnostics)),
      code_(diagnostics.empty() ? ErrorCode::InvalidShape : diagnostics.front().code),
      diagnostics_(std::move(diagnostics)) {}

WeightsLengthError::WeightsLengthError(std::size_t expected_bytes, std::size_t actual_bytes)
    : Error(ErrorCode::WeightsLengthMismatch,
            "expected " + std::to_string(expected_bytes) + " bytes, got " +
                std::to_string(actual_bytes)),
      expected_(expected_bytes),
      actual_(actual_bytes) {}

} // namespace tpnn
