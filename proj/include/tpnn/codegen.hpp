#pragma once

#include "tpnn/fixedpoint.hpp"
#include "tpnn/interpreter.hpp"
#include "tpnn/model_ir.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tpnn {

struct CodegenConfig {
    NumericMode mode = NumericMode::Fix16;
    /// Symbol prefix; empty means the sanitized network name.
    std::string prefix;
    /// Fix16 mode only: also emit tp_runtime.h.
    bool emit_runtime_header = true;
};

struct EmittedFile {
    std::string name;
    std::string text;
};

/// Generated C99 sources for one network:
///   <prefix>.h          entry-point prototype and IN_N/OUT_N constants
///   <prefix>.c          one static function per layer plus <prefix>_run
///   <prefix>_weights.c  parameters as const initializers
///   tp_runtime.h        Q16.16 operations and activation tables (fix16)
struct EmittedUnit {
    std::string prefix;
    NumericMode mode = NumericMode::Fix16;
    std::size_t input_size = 0;
    std::size_t output_size = 0;
    EmittedFile header;
    EmittedFile source;
    EmittedFile weights;
    std::optional<EmittedFile> runtime;

    std::vector<EmittedFile> files() const;
};

/// Valid C identifier derived from `name`. Throws IdentifierCollision when
/// the result is a C keyword or falls in the runtime's tp_ namespace.
std::string sanitize_prefix(std::string_view name);

/// Deterministic: identical inputs give byte-identical text.
EmittedUnit generate(const Network& network, const CodegenConfig& config = {});

/// The fix16 runtime header, built from the fixedpoint module's tables.
std::string runtime_header_text();

/// main() that runs each vector through <prefix>_run and prints one line
/// per vector: the output words as 8-digit lowercase hex, space separated.
EmittedFile emit_test_harness(const EmittedUnit& unit, std::span<const std::vector<float>> vectors);
EmittedFile emit_test_harness(const EmittedUnit& unit, std::span<const std::vector<Fix16>> vectors);

/// Writes every file of the unit (plus optional extras) into `dir`.
void write_unit(const EmittedUnit& unit, const std::filesystem::path& dir,
                std::span<const EmittedFile> extra = {});

/// Bytes of static arrays the generated code owns: parameters plus the
/// ping-pong activation buffers (runtime tables excluded).
std::size_t static_array_bytes(const Network& network);

/// Element count of each emitted ping-pong buffer (zero, one or two entries).
std::vector<std::size_t> activation_buffer_sizes(const Network& network);

} // namespace tpnn
