#pragma once

// Drives the host C compiler for differential tests. The compiler and nm
// paths come from the build (TPNN_CC, TPNN_NM).

#include "tpnn/codegen.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tpnn::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

struct CommandResult {
    int status = -1;
    std::string output; // stdout and stderr interleaved
};

CommandResult run_command(const std::string& command);

std::string shell_quote(const std::string& s);

/// Flags every generated unit must compile under.
const std::string& strict_c_flags();

/// Compiles `sources` (relative to dir) into dir/exe_name. Returns the
/// compiler output on failure, empty string on success.
std::string compile_executable(const std::filesystem::path& dir, const std::vector<std::string>& sources,
                               const std::string& exe_name, const std::string& extra_flags = "");

/// Compiles one source to an object file; same error convention.
std::string compile_object(const std::filesystem::path& dir, const std::string& source,
                           const std::string& object, const std::string& flags);

/// Writes the unit plus a harness for `vectors`, builds and runs it and
/// returns the harness stdout split into lines of hex words.
std::vector<std::vector<std::uint32_t>> run_compiled(const EmittedUnit& unit, const EmittedFile& harness);

/// Sizes of defined data symbols (nm -S) in an object file.
std::map<std::string, std::uint64_t> data_symbol_sizes(const std::filesystem::path& object);

} // namespace tpnn::testing
