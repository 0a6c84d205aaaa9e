#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace memviz::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kData = 3,
};

inline constexpr std::uint64_t kDefaultMaxMalformed = 1000;

/// Runs one `memviz` invocation. `args[0]` is the program name.
int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);

/// Writes `content` to a sibling temp file, then renames it over `path`.
/// Throws std::runtime_error on failure.
void write_atomically(const std::filesystem::path &path,
                      std::string_view content);

}  // namespace memviz::cli
