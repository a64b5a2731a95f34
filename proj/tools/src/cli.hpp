#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "sana/annotation.hpp"

namespace sana::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

/// Parses argv and runs one subcommand. `serve` blocks until SIGINT/SIGTERM.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// 42 unless SANA_SEED holds an unsigned integer.
std::uint64_t default_seed();

/// JSON Lines of {comment_id, label}; later lines win.
annotation::Resolutions load_resolutions(const std::filesystem::path& path);

}  // namespace sana::cli
