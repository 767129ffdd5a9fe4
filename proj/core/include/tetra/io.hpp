#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace tetra {

// Environment variable consulted when no explicit cache directory is given.
inline constexpr const char* kCacheDirEnv = "TETRACOUNT_CACHE_DIR";

// Explicit flag wins, then the environment variable, then nullopt (no cache).
std::optional<std::filesystem::path> resolve_cache_dir(const std::string& flag_value);

// Writes via a temporary file in the same directory followed by an atomic
// rename, so concurrent readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace tetra
