#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace forge {

namespace fs = std::filesystem;

/// Throws Error(IoError) when the file cannot be read.
std::string read_file(const fs::path& path);

/// Called after the temporary file is fully written and before it is renamed
/// over the destination. Tests use it to simulate a crash at that boundary.
using RenameHook = std::function<void(const fs::path& tmp, const fs::path& dest)>;

/// Writes `content` to `<path>.tmp`, flushes it to disk and renames it over
/// `path`. Parent directories are created as needed.
void write_file_atomic(const fs::path& path, std::string_view content, const RenameHook& hook = {});

void write_file(const fs::path& path, std::string_view content);

/// Byte-for-byte copy that creates parent directories and overwrites `dst`.
void copy_file_over(const fs::path& src, const fs::path& dst);

/// FNV-1a 64-bit digest of the file's bytes, hex encoded.
std::string file_digest(const fs::path& path);

}  // namespace forge
