#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>

namespace vpfix::io {

/// Called after half of the payload has reached the temp file, before the rest is
/// written and before the rename. Tests install it to simulate a crash mid-write.
using WriteFaultHook = std::function<void(const std::filesystem::path& temp_path)>;

/// Installs a process-wide hook; pass an empty function to clear it.
void set_write_fault_hook(WriteFaultHook hook);

/// Writes `bytes` to a sibling temp file, flushes it, then renames over `path`.
/// Readers observe either the previous file or the complete new one.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace vpfix::io
