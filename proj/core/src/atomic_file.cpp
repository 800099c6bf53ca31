#include "vpfix/atomic_file.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <string>

#include "vpfix/error.hpp"

namespace vpfix::io {
namespace {

std::mutex g_hook_mutex;
WriteFaultHook g_hook;
std::atomic<unsigned long> g_temp_counter{0};

void write_all(int fd, const std::uint8_t* data, std::size_t n, const std::filesystem::path& p) {
  while (n > 0) {
    const ssize_t w = ::write(fd, data, n);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIo, "write failed for " + p.string() + ": " + std::strerror(errno));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

WriteFaultHook current_hook() {
  std::lock_guard lock(g_hook_mutex);
  return g_hook;
}

}  // namespace

void set_write_fault_hook(WriteFaultHook hook) {
  std::lock_guard lock(g_hook_mutex);
  g_hook = std::move(hook);
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  const auto temp = path.parent_path() /
                    ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()) + "." +
                     std::to_string(g_temp_counter.fetch_add(1)));
  const int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::kIo, "cannot create " + temp.string() + ": " + std::strerror(errno));
  }
  try {
    const std::size_t half = bytes.size() / 2;
    write_all(fd, bytes.data(), half, temp);
    if (auto hook = current_hook()) hook(temp);
    write_all(fd, bytes.data() + half, bytes.size() - half, temp);
    if (::fsync(fd) != 0) {
      throw Error(ErrorCode::kIo, "fsync failed for " + temp.string());
    }
  } catch (...) {
    ::close(fd);
    std::error_code ec;
    std::filesystem::remove(temp, ec);
    throw;
  }
  ::close(fd);
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into " + path.string());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span<const std::uint8_t>(
                              reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace vpfix::io
