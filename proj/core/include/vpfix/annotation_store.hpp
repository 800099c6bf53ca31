#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "vpfix/annotation.hpp"
#include "vpfix/image_io.hpp"
#include "vpfix/vp_detection.hpp"

namespace vpfix {

struct StoreConfig {
  std::filesystem::path images_dir;
  std::filesystem::path store_dir;
  RansacConfig ransac;
  /// Stroke width of desired outlines in condition images.
  int condition_line_width = 3;
  /// Source of updated_at timestamps; the system clock when empty.
  std::function<std::chrono::system_clock::time_point()> clock;
};

struct ImageEntry {
  std::string image_id;
  std::filesystem::path file;
  io::ImageSize size;
  bool annotated = false;
};

struct ManifestEntry {
  std::string image_id;
  std::string file;
  std::string annotation_file;
  std::string mask_file;
  std::string cond_file;
};

struct DatasetManifest {
  std::string name;
  std::vector<ManifestEntry> images;
  std::string created_at;
};

Json to_json(const DatasetManifest& manifest);

/// UTC ISO-8601 with microseconds, e.g. 2024-05-01T12:00:00.000000Z.
std::string format_timestamp(std::chrono::system_clock::time_point t);

/// Flat-file store: one `<id>.annotation.json` per image under store_dir, exports under
/// store_dir/exports/<name>/. Reads are unrestricted; writes are serialized per image.
class AnnotationStore {
 public:
  /// Throws StoreUnavailable when either directory is missing and cannot be created.
  explicit AnnotationStore(StoreConfig config);

  const StoreConfig& config() const { return config_; }

  /// Images with a png/jpg/jpeg extension, sorted by id (the file stem).
  std::vector<ImageEntry> list_images() const;

  /// Throws NotFound.
  ImageEntry image(const std::string& image_id) const;

  /// Cached per (image, RANSAC fingerprint).
  std::shared_ptr<const std::vector<VpCandidate>> vp_candidates(const std::string& image_id);

  std::optional<AnnotationRecord> get_annotation(const std::string& image_id) const;

  /// Full replacement. `if_match` must equal the stored updated_at when a record exists
  /// (PreconditionRequired when absent, Conflict when stale) and must be empty otherwise.
  AnnotationRecord put_annotation(const std::string& image_id, const Json& body,
                                  const std::optional<std::string>& if_match);

  /// Throw NotFound or IncompleteAnnotation.
  MaskResult mask(const std::string& image_id) const;
  std::vector<std::uint8_t> mask_png(const std::string& image_id) const;
  std::vector<std::uint8_t> condition_png(const std::string& image_id) const;

  /// Rebuilds store_dir/exports/<name>/ from scratch. Throws IncompleteAnnotation with
  /// one detail per offending id.
  DatasetManifest export_dataset(const std::string& name, const std::vector<std::string>& ids);

  std::filesystem::path annotation_path(const std::string& image_id) const;
  std::filesystem::path export_dir(const std::string& name) const;

 private:
  AnnotationRecord require_complete(const std::string& image_id) const;
  std::mutex& write_lock(const std::string& image_id);
  std::string next_timestamp();

  StoreConfig config_;

  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> write_locks_;

  std::shared_mutex cache_mutex_;
  std::map<std::pair<std::string, std::string>, std::shared_ptr<const std::vector<VpCandidate>>>
      candidate_cache_;

  std::mutex clock_mutex_;
  std::chrono::system_clock::time_point last_stamp_{};

  std::mutex export_mutex_;
};

/// Ids are restricted to [A-Za-z0-9._-] without a leading dot.
bool is_safe_id(const std::string& id);

}  // namespace vpfix
