#include "vpfix/annotation_store.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>
#include <set>

#include "vpfix/atomic_file.hpp"
#include "vpfix/dataset_pipeline.hpp"
#include "vpfix/error.hpp"

namespace vpfix {
namespace fs = std::filesystem;

namespace {

bool allowed_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<std::uint8_t> json_bytes(const Json& j) {
  const std::string text = j.dump(2) + "\n";
  return {text.begin(), text.end()};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kStoreUnavailable, "cannot use directory " + dir.string());
  }
}

}  // namespace

bool is_safe_id(const std::string& id) {
  if (id.empty() || id.front() == '.' || id.size() > 200) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '.' || c == '_' || c == '-';
  });
}

std::string format_timestamp(std::chrono::system_clock::time_point t) {
  using namespace std::chrono;
  const auto us = duration_cast<microseconds>(t.time_since_epoch()).count();
  std::time_t secs = static_cast<std::time_t>(us / 1'000'000);
  long frac = static_cast<long>(us % 1'000'000);
  if (frac < 0) {
    frac += 1'000'000;
    --secs;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%06ldZ", buf, frac);
  return out;
}

Json to_json(const DatasetManifest& m) {
  Json images = Json::array();
  for (const auto& e : m.images) {
    images.push_back({{"image_id", e.image_id},
                      {"file", e.file},
                      {"annotation_file", e.annotation_file},
                      {"mask_file", e.mask_file},
                      {"cond_file", e.cond_file},
                      {"depth_file", nullptr}});
  }
  return {{"name", m.name}, {"images", images}, {"created_at", m.created_at}};
}

AnnotationStore::AnnotationStore(StoreConfig config) : config_(std::move(config)) {
  config_.ransac.validate();
  if (config_.condition_line_width < 1) {
    throw Error(ErrorCode::kInvalidArgument, "condition line width must be >= 1");
  }
  if (!fs::is_directory(config_.images_dir)) {
    throw Error(ErrorCode::kStoreUnavailable,
                "image directory does not exist: " + config_.images_dir.string());
  }
  ensure_dir(config_.store_dir);
}

std::vector<ImageEntry> AnnotationStore::list_images() const {
  std::error_code ec;
  fs::directory_iterator it(config_.images_dir, ec);
  if (ec) throw Error(ErrorCode::kStoreUnavailable, "cannot list " + config_.images_dir.string());

  std::vector<fs::path> files;
  for (const auto& entry : it) {
    if (entry.is_regular_file() && allowed_extension(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<ImageEntry> out;
  std::set<std::string> seen;
  for (const auto& f : files) {
    std::string id = f.stem().string();
    // a.jpg and a.png share an id; the first in filename order wins.
    if (!is_safe_id(id) || !seen.insert(id).second) continue;
    ImageEntry e{id, f, {}, false};
    try {
      e.size = io::read_size(f);
    } catch (const Error&) {
      continue;
    }
    try {
      const auto rec = get_annotation(id);
      e.annotated = rec && rec->complete();
    } catch (const Error&) {
      e.annotated = false;
    }
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(),
            [](const ImageEntry& a, const ImageEntry& b) { return a.image_id < b.image_id; });
  return out;
}

ImageEntry AnnotationStore::image(const std::string& image_id) const {
  std::optional<fs::path> best;
  if (is_safe_id(image_id)) {
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(config_.images_dir, ec)) {
      const auto& p = entry.path();
      if (entry.is_regular_file() && allowed_extension(p) && p.stem().string() == image_id &&
          (!best || p < *best)) {
        best = p;
      }
    }
  }
  if (best) {
    try {
      ImageEntry e{image_id, *best, io::read_size(*best), false};
      const auto rec = get_annotation(image_id);
      e.annotated = rec && rec->complete();
      return e;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kFormat) throw;
    }
  }
  throw Error(ErrorCode::kNotFound, "no image with id '" + image_id + "'",
              {{"image_id", image_id}});
}

std::shared_ptr<const std::vector<VpCandidate>> AnnotationStore::vp_candidates(
    const std::string& image_id) {
  const ImageEntry entry = image(image_id);
  const auto key = std::make_pair(image_id, config_.ransac.fingerprint());
  {
    std::shared_lock lock(cache_mutex_);
    if (auto it = candidate_cache_.find(key); it != candidate_cache_.end()) return it->second;
  }
  auto computed = std::make_shared<const std::vector<VpCandidate>>(
      detect_vps_in_image(io::read_gray(entry.file), config_.ransac));
  std::unique_lock lock(cache_mutex_);
  // Another thread may have filled the slot; both results are identical.
  auto [it, inserted] = candidate_cache_.emplace(key, computed);
  return it->second;
}

fs::path AnnotationStore::annotation_path(const std::string& image_id) const {
  return config_.store_dir / (image_id + ".annotation.json");
}

fs::path AnnotationStore::export_dir(const std::string& name) const {
  return config_.store_dir / "exports" / name;
}

std::optional<AnnotationRecord> AnnotationStore::get_annotation(const std::string& image_id) const {
  if (!is_safe_id(image_id)) return std::nullopt;
  const fs::path p = annotation_path(image_id);
  if (!fs::exists(p)) return std::nullopt;
  return annotation_from_json(read_json_file(p));
}

std::mutex& AnnotationStore::write_lock(const std::string& image_id) {
  std::lock_guard guard(locks_mutex_);
  auto& slot = write_locks_[image_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::string AnnotationStore::next_timestamp() {
  std::lock_guard guard(clock_mutex_);
  auto now = config_.clock ? config_.clock() : std::chrono::system_clock::now();
  now = std::chrono::time_point_cast<std::chrono::microseconds>(now);
  if (now <= last_stamp_) now = last_stamp_ + std::chrono::microseconds(1);
  last_stamp_ = now;
  return format_timestamp(now);
}

AnnotationRecord AnnotationStore::put_annotation(const std::string& image_id, const Json& body,
                                                 const std::optional<std::string>& if_match) {
  const ImageEntry entry = image(image_id);
  AnnotationRecord rec = annotation_from_json(body);

  std::vector<ErrorDetail> issues;
  if (rec.image_id != image_id) issues.push_back({"image_id", "does not match the URL id"});
  if (rec.width != entry.size.width || rec.height != entry.size.height) {
    issues.push_back({"image_size", "must be [" + std::to_string(entry.size.width) + ", " +
                                        std::to_string(entry.size.height) + "]"});
  }
  if (!issues.empty()) {
    throw Error(ErrorCode::kValidationFailed, "annotation record is invalid: " +
                                                  issues.front().field + ": " +
                                                  issues.front().message,
                issues);
  }
  try {
    rec.mask_coverage = build_mask(rec.pairs, rec.width, rec.height, rec.dilation_px).coverage;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateRegion) throw;
    throw Error(ErrorCode::kValidationFailed, "every outline pair encloses a degenerate region",
                {{"pairs", e.what()}});
  }

  std::lock_guard guard(write_lock(image_id));
  const auto existing = get_annotation(image_id);
  if (existing) {
    if (!if_match) {
      throw Error(ErrorCode::kPreconditionRequired,
                  "record exists; send its updated_at as the precondition");
    }
    if (*if_match != existing->updated_at) {
      throw Error(ErrorCode::kConflict, "record was modified by another writer",
                  {{"updated_at", existing->updated_at}});
    }
  } else if (if_match && !if_match->empty()) {
    throw Error(ErrorCode::kConflict, "record does not exist", {{"updated_at", ""}});
  }

  rec.updated_at = next_timestamp();
  rec.created_at = existing ? existing->created_at : rec.updated_at;
  io::write_file_atomic(annotation_path(image_id), json_bytes(to_json(rec)));
  return rec;
}

AnnotationRecord AnnotationStore::require_complete(const std::string& image_id) const {
  image(image_id);
  auto rec = get_annotation(image_id);
  if (!rec || !rec->complete()) {
    throw Error(ErrorCode::kIncompleteAnnotation, "image '" + image_id + "' is not annotated",
                {{image_id, rec ? "no outline pairs" : "no annotation"}});
  }
  return *rec;
}

MaskResult AnnotationStore::mask(const std::string& image_id) const {
  const auto rec = require_complete(image_id);
  return build_mask(rec.pairs, rec.width, rec.height, rec.dilation_px);
}

std::vector<std::uint8_t> AnnotationStore::mask_png(const std::string& image_id) const {
  return io::encode_png(mask(image_id).mask);
}

std::vector<std::uint8_t> AnnotationStore::condition_png(const std::string& image_id) const {
  const auto rec = require_complete(image_id);
  std::vector<OutlineEdge> edges;
  for (const auto& p : rec.pairs) edges.push_back({p.desired, 0, 0.0});
  return io::encode_png(
      render_condition(edges, rec.width, rec.height, config_.condition_line_width));
}

DatasetManifest AnnotationStore::export_dataset(const std::string& name,
                                                const std::vector<std::string>& ids) {
  if (!is_safe_id(name)) {
    throw Error(ErrorCode::kValidationFailed, "invalid export name", {{"name", name}});
  }
  if (ids.empty()) throw Error(ErrorCode::kEmptyInput, "no image ids to export");
  std::set<std::string> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size()) {
    throw Error(ErrorCode::kValidationFailed, "duplicate image ids", {{"image_ids", "duplicates"}});
  }

  std::vector<ImageEntry> entries;
  std::vector<AnnotationRecord> records;
  std::vector<ErrorDetail> incomplete;
  for (const auto& id : ids) {
    entries.push_back(image(id));
    auto rec = get_annotation(id);
    if (!rec || !rec->complete()) {
      incomplete.push_back({id, rec ? "no outline pairs" : "no annotation"});
    } else {
      records.push_back(std::move(*rec));
    }
  }
  if (!incomplete.empty()) {
    std::string msg = "not annotated:";
    for (const auto& d : incomplete) msg += " " + d.field;
    throw Error(ErrorCode::kIncompleteAnnotation, msg, incomplete);
  }

  std::lock_guard guard(export_mutex_);
  const fs::path final_dir = export_dir(name);
  const fs::path staging = config_.store_dir / "exports" / ("." + name + ".staging");
  fs::remove_all(staging);
  for (const char* sub : {"images", "annotations", "masks", "cond"}) {
    ensure_dir(staging / sub);
  }

  DatasetManifest manifest;
  manifest.name = name;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const auto& rec = records[i];
    ManifestEntry m;
    m.image_id = e.image_id;
    m.file = "images/" + e.file.filename().string();
    m.annotation_file = "annotations/" + e.image_id + ".annotation.json";
    m.mask_file = "masks/" + e.image_id + ".mask.png";
    m.cond_file = "cond/" + e.image_id + ".cond.png";

    io::write_file_atomic(staging / m.file, io::read_file(e.file));
    io::write_file_atomic(staging / m.annotation_file, json_bytes(to_json(rec)));
    io::write_file_atomic(staging / m.mask_file,
                          io::encode_png(build_mask(rec.pairs, rec.width, rec.height,
                                                    rec.dilation_px)
                                             .mask));
    std::vector<OutlineEdge> edges;
    for (const auto& p : rec.pairs) edges.push_back({p.desired, 0, 0.0});
    io::write_file_atomic(staging / m.cond_file,
                          io::encode_png(render_condition(edges, rec.width, rec.height,
                                                          config_.condition_line_width)));
    // Latest edit time keeps the manifest identical across re-exports.
    manifest.created_at = std::max(manifest.created_at, rec.updated_at);
    manifest.images.push_back(std::move(m));
  }
  io::write_file_atomic(staging / "manifest.json", json_bytes(to_json(manifest)));

  fs::remove_all(final_dir);
  fs::rename(staging, final_dir);
  return manifest;
}

}  // namespace vpfix
