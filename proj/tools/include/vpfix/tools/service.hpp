#pragma once

#include <memory>
#include <string>

#include "vpfix/annotation_store.hpp"
#include "vpfix/error.hpp"

namespace vpfix::tools {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  /// 0 picks a free port.
  int port = 8080;
  StoreConfig store;
};

/// JSON API over an AnnotationStore:
///   GET  /api/health
///   GET  /api/images
///   GET  /api/images/{id}/file
///   GET  /api/images/{id}/vp-candidates
///   GET  /api/images/{id}/annotation
///   PUT  /api/images/{id}/annotation     (If-Match: <updated_at> once a record exists)
///   GET  /api/images/{id}/mask.png
///   GET  /api/images/{id}/condition.png
///   POST /api/export                     {name, image_ids}
/// Errors are {error: {code, message, details}}.
class AnnotationService {
 public:
  explicit AnnotationService(ServiceOptions options);
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  /// Binds the listening socket and returns the port. Throws Io on failure.
  int bind();
  /// Serves until stop(); call bind() first.
  void serve();
  /// Safe from any thread. In-flight requests finish before serve() returns.
  void stop();

  AnnotationStore& store();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// {error: {code, message, details}} for an exception.
Json error_json(const std::exception& e);

/// HTTP status for an error code.
int http_status(ErrorCode code);

}  // namespace vpfix::tools
