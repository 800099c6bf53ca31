#include "vpfix/tools/service.hpp"

#include <httplib.h>

#include "vpfix/error.hpp"
#include "vpfix/version.hpp"

namespace vpfix::tools {

Json error_json(const std::exception& e) {
  Json details = Json::array();
  std::string code = "internal_error";
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    code = std::string(error_code_name(err->code()));
    for (const auto& d : err->details()) {
      details.push_back({{"field", d.field}, {"message", d.message}});
    }
  }
  return {{"error", {{"code", code}, {"message", e.what()}, {"details", details}}}};
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kIncompleteAnnotation: return 409;
    case ErrorCode::kPreconditionRequired: return 428;
    case ErrorCode::kValidationFailed: return 422;
    case ErrorCode::kStoreUnavailable: return 503;
    case ErrorCode::kIo:
    case ErrorCode::kInternal: return 500;
    default: return 400;
  }
}

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  send_json(res, error_json(e), err ? http_status(err->code()) : 500);
}

void send_bytes(httplib::Response& res, const std::vector<std::uint8_t>& bytes,
                const char* type) {
  res.status = 200;
  res.set_content(reinterpret_cast<const char*>(bytes.data()), bytes.size(), type);
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const std::exception& e) {
      send_error(res, e);
    }
  };
}

const char* content_type_for(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".png" ? "image/png" : "image/jpeg";
}

}  // namespace

struct AnnotationService::Impl {
  ServiceOptions options;
  AnnotationStore store;
  httplib::Server server;

  explicit Impl(ServiceOptions o) : options(std::move(o)), store(options.store) { routes(); }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Expose-Headers", "ETag"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type, If-Match");
      res.status = 204;
    });

    server.Get("/api/health", guarded([](const httplib::Request&, httplib::Response& res) {
      send_json(res, {{"status", "ok"}, {"version", kVersion}});
    }));

    server.Get("/api/images", guarded([this](const httplib::Request&, httplib::Response& res) {
      Json list = Json::array();
      for (const auto& e : store.list_images()) {
        list.push_back({{"image_id", e.image_id},
                        {"size", Json::array({e.size.width, e.size.height})},
                        {"annotated", e.annotated}});
      }
      send_json(res, list);
    }));

    server.Get(R"(/api/images/([^/]+)/file)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto entry = store.image(req.matches[1]);
                 send_bytes(res, io::read_file(entry.file), content_type_for(entry.file));
               }));

    server.Get(R"(/api/images/([^/]+)/vp-candidates)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto candidates = store.vp_candidates(req.matches[1]);
                 send_json(res, candidates_to_json(*candidates, store.config().ransac));
               }));

    server.Get(R"(/api/images/([^/]+)/annotation)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 store.image(id);
                 const auto rec = store.get_annotation(id);
                 if (!rec) throw Error(ErrorCode::kNotFound, "no annotation for '" + id + "'");
                 res.set_header("ETag", rec->updated_at);
                 send_json(res, to_json(*rec));
               }));

    server.Put(R"(/api/images/([^/]+)/annotation)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 Json body;
                 try {
                   body = Json::parse(req.body);
                 } catch (const Json::exception& e) {
                   throw Error(ErrorCode::kFormat, std::string("invalid JSON body: ") + e.what());
                 }
                 std::optional<std::string> if_match;
                 if (req.has_header("If-Match")) if_match = req.get_header_value("If-Match");
                 const auto rec = store.put_annotation(req.matches[1], body, if_match);
                 res.set_header("ETag", rec.updated_at);
                 send_json(res, to_json(rec));
               }));

    server.Get(R"(/api/images/([^/]+)/mask\.png)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_bytes(res, store.mask_png(req.matches[1]), "image/png");
               }));

    server.Get(R"(/api/images/([^/]+)/condition\.png)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_bytes(res, store.condition_png(req.matches[1]), "image/png");
               }));

    server.Post("/api/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::kFormat, std::string("invalid JSON body: ") + e.what());
      }
      if (!body.is_object() || !body.contains("name") || !body["name"].is_string() ||
          !body.contains("image_ids") || !body["image_ids"].is_array()) {
        throw Error(ErrorCode::kValidationFailed, "body must be {name, image_ids}",
                    {{"$", "expected {name: string, image_ids: [string]}"}});
      }
      std::vector<std::string> ids;
      for (const auto& id : body["image_ids"]) {
        if (!id.is_string()) {
          throw Error(ErrorCode::kValidationFailed, "image_ids must be strings",
                      {{"image_ids", "non-string entry"}});
        }
        ids.push_back(id.get<std::string>());
      }
      const auto manifest = store.export_dataset(body["name"].get<std::string>(), ids);
      Json out = to_json(manifest);
      out["export_dir"] = store.export_dir(manifest.name).string();
      send_json(res, out);
    }));

    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            send_error(res, e);
          } catch (...) {
            send_json(res, error_json(Error(ErrorCode::kInternal, "unknown error")), 500);
          }
        });
  }
};

AnnotationService::AnnotationService(ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {}

AnnotationService::~AnnotationService() = default;

int AnnotationService::bind() {
  const auto& o = impl_->options;
  int port = o.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(o.host);
  } else if (!impl_->server.bind_to_port(o.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw Error(ErrorCode::kIo, "cannot listen on " + o.host + ":" + std::to_string(o.port));
  }
  return port;
}

void AnnotationService::serve() { impl_->server.listen_after_bind(); }

void AnnotationService::stop() { impl_->server.stop(); }

AnnotationStore& AnnotationService::store() { return impl_->store; }

}  // namespace vpfix::tools
