#include "vpfix/annotation.hpp"

#include <cmath>

#include "vpfix/error.hpp"

namespace vpfix {
namespace {

class Issues {
 public:
  void add(std::string field, std::string message) {
    list_.push_back({std::move(field), std::move(message)});
  }
  bool empty() const { return list_.empty(); }
  void raise_if_any() {
    if (list_.empty()) return;
    std::string msg = "annotation record is invalid: " + list_.front().field + ": " +
                      list_.front().message;
    if (list_.size() > 1) msg += " (+" + std::to_string(list_.size() - 1) + " more)";
    throw Error(ErrorCode::kValidationFailed, msg, std::move(list_));
  }

 private:
  std::vector<ErrorDetail> list_;
};

bool finite_number(const Json& j) { return j.is_number() && std::isfinite(j.get<double>()); }

std::optional<Point2> parse_point(const Json& j, const std::string& field, Issues& issues) {
  if (!j.is_array() || j.size() != 2 || !finite_number(j[0]) || !finite_number(j[1])) {
    issues.add(field, "must be [x, y] with finite numbers");
    return std::nullopt;
  }
  return Point2{j[0].get<double>(), j[1].get<double>()};
}

std::optional<LineSegment> parse_segment(const Json& j, const std::string& field,
                                         Issues& issues) {
  if (!j.is_array() || j.size() != 2) {
    issues.add(field, "must be [[x, y], [x, y]]");
    return std::nullopt;
  }
  const auto a = parse_point(j[0], field + "[0]", issues);
  const auto b = parse_point(j[1], field + "[1]", issues);
  if (!a || !b) return std::nullopt;
  if (*a == *b) {
    issues.add(field, "endpoints coincide");
    return std::nullopt;
  }
  return LineSegment(*a, *b);
}

Json segment_json(const LineSegment& s) { return Json::array({to_json(s.p0()), to_json(s.p1())}); }

// Segments may extend past the image by half its size on every side.
bool within_bounds(Point2 p, int width, int height) {
  return p.x >= -0.5 * width && p.x <= 1.5 * width && p.y >= -0.5 * height &&
         p.y <= 1.5 * height;
}

void check_record(const AnnotationRecord& r, Issues& issues) {
  if (r.schema_version != kAnnotationSchemaVersion) {
    issues.add("schema_version", "must be " + std::to_string(kAnnotationSchemaVersion));
  }
  if (r.image_id.empty()) issues.add("image_id", "must be a non-empty string");
  if (r.width <= 0 || r.height <= 0) issues.add("image_size", "must be positive");
  if (r.dilation_px < 0 || r.dilation_px > kMaxDilationPx) {
    issues.add("dilation_px", "must be in [0, " + std::to_string(kMaxDilationPx) + "]");
  }
  if (r.pairs.empty()) issues.add("pairs", "at least one outline pair is required");
  if (r.width <= 0 || r.height <= 0) return;
  for (std::size_t i = 0; i < r.pairs.size(); ++i) {
    const auto& p = r.pairs[i];
    const std::string base = "pairs[" + std::to_string(i) + "]";
    for (const auto& [name, seg] : {std::pair{"original", &p.original},
                                    std::pair{"desired", &p.desired}}) {
      if (!within_bounds(seg->p0(), r.width, r.height) ||
          !within_bounds(seg->p1(), r.width, r.height)) {
        issues.add(base + "." + name, "endpoint outside the 2x image bounding box");
      }
    }
    try {
      p.validate();
    } catch (const Error& e) {
      issues.add(base, e.what());
    }
  }
}

}  // namespace

AnnotationRecord annotation_from_json(const Json& j) {
  Issues issues;
  if (!j.is_object()) {
    issues.add("$", "record must be a JSON object");
    issues.raise_if_any();
  }
  AnnotationRecord r;

  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    issues.add("schema_version", "required integer");
  } else {
    r.schema_version = j["schema_version"].get<int>();
  }

  if (!j.contains("image_id") || !j["image_id"].is_string()) {
    issues.add("image_id", "required string");
  } else {
    r.image_id = j["image_id"].get<std::string>();
  }

  const Json* size = j.contains("image_size") ? &j["image_size"] : nullptr;
  if (!size || !size->is_array() || size->size() != 2 || !(*size)[0].is_number_integer() ||
      !(*size)[1].is_number_integer()) {
    issues.add("image_size", "required [width, height] integers");
  } else {
    r.width = (*size)[0].get<int>();
    r.height = (*size)[1].get<int>();
  }

  const Json* vp = j.contains("target_vp") ? &j["target_vp"] : nullptr;
  if (!vp || !vp->is_array() || vp->size() != 3 || !finite_number((*vp)[0]) ||
      !finite_number((*vp)[1]) || !finite_number((*vp)[2])) {
    issues.add("target_vp", "required [x, y, w] with finite numbers");
  } else if ((*vp)[0].get<double>() == 0.0 && (*vp)[1].get<double>() == 0.0 &&
             (*vp)[2].get<double>() == 0.0) {
    issues.add("target_vp", "must not be all zeros");
  } else {
    r.target_vp = {(*vp)[0].get<double>(), (*vp)[1].get<double>(), (*vp)[2].get<double>()};
  }

  if (j.contains("dilation_px")) {
    if (!j["dilation_px"].is_number_integer()) {
      issues.add("dilation_px", "must be an integer");
    } else {
      r.dilation_px = j["dilation_px"].get<int>();
    }
  }

  if (j.contains("prompt")) {
    if (!j["prompt"].is_string()) {
      issues.add("prompt", "must be a string");
    } else {
      r.prompt = j["prompt"].get<std::string>();
    }
  }

  for (const char* key : {"created_at", "updated_at"}) {
    if (!j.contains(key) || j[key].is_null()) continue;
    if (!j[key].is_string()) {
      issues.add(key, "must be an ISO-8601 string");
    } else {
      (key[0] == 'c' ? r.created_at : r.updated_at) = j[key].get<std::string>();
    }
  }
  if (j.contains("mask_coverage") && finite_number(j["mask_coverage"])) {
    r.mask_coverage = j["mask_coverage"].get<double>();
  }

  bool pairs_parsed = true;
  if (!j.contains("pairs") || !j["pairs"].is_array()) {
    issues.add("pairs", "required array");
    pairs_parsed = false;
  } else {
    const Json& pairs = j["pairs"];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const std::string base = "pairs[" + std::to_string(i) + "]";
      if (!pairs[i].is_object() || !pairs[i].contains("original") ||
          !pairs[i].contains("desired")) {
        issues.add(base, "must be {original, desired}");
        pairs_parsed = false;
        continue;
      }
      const auto o = parse_segment(pairs[i]["original"], base + ".original", issues);
      const auto d = parse_segment(pairs[i]["desired"], base + ".desired", issues);
      if (o && d) {
        r.pairs.push_back({*o, *d});
      } else {
        pairs_parsed = false;
      }
    }
  }

  if (pairs_parsed) check_record(r, issues);
  issues.raise_if_any();
  return r;
}

void validate_annotation(const AnnotationRecord& record) {
  Issues issues;
  check_record(record, issues);
  issues.raise_if_any();
}

Json to_json(const AnnotationRecord& r) {
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"original", segment_json(p.original)}, {"desired", segment_json(p.desired)}});
  }
  Json j = {{"schema_version", r.schema_version},
            {"image_id", r.image_id},
            {"image_size", Json::array({r.width, r.height})},
            {"target_vp", to_json(r.target_vp)},
            {"pairs", pairs},
            {"dilation_px", r.dilation_px},
            {"prompt", r.prompt},
            {"created_at", r.created_at.empty() ? Json(nullptr) : Json(r.created_at)},
            {"updated_at", r.updated_at.empty() ? Json(nullptr) : Json(r.updated_at)}};
  j["mask_coverage"] = r.mask_coverage ? Json(*r.mask_coverage) : Json(nullptr);
  return j;
}

bool same_content(const AnnotationRecord& a, const AnnotationRecord& b) {
  if (a.pairs.size() != b.pairs.size()) return false;
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    if (!(a.pairs[i].original == b.pairs[i].original) ||
        !(a.pairs[i].desired == b.pairs[i].desired)) {
      return false;
    }
  }
  return a.schema_version == b.schema_version && a.image_id == b.image_id &&
         a.width == b.width && a.height == b.height &&
         a.target_vp.components() == b.target_vp.components() &&
         a.dilation_px == b.dilation_px && a.prompt == b.prompt;
}

}  // namespace vpfix
