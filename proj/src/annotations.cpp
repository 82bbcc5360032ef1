#include "ocdc/annotations.hpp"

#include <algorithm>
#include <set>
#include <type_traits>

namespace ocdc {
namespace {

using nlohmann::json;

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw IngestError(where + ": missing field \"" + key + "\"");
  }
  if constexpr (std::is_same_v<T, int>) {
    if (!obj.at(key).is_number_integer()) {
      throw IngestError(where + ": field \"" + key + "\" must be an integer");
    }
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw IngestError(where + ": field \"" + key + "\" has the wrong type");
  }
}

}  // namespace

AnnotationDocument parse_annotation_document(const json& doc) {
  if (!doc.is_object()) {
    throw IngestError("annotation document must be a JSON object");
  }
  AnnotationDocument out;
  out.classes = required<std::vector<std::string>>(doc, "classes", "annotations");
  const auto images = required<json>(doc, "images", "annotations");
  if (!images.is_array()) {
    throw IngestError("annotations: \"images\" must be an array");
  }

  std::set<std::string> seen;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const json& entry = images[i];
    const std::string where_img = "image #" + std::to_string(i);
    ImageRecord rec;
    rec.image_id = required<std::string>(entry, "id", where_img);
    const std::string where = "image \"" + rec.image_id + "\"";
    if (!seen.insert(rec.image_id).second) {
      throw IngestError(where + ": duplicate image id");
    }
    rec.file = required<std::string>(entry, "file", where);
    rec.size.width = required<int>(entry, "width", where);
    rec.size.height = required<int>(entry, "height", where);
    if (rec.size.width < 1 || rec.size.height < 1) {
      throw IngestError(where + ": width and height must be positive");
    }
    if (entry.contains("domain")) {
      try {
        rec.domain = parse_domain(required<std::string>(entry, "domain", where));
      } catch (const std::invalid_argument& e) {
        throw IngestError(where + ": " + e.what());
      }
    }
    const json boxes = entry.contains("boxes") ? entry.at("boxes") : json::array();
    if (!boxes.is_array()) {
      throw IngestError(where + ": \"boxes\" must be an array");
    }
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      const std::string where_box = where + " box " + std::to_string(b);
      BBox box;
      box.x = required<int>(boxes[b], "x", where_box);
      box.y = required<int>(boxes[b], "y", where_box);
      box.w = required<int>(boxes[b], "w", where_box);
      box.h = required<int>(boxes[b], "h", where_box);
      const auto cls = required<std::string>(boxes[b], "class", where_box);
      const auto it = std::find(out.classes.begin(), out.classes.end(), cls);
      if (it == out.classes.end()) {
        throw IngestError(where_box + ": unknown class \"" + cls + "\"");
      }
      box.class_id = static_cast<int>(it - out.classes.begin());
      if (!has_positive_extent(box)) {
        throw IngestError(where_box + ": box has non-positive width or height");
      }
      if (!fits_inside(box, rec.size)) {
        throw IngestError(where_box + ": box exceeds image bounds");
      }
      rec.boxes.push_back(box);
    }
    out.images.push_back(std::move(rec));
  }
  return out;
}

json to_json(const AnnotationDocument& doc) {
  json images = json::array();
  for (const auto& rec : doc.images) {
    json boxes = json::array();
    for (const auto& b : rec.boxes) {
      const auto cls = static_cast<std::size_t>(b.class_id);
      if (cls >= doc.classes.size()) {
        throw IngestError("image \"" + rec.image_id + "\": class index out of range");
      }
      boxes.push_back({{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}, {"class", doc.classes[cls]}});
    }
    images.push_back({{"id", rec.image_id},
                      {"file", rec.file.generic_string()},
                      {"width", rec.size.width},
                      {"height", rec.size.height},
                      {"domain", to_string(rec.domain)},
                      {"boxes", std::move(boxes)}});
  }
  return {{"images", std::move(images)}, {"classes", doc.classes}};
}

}  // namespace ocdc
