#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ocdc/ingest.hpp"

namespace ocdc {

/// In-memory form of the annotation file:
///   {"images":[{"id","file","width","height","domain",
///               "boxes":[{"x","y","w","h","class"}]}],
///    "classes":[...]}
/// Box classes are stored by name in the file and by index in memory.
struct AnnotationDocument {
  std::vector<std::string> classes;
  std::vector<ImageRecord> images;
};

/// Throws IngestError naming the image id and box index on any violation.
AnnotationDocument parse_annotation_document(const nlohmann::json& doc);

nlohmann::json to_json(const AnnotationDocument& doc);

}  // namespace ocdc
