#include "ocdc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>

#include "ocdc/annotations.hpp"
#include "ocdc/image_io.hpp"
#include "ocdc/rng.hpp"

namespace ocdc {
namespace fs = std::filesystem;

namespace {

constexpr std::int64_t kTrainHeight = 600;
constexpr std::int64_t kTrainMaxWidth = 1000;

// round(num / den), half away from zero, for num >= 0 and den > 0.
std::int64_t round_div(std::int64_t num, std::int64_t den) { return (2 * num + den) / (2 * den); }

void sort_by_id(std::vector<std::shared_ptr<const ImageRecord>>& items) {
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a->image_id < b->image_id; });
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
    std::swap(v[i - 1], v[j]);
  }
}

std::int64_t parse_positive(const std::string& text, const std::string& whole) {
  std::int64_t v = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || v <= 0) {
    throw std::invalid_argument("invalid fraction \"" + whole + "\"");
  }
  return v;
}

std::size_t permuted_index(std::size_t n, std::uint64_t seed, Domain domain, std::size_t pass,
                           std::size_t offset, std::vector<std::size_t>& cache,
                           std::size_t& cached_pass) {
  if (cached_pass != pass || cache.size() != n) {
    cache.resize(n);
    std::iota(cache.begin(), cache.end(), std::size_t{0});
    Rng rng(hash64(seed, {static_cast<std::uint64_t>(domain), pass}));
    shuffle(cache, rng);
    cached_pass = pass;
  }
  return cache[offset];
}

}  // namespace

const char* to_string(Domain d) { return d == Domain::Source ? "source" : "target"; }

Domain parse_domain(const std::string& s) {
  if (s == "source") return Domain::Source;
  if (s == "target") return Domain::Target;
  throw std::invalid_argument("unknown domain \"" + s + "\" (expected source or target)");
}

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  Rational r;
  if (slash == std::string::npos) {
    r.num = parse_positive(text, text);
    r.den = 1;
  } else {
    r.num = parse_positive(text.substr(0, slash), text);
    r.den = parse_positive(text.substr(slash + 1), text);
  }
  if (r.num > r.den) {
    throw std::invalid_argument("fraction \"" + text + "\" exceeds 1");
  }
  const auto g = std::gcd(r.num, r.den);
  return {r.num / g, r.den / g};
}

std::string to_string(const Rational& r) {
  if (r.den == 1) return std::to_string(r.num);
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

bool is_standard_fraction(const Rational& r) {
  return r.num == 1 && r.den >= 1 && r.den <= 64 && (r.den & (r.den - 1)) == 0;
}

Dataset load_annotations(const fs::path& images_dir, const fs::path& annotations_file,
                         Domain domain) {
  std::ifstream in(annotations_file);
  if (!in) {
    throw IngestError("annotation file not found: " + annotations_file.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IngestError(annotations_file.string() + ": malformed JSON: " + e.what());
  }

  // Records without a domain field inherit the requested one.
  if (doc.is_object() && doc.contains("images") && doc["images"].is_array()) {
    for (auto& entry : doc["images"]) {
      if (entry.is_object() && !entry.contains("domain")) {
        entry["domain"] = to_string(domain);
      }
    }
  }

  AnnotationDocument parsed;
  try {
    parsed = parse_annotation_document(doc);
  } catch (const IngestError& e) {
    throw IngestError(annotations_file.string() + ": " + e.what());
  }

  Dataset ds;
  ds.domain = domain;
  ds.class_names = std::move(parsed.classes);
  for (auto& rec : parsed.images) {
    if (rec.domain != domain) {
      throw IngestError(annotations_file.string() + ": image \"" + rec.image_id +
                        "\" is tagged " + to_string(rec.domain) + " but was loaded as " +
                        to_string(domain));
    }
    rec.path = images_dir / rec.file;
    ds.items.push_back(std::make_shared<const ImageRecord>(std::move(rec)));
  }
  sort_by_id(ds.items);
  return ds;
}

void unify_classes(Dataset& a, Dataset& b) {
  std::vector<std::string> merged = a.class_names;
  std::vector<int> remap_b;
  for (const auto& name : b.class_names) {
    auto it = std::find(merged.begin(), merged.end(), name);
    if (it == merged.end()) {
      merged.push_back(name);
      it = merged.end() - 1;
    }
    remap_b.push_back(static_cast<int>(it - merged.begin()));
  }
  bool identity = true;
  for (std::size_t i = 0; i < remap_b.size(); ++i) {
    identity = identity && remap_b[i] == static_cast<int>(i);
  }
  if (!identity) {
    for (auto& item : b.items) {
      auto copy = std::make_shared<ImageRecord>(*item);
      for (auto& box : copy->boxes) {
        box.class_id = remap_b.at(static_cast<std::size_t>(box.class_id));
      }
      item = std::move(copy);
    }
  }
  a.class_names = merged;
  b.class_names = std::move(merged);
}

AnnotatedImage materialize(const ImageRecord& record) {
  AnnotatedImage out;
  out.image_id = record.image_id;
  out.pixels = read_image(record.path);
  if (out.pixels.size() != record.size) {
    throw IngestError("image \"" + record.image_id + "\": decoded size " +
                      std::to_string(out.pixels.width()) + "x" +
                      std::to_string(out.pixels.height()) + " differs from annotated " +
                      std::to_string(record.size.width) + "x" +
                      std::to_string(record.size.height));
  }
  out.boxes = record.boxes;
  out.domain = record.domain;
  return out;
}

ImageSize training_size(ImageSize in) {
  const std::int64_t w = in.width;
  const std::int64_t h = in.height;
  if (w * kTrainHeight <= kTrainMaxWidth * h) {
    return {static_cast<int>(std::max<std::int64_t>(1, round_div(w * kTrainHeight, h))),
            static_cast<int>(kTrainHeight)};
  }
  return {static_cast<int>(kTrainMaxWidth),
          static_cast<int>(std::max<std::int64_t>(1, round_div(h * kTrainMaxWidth, w)))};
}

BBox scale_box(const BBox& b, ImageSize from, ImageSize to) {
  auto sx = [&](int v) { return static_cast<int>(round_div(std::int64_t{v} * to.width, from.width)); };
  auto sy = [&](int v) { return static_cast<int>(round_div(std::int64_t{v} * to.height, from.height)); };
  BBox out = b;
  out.x = std::min(sx(b.x), to.width - 1);
  out.y = std::min(sy(b.y), to.height - 1);
  out.w = std::clamp(sx(b.w), 1, to.width - out.x);
  out.h = std::clamp(sy(b.h), 1, to.height - out.y);
  return out;
}

AnnotatedImage resize_to_training(const AnnotatedImage& item) {
  const ImageSize from = item.pixels.size();
  const ImageSize to = training_size(from);
  if (to == from) {
    return item;
  }
  AnnotatedImage out;
  out.image_id = item.image_id;
  out.domain = item.domain;
  out.pixels = resize_bilinear(item.pixels, to.width, to.height);
  out.boxes.reserve(item.boxes.size());
  for (const auto& b : item.boxes) {
    out.boxes.push_back(scale_box(b, from, to));
  }
  return out;
}

Dataset subsample(const Dataset& dataset, const Rational& fraction, std::uint64_t seed) {
  if (fraction.num <= 0 || fraction.den <= 0 || fraction.num > fraction.den) {
    throw std::invalid_argument("subsample: fraction must lie in (0, 1]");
  }
  if (fraction.num == fraction.den) {
    return dataset;
  }
  const auto n = static_cast<std::int64_t>(dataset.size());
  const auto keep = static_cast<std::size_t>(n * fraction.num / fraction.den);
  if (keep == 0) {
    throw IngestError("fraction too small for dataset: " + to_string(fraction) + " of " +
                      std::to_string(n) + " items selects none");
  }
  auto order = dataset.items;
  Rng rng(hash64(seed, {0x5355425341ULL}));
  shuffle(order, rng);
  order.resize(keep);
  sort_by_id(order);

  Dataset out;
  out.domain = dataset.domain;
  out.class_names = dataset.class_names;
  out.items = std::move(order);
  return out;
}

std::vector<BatchPair> pair_batches(const Dataset& source, const Dataset& target,
                                    std::size_t epoch_length, std::uint64_t seed) {
  if (source.empty() || target.empty()) {
    throw IngestError("pair_batches: both datasets must be non-empty");
  }
  std::vector<BatchPair> out;
  out.reserve(epoch_length);
  std::vector<std::size_t> src_perm, tgt_perm;
  std::size_t src_pass = static_cast<std::size_t>(-1);
  std::size_t tgt_pass = static_cast<std::size_t>(-1);
  const std::size_t ns = source.size();
  const std::size_t nt = target.size();
  for (std::size_t i = 0; i < epoch_length; ++i) {
    BatchPair p;
    p.iteration_index = i;
    p.source_index = permuted_index(ns, seed, Domain::Source, i / ns, i % ns, src_perm, src_pass);
    p.target_index = permuted_index(nt, seed, Domain::Target, i / nt, i % nt, tgt_perm, tgt_pass);
    out.push_back(p);
  }
  return out;
}

BatchSample make_sample(const Dataset& source, const Dataset& target, const BatchPair& pair) {
  return {materialize(*source.items.at(pair.source_index)),
          materialize(*target.items.at(pair.target_index)), pair.iteration_index};
}

}  // namespace ocdc
