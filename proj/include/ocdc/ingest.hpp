#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocdc/geometry.hpp"
#include "ocdc/image.hpp"

namespace ocdc {

enum class Domain : std::uint8_t { Source = 0, Target = 1 };

const char* to_string(Domain d);
Domain parse_domain(const std::string& s);
inline Domain opposite(Domain d) { return d == Domain::Source ? Domain::Target : Domain::Source; }

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pixels plus ground truth for one image of one domain.
struct AnnotatedImage {
  std::string image_id;
  Image pixels;
  std::vector<BBox> boxes;
  Domain domain = Domain::Source;
};

/// Annotation entry as read from disk; pixels are decoded by materialize().
struct ImageRecord {
  std::string image_id;
  std::filesystem::path file;  // as written in the annotation file
  std::filesystem::path path;  // file resolved against the images directory
  ImageSize size;
  std::vector<BBox> boxes;
  Domain domain = Domain::Source;
};

/// Items are kept sorted by image_id so that subsampling is reproducible.
struct Dataset {
  std::vector<std::shared_ptr<const ImageRecord>> items;
  Domain domain = Domain::Source;
  std::vector<std::string> class_names;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
};

struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Parses "1" or "p/q" with p, q > 0. Throws std::invalid_argument.
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& r);

/// True for 1, 1/2, 1/4, ..., 1/64.
bool is_standard_fraction(const Rational& r);

/// Reads the annotation JSON, resolving each image's file against
/// images_dir. Every box is checked against the declared image size.
Dataset load_annotations(const std::filesystem::path& images_dir,
                         const std::filesystem::path& annotations_file, Domain domain);

/// Rewrites both datasets to share one class list: a's classes first, then
/// b's classes not already present. Box class ids are remapped accordingly.
void unify_classes(Dataset& a, Dataset& b);

/// Decodes the record's image and checks it against the declared size.
AnnotatedImage materialize(const ImageRecord& record);

/// Output size for the training resolution: height 600, unless that makes
/// the width exceed 1000, in which case width 1000. Aspect ratio preserved.
ImageSize training_size(ImageSize in);

/// Maps a box from an `from`-sized raster to a `to`-sized one.
BBox scale_box(const BBox& b, ImageSize from, ImageSize to);

AnnotatedImage resize_to_training(const AnnotatedImage& item);

/// floor(N * fraction) items drawn by seeded shuffle then prefix-take.
Dataset subsample(const Dataset& dataset, const Rational& fraction, std::uint64_t seed);

/// Index pair for one training iteration (batch size one per domain).
struct BatchPair {
  std::size_t iteration_index = 0;
  std::size_t source_index = 0;
  std::size_t target_index = 0;
};

struct BatchSample {
  AnnotatedImage source_item;
  AnnotatedImage target_item;
  std::size_t iteration_index = 0;
};

/// Each domain is walked in its own shuffled cycle, reshuffled per pass.
/// Pass p of a domain uses the permutation seeded by hash64(seed, domain, p),
/// so any iteration can be computed independently.
std::vector<BatchPair> pair_batches(const Dataset& source, const Dataset& target,
                                    std::size_t epoch_length, std::uint64_t seed);

BatchSample make_sample(const Dataset& source, const Dataset& target, const BatchPair& pair);

}  // namespace ocdc
