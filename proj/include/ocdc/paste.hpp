#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocdc/geometry.hpp"
#include "ocdc/ingest.hpp"
#include "ocdc/rng.hpp"

namespace ocdc {

enum class PositionMode { Fixed, Random };
enum class ScalingMode { Fixed, Random };

/// How pasted object crops are placed and filtered.
///
/// Position::Fixed keeps the crop at its source coordinates (optionally
/// jittered by up to `jitter_radius` pixels per axis) and translates it
/// minimally to fit the destination. Position::Random draws the top-left
/// corner uniformly over all legal positions. Scaling::Random draws one
/// factor from [scale_min, scale_max] per attempt and applies it to both
/// sides.
struct PasteStrategy {
  PositionMode position = PositionMode::Fixed;
  ScalingMode scaling = ScalingMode::Fixed;
  double scale_min = 0.7;
  double scale_max = 1.3;
  double gamma = 0.25;
  int max_attempts = 50;
  int min_box_side = 16;
  int jitter_radius = 0;

  /// Throws std::invalid_argument if any field is out of range.
  void validate() const;
};

const char* to_string(PositionMode m);
const char* to_string(ScalingMode m);
PositionMode parse_position_mode(const std::string& s);
ScalingMode parse_scaling_mode(const std::string& s);

enum class PasteDirection : std::uint8_t { TargetIntoSource = 0, SourceIntoTarget = 1 };

const char* to_string(PasteDirection d);
PasteDirection parse_direction(const std::string& s);

/// Domain whose content a record carries.
inline Domain origin_domain(PasteDirection d) {
  return d == PasteDirection::TargetIntoSource ? Domain::Target : Domain::Source;
}

struct PasteRecord {
  std::string src_image_id;
  BBox src_box;
  BBox dst_rect;  // carries src_box.class_id
  double scale_factor = 1.0;
  PasteDirection direction = PasteDirection::TargetIntoSource;

  friend bool operator==(const PasteRecord&, const PasteRecord&) = default;
};

enum class SkipReason { TooSmall, TooLarge, AttemptsExhausted };

const char* to_string(SkipReason r);

struct SkippedBox {
  BBox src_box;
  SkipReason reason = SkipReason::TooSmall;

  friend bool operator==(const SkippedBox&, const SkippedBox&) = default;
};

struct PastePlan {
  std::vector<PasteRecord> records;
  std::vector<SkippedBox> skipped;
};

class PasteError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Scaled side length: round-half-away(side * scale), at least 1.
int scaled_side(int side, double scale);

/// Decides which source crops are pasted where in the destination.
///
/// Boxes are visited in order. A box whose original width or height is
/// <= min_box_side is TooSmall; one whose scaled size cannot be strictly
/// smaller than the destination is TooLarge. Otherwise placements are drawn
/// until one covers no protected box (destination ground truth plus every
/// placement accepted earlier in this plan) by more than gamma of that
/// box's area. Fixed/Fixed without jitter gets a single attempt; all other
/// modes get max_attempts before the box is skipped as AttemptsExhausted.
///
/// Per attempt the stream is consumed as: scale (Random scaling), then x, y
/// (Random position) or jitter dx, dy (Fixed position, jitter_radius > 0).
PastePlan plan_pastes(std::span<const BBox> src_boxes, std::span<const BBox> dst_boxes,
                      ImageSize dst_size, const PasteStrategy& strategy, Rng& rng,
                      const std::string& src_image_id = {},
                      PasteDirection direction = PasteDirection::TargetIntoSource);

/// Copies dst and, for each record in order, writes the bilinearly resized
/// src crop into dst_rect and appends dst_rect to the box list.
AnnotatedImage apply_pastes(const AnnotatedImage& dst, const AnnotatedImage& src,
                            const PastePlan& plan);

struct AugmentedPair {
  AnnotatedImage source;
  AnnotatedImage target;
  std::vector<PasteRecord> into_source;
  std::vector<PasteRecord> into_target;
};

/// Pastes target objects into the source image and source objects into the
/// target image. Both directions read the original images and box lists.
/// The single stream is consumed by TargetIntoSource planning first.
AugmentedPair augment_pair(const BatchSample& sample, const PasteStrategy& strategy, Rng& rng);

/// As above, with one substream per direction derived from
/// hash64(master_seed, {iteration_index, direction}).
AugmentedPair augment_pair(const BatchSample& sample, const PasteStrategy& strategy,
                           std::uint64_t master_seed);

std::uint64_t direction_seed(std::uint64_t master_seed, std::size_t iteration_index,
                             PasteDirection direction);

}  // namespace ocdc
