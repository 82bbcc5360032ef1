#include "ocdc/paste.hpp"

#include <cmath>
#include <sstream>

#include "ocdc/image.hpp"

namespace ocdc {
namespace {

bool covers_protected(const BBox& candidate, std::span<const BBox> dst_boxes,
                      const std::vector<PasteRecord>& accepted, double gamma) {
  for (const auto& p : dst_boxes) {
    if (overlap_exceeds(candidate, p, gamma)) return true;
  }
  for (const auto& r : accepted) {
    if (overlap_exceeds(candidate, r.dst_rect, gamma)) return true;
  }
  return false;
}

bool fits_strictly(int w, int h, ImageSize size) { return w < size.width && h < size.height; }

AugmentedPair augment_with(const BatchSample& sample, const PasteStrategy& strategy,
                           Rng& into_source_rng, Rng& into_target_rng) {
  const AnnotatedImage& src = sample.source_item;
  const AnnotatedImage& tgt = sample.target_item;
  if (src.domain != Domain::Source || tgt.domain != Domain::Target) {
    throw PasteError("augment_pair: sample domains must be (source, target)");
  }

  const PastePlan into_source =
      plan_pastes(tgt.boxes, src.boxes, src.pixels.size(), strategy, into_source_rng,
                  tgt.image_id, PasteDirection::TargetIntoSource);
  const PastePlan into_target =
      plan_pastes(src.boxes, tgt.boxes, tgt.pixels.size(), strategy, into_target_rng,
                  src.image_id, PasteDirection::SourceIntoTarget);

  AugmentedPair out;
  out.source = apply_pastes(src, tgt, into_source);
  out.target = apply_pastes(tgt, src, into_target);
  out.into_source = into_source.records;
  out.into_target = into_target.records;
  return out;
}

}  // namespace

void PasteStrategy::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("PasteStrategy: " + m); };
  if (!(scale_min > 0.0) || !(scale_min <= scale_max) || !std::isfinite(scale_max)) {
    fail("need 0 < scale_min <= scale_max");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must lie in [0, 1]");
  if (max_attempts < 1) fail("max_attempts must be >= 1");
  if (min_box_side < 0) fail("min_box_side must be >= 0");
  if (jitter_radius < 0) fail("jitter_radius must be >= 0");
}

const char* to_string(PositionMode m) { return m == PositionMode::Fixed ? "fixed" : "random"; }
const char* to_string(ScalingMode m) { return m == ScalingMode::Fixed ? "fixed" : "random"; }

PositionMode parse_position_mode(const std::string& s) {
  if (s == "fixed") return PositionMode::Fixed;
  if (s == "random") return PositionMode::Random;
  throw std::invalid_argument("unknown position mode \"" + s + "\"");
}

ScalingMode parse_scaling_mode(const std::string& s) {
  if (s == "fixed") return ScalingMode::Fixed;
  if (s == "random") return ScalingMode::Random;
  throw std::invalid_argument("unknown scaling mode \"" + s + "\"");
}

const char* to_string(PasteDirection d) {
  return d == PasteDirection::TargetIntoSource ? "target_into_source" : "source_into_target";
}

PasteDirection parse_direction(const std::string& s) {
  if (s == "target_into_source") return PasteDirection::TargetIntoSource;
  if (s == "source_into_target") return PasteDirection::SourceIntoTarget;
  throw std::invalid_argument("unknown paste direction \"" + s + "\"");
}

const char* to_string(SkipReason r) {
  switch (r) {
    case SkipReason::TooSmall: return "too_small";
    case SkipReason::TooLarge: return "too_large";
    case SkipReason::AttemptsExhausted: return "attempts_exhausted";
  }
  return "unknown";
}

int scaled_side(int side, double scale) {
  return static_cast<int>(std::max(1L, std::lround(side * scale)));
}

PastePlan plan_pastes(std::span<const BBox> src_boxes, std::span<const BBox> dst_boxes,
                      ImageSize dst_size, const PasteStrategy& strategy, Rng& rng,
                      const std::string& src_image_id, PasteDirection direction) {
  strategy.validate();
  const bool random_scale = strategy.scaling == ScalingMode::Random;
  const bool random_position = strategy.position == PositionMode::Random;
  const bool jitter = !random_position && strategy.jitter_radius > 0;
  const int attempts = (!random_scale && !random_position && !jitter) ? 1 : strategy.max_attempts;

  PastePlan plan;
  for (const BBox& box : src_boxes) {
    if (box.w <= strategy.min_box_side || box.h <= strategy.min_box_side) {
      plan.skipped.push_back({box, SkipReason::TooSmall});
      continue;
    }
    const double smallest = random_scale ? strategy.scale_min : 1.0;
    if (!fits_strictly(scaled_side(box.w, smallest), scaled_side(box.h, smallest), dst_size)) {
      plan.skipped.push_back({box, SkipReason::TooLarge});
      continue;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < attempts && !accepted; ++attempt) {
      const double scale =
          random_scale ? rng.uniform_real(strategy.scale_min, strategy.scale_max) : 1.0;
      const int w = scaled_side(box.w, scale);
      const int h = scaled_side(box.h, scale);
      if (!fits_strictly(w, h, dst_size)) continue;

      BBox candidate{0, 0, w, h, box.class_id};
      if (random_position) {
        candidate.x = static_cast<int>(rng.uniform_int(0, dst_size.width - w));
        candidate.y = static_cast<int>(rng.uniform_int(0, dst_size.height - h));
      } else {
        candidate.x = box.x;
        candidate.y = box.y;
        if (jitter) {
          candidate.x += static_cast<int>(rng.uniform_int(-strategy.jitter_radius, strategy.jitter_radius));
          candidate.y += static_cast<int>(rng.uniform_int(-strategy.jitter_radius, strategy.jitter_radius));
        }
        candidate = clamp_to_image(candidate, dst_size);
      }

      if (covers_protected(candidate, dst_boxes, plan.records, strategy.gamma)) continue;
      plan.records.push_back({src_image_id, box, candidate, scale, direction});
      accepted = true;
    }
    if (!accepted) {
      plan.skipped.push_back({box, SkipReason::AttemptsExhausted});
    }
  }
  return plan;
}

AnnotatedImage apply_pastes(const AnnotatedImage& dst, const AnnotatedImage& src,
                            const PastePlan& plan) {
  AnnotatedImage out = dst;
  for (std::size_t i = 0; i < plan.records.size(); ++i) {
    const PasteRecord& r = plan.records[i];
    if (!fits_inside(r.src_box, src.pixels.size()) || !fits_inside(r.dst_rect, dst.pixels.size())) {
      std::ostringstream msg;
      msg << "apply_pastes: record " << i << " (src " << r.src_box << ", dst " << r.dst_rect
          << ") does not match the image geometry";
      throw PasteError(msg.str());
    }
    Image patch = convert_channels(crop(src.pixels, r.src_box), out.pixels.channels());
    patch = resize_bilinear(patch, r.dst_rect.w, r.dst_rect.h);
    paste(out.pixels, patch, r.dst_rect.x, r.dst_rect.y);
    BBox merged = r.dst_rect;
    merged.class_id = r.src_box.class_id;
    out.boxes.push_back(merged);
  }
  return out;
}

AugmentedPair augment_pair(const BatchSample& sample, const PasteStrategy& strategy, Rng& rng) {
  return augment_with(sample, strategy, rng, rng);
}

std::uint64_t direction_seed(std::uint64_t master_seed, std::size_t iteration_index,
                             PasteDirection direction) {
  return hash64(master_seed, {static_cast<std::uint64_t>(iteration_index),
                              static_cast<std::uint64_t>(direction)});
}

AugmentedPair augment_pair(const BatchSample& sample, const PasteStrategy& strategy,
                           std::uint64_t master_seed) {
  Rng into_source(direction_seed(master_seed, sample.iteration_index, PasteDirection::TargetIntoSource));
  Rng into_target(direction_seed(master_seed, sample.iteration_index, PasteDirection::SourceIntoTarget));
  return augment_with(sample, strategy, into_source, into_target);
}

}  // namespace ocdc
