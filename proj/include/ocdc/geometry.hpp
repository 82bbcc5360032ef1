#pragma once

#include <cstdint>
#include <iosfwd>

namespace ocdc {

/// Axis-aligned box in integer pixels. Covers [x, x+w) x [y, y+h).
struct BBox {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;
  int class_id = 0;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  std::int64_t area() const { return std::int64_t{w} * h; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

std::ostream& operator<<(std::ostream& os, const BBox& b);

struct ImageSize {
  int width = 1;
  int height = 1;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// Exact overlap fraction: intersection / existing-box area.
struct OverlapFraction {
  std::int64_t intersection = 0;
  std::int64_t existing_area = 1;

  double value() const {
    return static_cast<double>(intersection) / static_cast<double>(existing_area);
  }
};

bool has_positive_extent(const BBox& b);

/// True when b has positive extent, non-negative origin, and fits in `size`.
bool fits_inside(const BBox& b, ImageSize size);

std::int64_t intersect_area(const BBox& a, const BBox& b);

OverlapFraction overlap_fraction(const BBox& pasted, const BBox& existing);

/// Fraction of `existing` covered by `pasted`. This is not IoU: the
/// denominator is the existing box's area only.
double overlap_ratio(const BBox& pasted, const BBox& existing);

/// Overlap test used for paste rejection; compares the exact double ratio.
bool overlap_exceeds(const BBox& pasted, const BBox& existing, double gamma);

/// Minimal translation of `b` into the image. Throws std::invalid_argument
/// if the box does not fit at any position or has non-positive extent.
BBox clamp_to_image(const BBox& b, ImageSize size);

}  // namespace ocdc
