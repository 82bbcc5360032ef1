#include "ocdc/geometry.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ocdc {

std::ostream& operator<<(std::ostream& os, const BBox& b) {
  return os << "(" << b.x << "," << b.y << "," << b.w << "," << b.h
            << " class=" << b.class_id << ")";
}

bool has_positive_extent(const BBox& b) { return b.w >= 1 && b.h >= 1; }

bool fits_inside(const BBox& b, ImageSize size) {
  return has_positive_extent(b) && b.x >= 0 && b.y >= 0 &&
         b.right() <= size.width && b.bottom() <= size.height;
}

std::int64_t intersect_area(const BBox& a, const BBox& b) {
  const std::int64_t ix = std::max(0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const std::int64_t iy = std::max(0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  return ix * iy;
}

OverlapFraction overlap_fraction(const BBox& pasted, const BBox& existing) {
  return {intersect_area(pasted, existing), existing.area()};
}

double overlap_ratio(const BBox& pasted, const BBox& existing) {
  return overlap_fraction(pasted, existing).value();
}

bool overlap_exceeds(const BBox& pasted, const BBox& existing, double gamma) {
  return overlap_ratio(pasted, existing) > gamma;
}

BBox clamp_to_image(const BBox& b, ImageSize size) {
  if (!has_positive_extent(b) || b.w > size.width || b.h > size.height) {
    std::ostringstream msg;
    msg << "clamp_to_image: box " << b << " does not fit in " << size.width << "x"
        << size.height;
    throw std::invalid_argument(msg.str());
  }
  BBox out = b;
  out.x = std::clamp(b.x, 0, size.width - b.w);
  out.y = std::clamp(b.y, 0, size.height - b.h);
  return out;
}

}  // namespace ocdc
