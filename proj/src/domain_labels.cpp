#include "ocdc/domain_labels.hpp"

#include <sstream>
#include <stdexcept>
#include <string>

namespace ocdc {

int feature_extent(int pixels, int stride) { return (pixels + stride - 1) / stride; }

DomainLabelMap::DomainLabelMap(ImageSize image_size, int stride, Domain fill)
    : image_size_(image_size), stride_(stride) {
  if (stride < 1) {
    throw std::invalid_argument("DomainLabelMap: stride must be >= 1");
  }
  if (image_size.width < 1 || image_size.height < 1) {
    throw std::invalid_argument("DomainLabelMap: image size must be positive");
  }
  rows_ = feature_extent(image_size.height, stride);
  cols_ = feature_extent(image_size.width, stride);
  cells_.assign(static_cast<std::size_t>(rows_) * cols_, static_cast<std::uint8_t>(fill));
}

Image DomainLabelMap::to_image() const {
  std::vector<std::uint8_t> bytes(cells_.size());
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    bytes[i] = cells_[i] ? 255 : 0;
  }
  return Image(cols_, rows_, 1, std::move(bytes));
}

DomainLabelMap DomainLabelMap::from_image(const Image& raster, ImageSize image_size, int stride) {
  DomainLabelMap map(image_size, stride, Domain::Source);
  if (raster.channels() != 1 || raster.width() != map.cols_ || raster.height() != map.rows_) {
    std::ostringstream msg;
    msg << "label raster is " << raster.width() << "x" << raster.height() << ", expected "
        << map.cols_ << "x" << map.rows_ << " for image " << image_size.width << "x"
        << image_size.height << " at stride " << stride;
    throw std::invalid_argument(msg.str());
  }
  for (int r = 0; r < map.rows_; ++r) {
    for (int c = 0; c < map.cols_; ++c) {
      const std::uint8_t v = raster.at(c, r, 0);
      if (v != 0 && v != 255) {
        throw std::invalid_argument("label raster cell (row " + std::to_string(r) + ", col " +
                                    std::to_string(c) + ") has value " + std::to_string(v));
      }
      map.cells_[map.index(r, c)] = v ? 1 : 0;
    }
  }
  return map;
}

DomainLabelMap base_label_map(Domain domain, ImageSize image_size, int stride) {
  return DomainLabelMap(image_size, stride, domain);
}

DomainLabelMap switch_labels(const DomainLabelMap& map, std::span<const PasteRecord> records) {
  DomainLabelMap out = map;
  const int s = map.stride();
  for (const PasteRecord& rec : records) {
    const BBox& b = rec.dst_rect;
    if (!fits_inside(b, map.image_size())) {
      std::ostringstream msg;
      msg << "switch_labels: record rect " << b << " outside " << map.image_size().width << "x"
          << map.image_size().height;
      throw std::out_of_range(msg.str());
    }
    const Domain label = origin_domain(rec.direction);
    const int col_end = feature_extent(b.right(), s);
    const int row_end = feature_extent(b.bottom(), s);
    for (int r = b.y / s; r < row_end; ++r) {
      for (int c = b.x / s; c < col_end; ++c) {
        out.set(r, c, label);
      }
    }
  }
  return out;
}

}  // namespace ocdc
