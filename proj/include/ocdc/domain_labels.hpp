#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ocdc/geometry.hpp"
#include "ocdc/image.hpp"
#include "ocdc/ingest.hpp"
#include "ocdc/paste.hpp"

namespace ocdc {

/// Per-cell discriminator target at feature stride: 0 = source, 1 = target.
class DomainLabelMap {
 public:
  DomainLabelMap(ImageSize image_size, int stride, Domain fill);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int stride() const { return stride_; }
  ImageSize image_size() const { return image_size_; }

  std::uint8_t at(int row, int col) const { return cells_[index(row, col)]; }
  void set(int row, int col, Domain d) { cells_[index(row, col)] = static_cast<std::uint8_t>(d); }
  std::span<const std::uint8_t> cells() const { return cells_; }

  /// Grayscale raster for PGM output: 0 for source cells, 255 for target.
  Image to_image() const;
  /// Inverse of to_image(); any value other than 0 or 255 is rejected.
  static DomainLabelMap from_image(const Image& raster, ImageSize image_size, int stride);

  friend bool operator==(const DomainLabelMap&, const DomainLabelMap&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * cols_ + col;
  }

  ImageSize image_size_;
  int stride_ = 16;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// ceil(extent / stride)
int feature_extent(int pixels, int stride);

DomainLabelMap base_label_map(Domain domain, ImageSize image_size, int stride = 16);

/// Sets every cell whose stride tile intersects a record's dst_rect to the
/// label of the domain the pasted content came from. Cells covered are
/// [floor(x/s), ceil((x+w)/s)) by [floor(y/s), ceil((y+h)/s)).
/// Throws std::out_of_range for a record outside the map's image.
DomainLabelMap switch_labels(const DomainLabelMap& map, std::span<const PasteRecord> records);

}  // namespace ocdc
