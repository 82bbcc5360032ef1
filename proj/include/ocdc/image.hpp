#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ocdc/geometry.hpp"

namespace ocdc {

/// Interleaved 8-bit image, row-major, 1 or 3 channels.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, std::uint8_t fill = 0);
  Image(int width, int height, int channels, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  ImageSize size() const { return {width_, height_}; }
  bool empty() const { return data_.empty(); }

  std::uint8_t& at(int x, int y, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  const std::uint8_t* pixel(int x, int y) const {
    return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_;
  }
  std::uint8_t* pixel(int x, int y) {
    return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_;
  }

  std::span<const std::uint8_t> bytes() const { return data_; }
  std::span<std::uint8_t> bytes() { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

Image crop(const Image& src, const BBox& region);

/// 1 -> 3 replicates the gray value; 3 -> 1 averages with rounding.
Image convert_channels(const Image& src, int channels);

/// Bilinear resampling with half-pixel-centre alignment and edge clamping.
/// Exact identity when the output size equals the input size.
Image resize_bilinear(const Image& src, int out_width, int out_height);

/// Overwrites dst pixels at (x, y) with `patch`; channel counts must match
/// and the patch must lie inside dst.
void paste(Image& dst, const Image& patch, int x, int y);

}  // namespace ocdc
