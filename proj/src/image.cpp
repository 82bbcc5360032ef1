#include "ocdc/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ocdc {
namespace {

void check_shape(int width, int height, int channels) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("Image: dimensions must be positive");
  }
  if (channels != 1 && channels != 3) {
    throw std::invalid_argument("Image: channels must be 1 or 3, got " +
                                std::to_string(channels));
  }
}

}  // namespace

Image::Image(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_shape(width, height, channels);
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw std::invalid_argument("Image: buffer size does not match dimensions");
  }
}

Image crop(const Image& src, const BBox& region) {
  if (!fits_inside(region, src.size())) {
    throw std::invalid_argument("crop: region outside image");
  }
  Image out(region.w, region.h, src.channels());
  const std::size_t row_bytes = static_cast<std::size_t>(region.w) * src.channels();
  for (int y = 0; y < region.h; ++y) {
    const auto* from = src.pixel(region.x, region.y + y);
    std::copy(from, from + row_bytes, out.pixel(0, y));
  }
  return out;
}

Image convert_channels(const Image& src, int channels) {
  if (src.channels() == channels) {
    return src;
  }
  Image out(src.width(), src.height(), channels);
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      if (channels == 3) {
        const std::uint8_t v = src.at(x, y, 0);
        out.at(x, y, 0) = v;
        out.at(x, y, 1) = v;
        out.at(x, y, 2) = v;
      } else {
        const int sum = src.at(x, y, 0) + src.at(x, y, 1) + src.at(x, y, 2);
        out.at(x, y, 0) = static_cast<std::uint8_t>((sum + 1) / 3);
      }
    }
  }
  return out;
}

Image resize_bilinear(const Image& src, int out_width, int out_height) {
  if (out_width == src.width() && out_height == src.height()) {
    return src;
  }
  Image out(out_width, out_height, src.channels());
  const double sx = static_cast<double>(src.width()) / out_width;
  const double sy = static_cast<double>(src.height()) / out_height;
  const int channels = src.channels();

  // Precompute horizontal taps once per column.
  std::vector<int> x0(out_width), x1(out_width);
  std::vector<double> fx(out_width);
  for (int ox = 0; ox < out_width; ++ox) {
    double cx = (ox + 0.5) * sx - 0.5;
    cx = std::clamp(cx, 0.0, static_cast<double>(src.width() - 1));
    x0[ox] = static_cast<int>(std::floor(cx));
    x1[ox] = std::min(x0[ox] + 1, src.width() - 1);
    fx[ox] = cx - x0[ox];
  }

  for (int oy = 0; oy < out_height; ++oy) {
    double cy = (oy + 0.5) * sy - 0.5;
    cy = std::clamp(cy, 0.0, static_cast<double>(src.height() - 1));
    const int y0 = static_cast<int>(std::floor(cy));
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double fy = cy - y0;
    for (int ox = 0; ox < out_width; ++ox) {
      for (int c = 0; c < channels; ++c) {
        const double top = src.at(x0[ox], y0, c) * (1.0 - fx[ox]) + src.at(x1[ox], y0, c) * fx[ox];
        const double bot = src.at(x0[ox], y1, c) * (1.0 - fx[ox]) + src.at(x1[ox], y1, c) * fx[ox];
        const double v = top * (1.0 - fy) + bot * fy;
        out.at(ox, oy, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

void paste(Image& dst, const Image& patch, int x, int y) {
  if (dst.channels() != patch.channels()) {
    throw std::invalid_argument("paste: channel mismatch");
  }
  const BBox region{x, y, patch.width(), patch.height(), 0};
  if (!fits_inside(region, dst.size())) {
    throw std::invalid_argument("paste: patch outside destination");
  }
  const std::size_t row_bytes = static_cast<std::size_t>(patch.width()) * patch.channels();
  for (int r = 0; r < patch.height(); ++r) {
    const auto* from = patch.pixel(0, r);
    std::copy(from, from + row_bytes, dst.pixel(x, y + r));
  }
}

}  // namespace ocdc
