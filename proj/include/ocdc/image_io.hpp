#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocdc/image.hpp"

namespace ocdc {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Decodes PNG or JPEG (detected from the magic bytes). 8-bit gray and RGB
/// are returned as-is; alpha is dropped and 16-bit samples are stripped.
Image read_image(const std::filesystem::path& path);

Image decode_png(std::span<const std::uint8_t> bytes);
Image decode_jpeg(std::span<const std::uint8_t> bytes);

/// Deterministic PNG encoding (fixed compression, no ancillary chunks).
std::vector<std::uint8_t> encode_png(const Image& image);

/// Binary PGM, P5, maxval 255. Single-channel images only.
std::vector<std::uint8_t> encode_pgm(const Image& image);
Image decode_pgm(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace ocdc
