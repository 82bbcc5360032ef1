#include "ocdc/image_io.hpp"

#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

#include <jpeglib.h>
#include <openssl/evp.h>
#include <png.h>

namespace ocdc {
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// file helpers
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ImageIoError("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw ImageIoError("cannot write " + tmp.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw ImageIoError("short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw ImageIoError("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
  }
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw ImageIoError("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// PNG
// ---------------------------------------------------------------------------

namespace {

struct PngReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t count) {
  auto* cursor = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + count > cursor->bytes.size()) {
    png_error(png, "truncated PNG stream");
  }
  std::memcpy(out, cursor->bytes.data() + cursor->offset, count);
  cursor->offset += count;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t count) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + count);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_throwing_error(png_structp png, png_const_charp msg) {
  auto* message = static_cast<std::string*>(png_get_error_ptr(png));
  *message = msg;
  png_longjmp(png, 1);
}

void png_silent_warning(png_structp, png_const_charp) {}

// setjmp lives in its own frame; everything that owns memory is created by
// the caller so a libpng longjmp never skips a destructor.
template <typename Fn>
[[gnu::noinline]] bool png_guarded(png_structp png, Fn&& fn) {
  if (setjmp(png_jmpbuf(png))) {
    return false;
  }
  fn();
  return true;
}

}  // namespace

Image decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw ImageIoError("not a PNG stream");
  }
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error,
                                           png_throwing_error, png_silent_warning);
  if (png == nullptr) {
    throw ImageIoError("png_create_read_struct failed");
  }
  png_infop info = png_create_info_struct(png);
  PngReadCursor cursor{bytes, 0};
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  std::size_t row_bytes = 0;
  int channels = 0;

  const bool header_ok = png_guarded(png, [&] {
    png_set_read_fn(png, &cursor, png_read_from_span);
    png_read_info(png, info);
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    channels = png_get_channels(png, info);
    row_bytes = png_get_rowbytes(png, info);
  });
  if (!header_ok) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError("PNG decode error: " + error);
  }

  std::vector<std::uint8_t> data(row_bytes * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = data.data() + y * row_bytes;
  }
  const bool body_ok = png_guarded(png, [&] {
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  });
  png_destroy_read_struct(&png, &info, nullptr);
  if (!body_ok) {
    throw ImageIoError("PNG decode error: " + error);
  }
  if (channels != 1 && channels != 3) {
    throw ImageIoError("unsupported PNG channel count " + std::to_string(channels));
  }
  return Image(static_cast<int>(width), static_cast<int>(height), channels, std::move(data));
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error,
                                            png_throwing_error, png_silent_warning);
  if (png == nullptr) {
    throw ImageIoError("png_create_write_struct failed");
  }
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  const std::size_t stride = static_cast<std::size_t>(image.width()) * image.channels();
  // libpng takes non-const row pointers but does not write through them.
  auto* base = const_cast<std::uint8_t*>(image.bytes().data());
  for (std::size_t y = 0; y < rows.size(); ++y) {
    rows[y] = base + y * stride;
  }

  const bool ok = png_guarded(png, [&] {
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
                 static_cast<png_uint_32>(image.height()), 8,
                 image.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
  });
  png_destroy_write_struct(&png, &info);
  if (!ok) {
    throw ImageIoError("PNG encode error: " + error);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JPEG (decode only)
// ---------------------------------------------------------------------------

namespace {

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_throwing_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

template <typename Fn>
[[gnu::noinline]] bool jpeg_guarded(JpegErrorManager& err, Fn&& fn) {
  if (setjmp(err.jump)) {
    return false;
  }
  fn();
  return true;
}

}  // namespace

Image decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_throwing_exit;
  jpeg_create_decompress(&cinfo);
  int width = 0;
  int height = 0;
  int channels = 0;

  const bool header_ok = jpeg_guarded(err, [&] {
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    if (cinfo.num_components != 1) {
      cinfo.out_color_space = JCS_RGB;
    }
    jpeg_start_decompress(&cinfo);
    width = static_cast<int>(cinfo.output_width);
    height = static_cast<int>(cinfo.output_height);
    channels = cinfo.output_components;
  });
  if (!header_ok) {
    jpeg_destroy_decompress(&cinfo);
    throw ImageIoError(std::string("JPEG decode error: ") + err.message);
  }

  std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height * channels);
  const bool body_ok = jpeg_guarded(err, [&] {
    while (cinfo.output_scanline < cinfo.output_height) {
      JSAMPROW row = data.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * channels;
      jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
  });
  jpeg_destroy_decompress(&cinfo);
  if (!body_ok) {
    throw ImageIoError(std::string("JPEG decode error: ") + err.message);
  }
  return Image(width, height, channels, std::move(data));
}

// ---------------------------------------------------------------------------
// PGM
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode_pgm(const Image& image) {
  if (image.channels() != 1) {
    throw ImageIoError("PGM requires a single-channel image");
  }
  const std::string header = "P5\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.bytes().begin(), image.bytes().end());
  return out;
}

Image decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space_and_comments();
    long v = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + (bytes[pos] - '0');
      ++pos;
      if (++digits > 9) throw ImageIoError("PGM header value too large");
    }
    if (digits == 0) throw ImageIoError("malformed PGM header");
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw ImageIoError("not a binary PGM (P5)");
  }
  pos = 2;
  const long width = read_int();
  const long height = read_int();
  const long maxval = read_int();
  if (width < 1 || height < 1 || maxval != 255) {
    throw ImageIoError("unsupported PGM header (need positive size, maxval 255)");
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw ImageIoError("malformed PGM header");
  }
  ++pos;
  const std::size_t expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos != expected) {
    throw ImageIoError("PGM payload size " + std::to_string(bytes.size() - pos) +
                       " does not match " + std::to_string(expected));
  }
  return Image(static_cast<int>(width), static_cast<int>(height), 1,
               std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end()));
}

Image read_image(const fs::path& path) {
  const auto bytes = read_file(path);
  try {
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) {
      return decode_png(bytes);
    }
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
      return decode_jpeg(bytes);
    }
  } catch (const ImageIoError& e) {
    throw ImageIoError(path.string() + ": " + e.what());
  }
  throw ImageIoError(path.string() + ": unrecognized image format (expected PNG or JPEG)");
}

}  // namespace ocdc
