// Copyright 2026 The axps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include <png.h>

#include "axps/error.hpp"

namespace axps {

// Raw 8-bit RGB raster, row-major, three bytes per pixel.
struct RgbImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> rgb;

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

namespace detail {

inline constexpr std::uint32_t kMaxPngSide = 1u << 15;

// libpng reports errors through longjmp. Each stage below runs inside its own
// setjmp frame with only trivially destructible locals; C++ objects live in
// the caller and outlast every jump.
struct PngIo {
  const std::uint8_t* data = nullptr;
  std::size_t size = 0;
  std::size_t pos = 0;
  std::vector<std::uint8_t>* out = nullptr;
  char message[256] = {};
};

inline void png_on_error(png_structp png, png_const_charp msg) {
  auto* io = static_cast<PngIo*>(png_get_error_ptr(png));
  std::strncpy(io->message, msg ? msg : "unknown libpng error", sizeof(io->message) - 1);
  png_longjmp(png, 1);
}

inline void png_on_warning(png_structp, png_const_charp) {}

inline void png_read_bytes(png_structp png, png_bytep dst, png_size_t n) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  if (n > io->size - io->pos) png_error(png, "unexpected end of PNG data");
  std::memcpy(dst, io->data + io->pos, n);
  io->pos += n;
}

inline void png_write_bytes(png_structp png, png_bytep src, png_size_t n) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  try {
    io->out->insert(io->out->end(), src, src + n);
  } catch (...) {
    png_error(png, "out of memory while encoding PNG");
  }
}

inline void png_flush(png_structp) {}

inline bool png_read_header(png_structp png, png_infop info, png_uint_32* w, png_uint_32* h, int* depth,
                            int* color) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_info(png, info);
  int interlace = 0;
  png_get_IHDR(png, info, w, h, depth, color, &interlace, nullptr, nullptr);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  return true;
}

inline bool png_read_body(png_structp png, png_infop info, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  png_read_end(png, info);
  return true;
}

inline bool png_write_all(png_structp png, png_infop info, png_uint_32 w, png_uint_32 h, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, info);
  return true;
}

class PngReadHandle {
 public:
  explicit PngReadHandle(PngIo* io) {
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, io, png_on_error, png_on_warning);
    if (png_) info_ = png_create_info_struct(png_);
    if (!png_ || !info_) throw Error(Errc::malformed_png, "png: cannot allocate decoder");
    png_set_read_fn(png_, io, png_read_bytes);
    png_set_user_limits(png_, kMaxPngSide, kMaxPngSide);
  }
  ~PngReadHandle() { png_destroy_read_struct(&png_, info_ ? &info_ : nullptr, nullptr); }
  PngReadHandle(const PngReadHandle&) = delete;
  PngReadHandle& operator=(const PngReadHandle&) = delete;

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }

 private:
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

class PngWriteHandle {
 public:
  explicit PngWriteHandle(PngIo* io) {
    png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, io, png_on_error, png_on_warning);
    if (png_) info_ = png_create_info_struct(png_);
    if (!png_ || !info_) throw Error(Errc::io, "png: cannot allocate encoder");
    png_set_write_fn(png_, io, png_write_bytes, png_flush);
  }
  ~PngWriteHandle() { png_destroy_write_struct(&png_, info_ ? &info_ : nullptr); }
  PngWriteHandle(const PngWriteHandle&) = delete;
  PngWriteHandle& operator=(const PngWriteHandle&) = delete;

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }

 private:
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

}  // namespace detail

/// Decodes a PNG that must be 8-bit truecolor RGB. No color or gamma
/// transforms are applied, so the returned bytes are exactly the stored ones.
inline RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(Errc::malformed_png, "png: missing PNG signature");
  }
  detail::PngIo io;
  io.data = bytes.data();
  io.size = bytes.size();
  detail::PngReadHandle handle(&io);

  png_uint_32 w = 0, h = 0;
  int depth = 0, color = 0;
  if (!detail::png_read_header(handle.png(), handle.info(), &w, &h, &depth, &color)) {
    throw Error(Errc::malformed_png, std::string("png: ") + io.message);
  }
  if (color != PNG_COLOR_TYPE_RGB || depth != 8) {
    throw Error(Errc::malformed_png, "png: expected 8-bit RGB, got color type " + std::to_string(color) +
                                         " at bit depth " + std::to_string(depth));
  }
  if (png_get_rowbytes(handle.png(), handle.info()) != static_cast<std::size_t>(w) * 3) {
    throw Error(Errc::malformed_png, "png: unexpected row layout");
  }

  RgbImage image;
  image.width = w;
  image.height = h;
  image.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = image.rgb.data() + static_cast<std::size_t>(y) * w * 3;

  if (!detail::png_read_body(handle.png(), handle.info(), rows.data())) {
    throw Error(Errc::malformed_png, std::string("png: ") + io.message);
  }
  return image;
}

/// Encodes an 8-bit RGB PNG. Output bytes depend only on the pixels.
inline std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  if (image.width == 0 || image.height == 0 || image.width > detail::kMaxPngSide ||
      image.height > detail::kMaxPngSide) {
    throw Error(Errc::invalid_argument, "png: unsupported image size");
  }
  if (image.rgb.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw Error(Errc::invalid_argument, "png: pixel buffer does not match dimensions");
  }
  std::vector<std::uint8_t> out;
  detail::PngIo io;
  io.out = &out;
  detail::PngWriteHandle handle(&io);

  // libpng wants mutable row pointers even though it never writes through them.
  std::vector<png_bytep> rows(image.height);
  auto* base = const_cast<std::uint8_t*>(image.rgb.data());
  for (std::uint32_t y = 0; y < image.height; ++y) rows[y] = base + static_cast<std::size_t>(y) * image.width * 3;

  if (!detail::png_write_all(handle.png(), handle.info(), image.width, image.height, rows.data())) {
    throw Error(Errc::io, std::string("png: ") + io.message);
  }
  return out;
}

}  // namespace axps
