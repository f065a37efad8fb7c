// Copyright 2026 The stainkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <png.h>

#include <cstdio>
#include <cstring>
#include <iostream>
#include <memory>
#include <system_error>

#include "stainkit/error.hpp"
#include "stainkit/image.hpp"

namespace stainkit {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngMessage {
  char text[256] = {};
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* out = static_cast<PngMessage*>(png_get_error_ptr(png));
  if (out) std::snprintf(out->text, sizeof(out->text), "%s", msg);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct DecodedPng {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int channels = 0;
  std::vector<png_byte> bytes;
  std::vector<png_bytep> rows;
};

enum class ReadStatus { kOk, kLibpngError, kGrayscale };

// Only trivially destructible locals live in this frame: libpng may longjmp
// back into it.
ReadStatus decode_png(png_structp png, png_infop info, std::FILE* fp, DecodedPng& out) {
  if (setjmp(png_jmpbuf(png))) return ReadStatus::kLibpngError;

  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    return ReadStatus::kGrayscale;
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  png_read_update_info(png, info);

  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  out.channels = png_get_channels(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out.bytes.resize(row_bytes * out.height);
  out.rows.resize(out.height);
  for (png_uint_32 y = 0; y < out.height; ++y) out.rows[y] = out.bytes.data() + y * row_bytes;
  png_read_image(png, out.rows.data());
  png_read_end(png, nullptr);
  return ReadStatus::kOk;
}

bool encode_png(png_structp png, png_infop info, std::FILE* fp, png_uint_32 width,
                png_uint_32 height, png_bytep* rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

}  // namespace

RgbImage load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kFileNotFound, path.string());
  }
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error(ErrorCode::kFileNotFound, path.string());

  png_byte signature[8] = {};
  if (std::fread(signature, 1, 8, fp.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw Error(ErrorCode::kUnsupportedFormat, path.string() + " is not a PNG file");
  }

  PngMessage message;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  if (!png) throw Error(ErrorCode::kUnsupportedFormat, "libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  DecodedPng decoded;
  const ReadStatus status =
      info ? decode_png(png, info, fp.get(), decoded) : ReadStatus::kLibpngError;
  png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);

  switch (status) {
    case ReadStatus::kLibpngError:
      throw Error(ErrorCode::kUnsupportedFormat, path.string() + ": " + message.text);
    case ReadStatus::kGrayscale:
      throw Error(ErrorCode::kBadChannelCount, path.string() + " is grayscale, expected RGB");
    case ReadStatus::kOk:
      break;
  }
  if (decoded.channels != 3 && decoded.channels != 4) {
    throw Error(ErrorCode::kBadChannelCount,
                path.string() + " has " + std::to_string(decoded.channels) + " channels");
  }
  if (decoded.bit_depth != 8 && decoded.bit_depth != 16) {
    throw Error(ErrorCode::kUnsupportedFormat,
                path.string() + ": bit depth " + std::to_string(decoded.bit_depth));
  }
  if (decoded.channels == 4) {
    std::cerr << "warning: " << path.string() << ": alpha channel discarded\n";
  }

  const std::size_t h = decoded.height;
  const std::size_t w = decoded.width;
  const std::size_t stride = static_cast<std::size_t>(decoded.channels);
  const bool wide = decoded.bit_depth == 16;
  const double full_scale = wide ? 65535.0 : 255.0;
  std::vector<double> data(h * w * 3);
  for (std::size_t y = 0; y < h; ++y) {
    const png_byte* row = decoded.rows[y];
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t sample = x * stride + c;
        const unsigned v = wide ? (unsigned{row[2 * sample]} << 8) | row[2 * sample + 1]
                                : unsigned{row[sample]};
        data[(y * w + x) * 3 + c] = v / full_scale;
      }
    }
  }
  return RgbImage(h, w, std::move(data));
}

void save_image(const RgbImage& img, const std::filesystem::path& path) {
  if (img.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot save an empty image");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error(ErrorCode::kUnwritablePath, path.string());

  const std::size_t h = img.height();
  const std::size_t w = img.width();
  std::vector<png_byte> bytes(h * w * 3);
  const auto src = img.data();
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = quantize_8bit(src[i]);
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = bytes.data() + y * w * 3;

  PngMessage message;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  if (!png) throw Error(ErrorCode::kUnwritablePath, "libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  const bool ok = info && encode_png(png, info, fp.get(), static_cast<png_uint_32>(w),
                                     static_cast<png_uint_32>(h), rows.data());
  png_destroy_write_struct(&png, info ? &info : nullptr);
  if (!ok) throw Error(ErrorCode::kUnwritablePath, path.string() + ": " + message.text);
  if (std::fflush(fp.get()) != 0) throw Error(ErrorCode::kUnwritablePath, path.string());
}

}  // namespace stainkit
