// Copyright 2026 The clanerf Authors.
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

#include "clanerf/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "clanerf/error.hpp"

namespace clanerf {
namespace {

enum class Format { kPng, kPpm };

Format format_for(const std::string& path) {
  auto ends_with = [&](const char* ext) {
    const std::string e(ext);
    if (path.size() < e.size()) return false;
    std::string tail = path.substr(path.size() - e.size());
    std::transform(tail.begin(), tail.end(), tail.begin(), ::tolower);
    return tail == e;
  };
  if (ends_with(".png")) return Format::kPng;
  if (ends_with(".ppm") || ends_with(".pgm")) return Format::kPpm;
  fail(ErrorCode::kInvalidArgument, "unsupported image extension: " + path);
}

struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> bytes;
};

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

RawImage read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail(ErrorCode::kIo, "cannot open " + path);
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    fail(ErrorCode::kIo, "bad PNG signature in " + path);
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::kIo, "libpng init failed for " + path);
  }
  RawImage out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::kIo, "corrupt PNG " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.bytes.resize(stride * out.height);
  std::vector<png_bytep> rows(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + y * stride;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_png(const std::string& path, const RawImage& img) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail(ErrorCode::kIo, "cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::kIo, "libpng init failed for " + path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::kIo, "failed writing PNG " + path);
  }
  png_init_io(png, fp.get());
  const int color = img.channels == 1   ? PNG_COLOR_TYPE_GRAY
                    : img.channels == 3 ? PNG_COLOR_TYPE_RGB
                                        : PNG_COLOR_TYPE_RGBA;
  png_set_IHDR(png, info, img.width, img.height, 8, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  // No timestamps or other ancillary chunks: output is a pure function of pixels.
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  for (int y = 0; y < img.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(img.bytes.data() + y * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

RawImage read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  std::string magic;
  in >> magic;
  RawImage out;
  if (magic == "P6") out.channels = 3;
  else if (magic == "P5") out.channels = 1;
  else fail(ErrorCode::kIo, "bad PNM magic '" + magic + "' in " + path);
  auto next_int = [&]() {
    int v = 0;
    while (in >> std::ws && in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
    }
    if (!(in >> v)) fail(ErrorCode::kIo, "truncated PNM header in " + path);
    return v;
  };
  out.width = next_int();
  out.height = next_int();
  const int maxval = next_int();
  if (maxval != 255) fail(ErrorCode::kIo, "only 8-bit PNM supported: " + path);
  in.get();
  out.bytes.resize(static_cast<std::size_t>(out.width) * out.height * out.channels);
  in.read(reinterpret_cast<char*>(out.bytes.data()), static_cast<std::streamsize>(out.bytes.size()));
  if (!in) fail(ErrorCode::kIo, "truncated PNM data in " + path);
  return out;
}

void write_pnm(const std::string& path, const RawImage& img) {
  if (img.channels != 1 && img.channels != 3) {
    fail(ErrorCode::kInvalidArgument, "PNM supports 1 or 3 channels: " + path);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out << (img.channels == 3 ? "P6" : "P5") << "\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.bytes.data()), static_cast<std::streamsize>(img.bytes.size()));
  if (!out) fail(ErrorCode::kIo, "failed writing " + path);
}

RawImage read_raw(const std::string& path) {
  return format_for(path) == Format::kPng ? read_png(path) : read_pnm(path);
}

void write_raw(const std::string& path, const RawImage& img) {
  if (format_for(path) == Format::kPng) write_png(path, img);
  else write_pnm(path, img);
}

}  // namespace

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels),
      data_(static_cast<std::size_t>(width) * height * channels, fill) {
  if (width < 0 || height < 0 || channels < 1) fail(ErrorCode::kInvalidArgument, "bad image shape");
}

std::vector<std::uint8_t> Image::to_bytes() const {
  std::vector<std::uint8_t> out(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const float v = std::clamp(data_[i], 0.0f, 1.0f);
    out[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return out;
}

Image Image::from_bytes(int width, int height, int channels, const std::vector<std::uint8_t>& bytes) {
  Image img(width, height, channels);
  if (bytes.size() != img.data_.size()) fail(ErrorCode::kInvalidArgument, "byte count mismatch");
  for (std::size_t i = 0; i < bytes.size(); ++i) img.data_[i] = bytes[i] / 255.0f;
  return img;
}

Image load_image(const std::string& path) {
  RawImage raw = read_raw(path);
  return Image::from_bytes(raw.width, raw.height, raw.channels, raw.bytes);
}

void save_image(const std::string& path, const Image& image) {
  RawImage raw{image.width(), image.height(), image.channels(), image.to_bytes()};
  write_raw(path, raw);
}

LabelImage load_label_image(const std::string& path) {
  RawImage raw = read_raw(path);
  if (raw.channels != 1) fail(ErrorCode::kSchema, "segmentation map must be single-channel: " + path);
  LabelImage out;
  out.width = raw.width;
  out.height = raw.height;
  out.labels = std::move(raw.bytes);
  return out;
}

void save_label_image(const std::string& path, const LabelImage& labels) {
  write_raw(path, RawImage{labels.width, labels.height, 1, labels.labels});
}

void validate_labels(const LabelImage& labels, int part_count, const std::string& what) {
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    if (labels.labels[i] > part_count) {
      std::ostringstream os;
      os << what << ": label " << int(labels.labels[i]) << " at pixel " << i
         << " exceeds part count " << part_count;
      fail(ErrorCode::kSchema, os.str());
    }
  }
}

}  // namespace clanerf
