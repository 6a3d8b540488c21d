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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace clanerf {

/// Interleaved float image, row-major, values nominally in [0, 1].
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return data_.empty(); }

  float& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  float at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  /// Rounds to the nearest 8-bit level, so load(save(x)) is the identity on
  /// images whose values are already multiples of 1/255.
  std::vector<std::uint8_t> to_bytes() const;
  static Image from_bytes(int width, int height, int channels, const std::vector<std::uint8_t>& bytes);

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Per-pixel class labels. On disk: 0 = background, 1..P = part index.
struct LabelImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;

  LabelImage() = default;
  LabelImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), labels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

// Image files. PNG is 8-bit gray/RGB/RGBA; PPM is binary P6 (and P5 gray).
// Format is chosen by extension (.png, .ppm, .pgm). Errors name the path.
Image load_image(const std::string& path);
void save_image(const std::string& path, const Image& image);

LabelImage load_label_image(const std::string& path);
void save_label_image(const std::string& path, const LabelImage& labels);

/// Throws kSchema if any label exceeds `part_count` (0 is background).
void validate_labels(const LabelImage& labels, int part_count, const std::string& what);

}  // namespace clanerf
