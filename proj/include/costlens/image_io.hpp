#pragma once

#include "costlens/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace costlens {

using Bytes = std::vector<std::uint8_t>;

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB triples

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 255)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::uint8_t* at(int row, int col) {
    return pixels.data() + (static_cast<std::size_t>(row) * width + col) * 3;
  }
  const std::uint8_t* at(int row, int col) const {
    return pixels.data() + (static_cast<std::size_t>(row) * width + col) * 3;
  }
};

Bytes read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it into place, so a failed
// write never leaves a partial output behind.
void write_file_atomically(const std::filesystem::path& path, const Bytes& bytes);

Bytes encode_png(const LabelImage& image);
Bytes encode_png(const RgbImage& image);
Bytes encode_pgm(const LabelImage& image);
Bytes encode_ppm(const RgbImage& image);

// 8-bit single-channel image from PNG or binary PGM (P5) bytes; the format is
// detected from the magic bytes.
LabelImage decode_gray8(const Bytes& bytes);

LabelImage read_gray8(const std::filesystem::path& path);
// ".pgm" extension writes P5, anything else PNG.
void write_gray8(const LabelImage& image, const std::filesystem::path& path);
// ".ppm" extension writes P6, anything else PNG.
void write_rgb(const RgbImage& image, const std::filesystem::path& path);

}  // namespace costlens
