#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fieldkit/geometry.hpp"

namespace fieldkit {

/// Interleaved 8-bit image with 1 (gray) or 3 (RGB) channels, row-major.
/// Pixel (x, y) covers [x, x+1) x [y, y+1); its center is at (x + 0.5, y + 0.5).
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, std::uint8_t fill = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  std::uint8_t& at(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

using Rgb = std::array<std::uint8_t, 3>;

/// Binary PGM (P5) for one channel, PPM (P6) for three.
std::string encode_pnm(const Image& image);
Image decode_pnm(const std::string& bytes);
Image read_pnm(const std::string& path);
void write_pnm(const Image& image, const std::string& path);

Image to_gray(const Image& image);
Image to_rgb(const Image& image);

void set_pixel(Image& image, int x, int y, const Rgb& color);
void draw_line(Image& image, const Vec2& a, const Vec2& b, const Rgb& color, int thickness = 1);
void draw_disc(Image& image, const Vec2& center, double radius, const Rgb& color);

}  // namespace fieldkit
