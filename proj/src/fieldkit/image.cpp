#include "fieldkit/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fieldkit/error.hpp"

namespace fieldkit {

Image::Image(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, "image dimensions must be positive");
  if (channels != 1 && channels != 3) throw Error(ErrorKind::InvalidArgument, "image must have 1 or 3 channels");
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

std::string encode_pnm(const Image& image) {
  std::ostringstream out;
  out << (image.channels() == 1 ? "P5" : "P6") << '\n'
      << image.width() << ' ' << image.height() << '\n'
      << 255 << '\n';
  out.write(reinterpret_cast<const char*>(image.data().data()),
            static_cast<std::streamsize>(image.data().size()));
  return out.str();
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

int parse_int(const std::string& token) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size()) throw Error(ErrorKind::Parse, "bad PNM header value: " + token);
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::Parse, "bad PNM header value: " + token);
  }
}

}  // namespace

Image decode_pnm(const std::string& bytes) {
  std::size_t pos = 0;
  const std::string magic = next_token(bytes, pos);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw Error(ErrorKind::Parse, "unsupported PNM magic '" + magic + "' (expected P5 or P6)");
  }
  const int width = parse_int(next_token(bytes, pos));
  const int height = parse_int(next_token(bytes, pos));
  const int maxval = parse_int(next_token(bytes, pos));
  if (width <= 0 || height <= 0) throw Error(ErrorKind::Parse, "PNM dimensions must be positive");
  if (maxval != 255) throw Error(ErrorKind::Parse, "only 8-bit PNM files are supported");
  ++pos;  // single whitespace byte after maxval
  Image image(width, height, channels);
  const std::size_t need = image.data().size();
  if (bytes.size() < pos + need) throw Error(ErrorKind::Parse, "truncated PNM pixel data");
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), need, image.data().begin());
  return image;
}

Image read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open image '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_pnm(buf.str());
}

void write_pnm(const Image& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write image '" + path + "'");
  const std::string bytes = encode_pnm(image);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "failed writing image '" + path + "'");
}

Image to_gray(const Image& image) {
  if (image.channels() == 1) return image;
  Image out(image.width(), image.height(), 1);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const int sum = image.at(x, y, 0) + image.at(x, y, 1) + image.at(x, y, 2);
      out.at(x, y) = static_cast<std::uint8_t>((sum + 1) / 3);
    }
  }
  return out;
}

Image to_rgb(const Image& image) {
  if (image.channels() == 3) return image;
  Image out(image.width(), image.height(), 3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = image.at(x, y);
    }
  }
  return out;
}

void set_pixel(Image& image, int x, int y, const Rgb& color) {
  if (!image.contains(x, y)) return;
  if (image.channels() == 1) {
    image.at(x, y) = static_cast<std::uint8_t>((color[0] + color[1] + color[2] + 1) / 3);
  } else {
    for (int c = 0; c < 3; ++c) image.at(x, y, c) = color[c];
  }
}

void draw_line(Image& image, const Vec2& a, const Vec2& b, const Rgb& color, int thickness) {
  const double len = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
  const int r = std::max(0, thickness / 2);
  for (int i = 0; i <= steps; ++i) {
    const Vec2 p = a + (b - a) * (static_cast<double>(i) / steps);
    const int px = static_cast<int>(std::floor(p.x()));
    const int py = static_cast<int>(std::floor(p.y()));
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) set_pixel(image, px + dx, py + dy, color);
  }
}

void draw_disc(Image& image, const Vec2& center, double radius, const Rgb& color) {
  const int x0 = static_cast<int>(std::floor(center.x() - radius));
  const int x1 = static_cast<int>(std::ceil(center.x() + radius));
  const int y0 = static_cast<int>(std::floor(center.y() - radius));
  const int y1 = static_cast<int>(std::ceil(center.y() + radius));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Vec2 c(x + 0.5, y + 0.5);
      if ((c - center).norm() <= radius) set_pixel(image, x, y, color);
    }
  }
}

}  // namespace fieldkit
