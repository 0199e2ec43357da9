#pragma once

// 8-bit grayscale images and binary PGM (P5) I/O.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace armkit {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), pixels(w * h, fill) {
    if (w == 0 || h == 0) throw ImageError("image dimensions must be >= 1");
  }

  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

/// Foreground mask; one byte per pixel, nonzero = set.
struct BinaryMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(std::size_t w, std::size_t h) : width(w), height(h), bits(w * h, 0) {}

  bool at(std::size_t x, std::size_t y) const { return bits[y * width + x] != 0; }
  void set(std::size_t x, std::size_t y, bool v = true) { bits[y * width + x] = v ? 1 : 0; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b != 0;
    return n;
  }
};

/// Luminance 0.299 R + 0.587 G + 0.114 B, rounded half up, in exact integer arithmetic.
constexpr std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

/// Interleaved 8-bit RGB to grayscale.
inline GrayImage rgb_to_gray(std::size_t width, std::size_t height, const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != width * height * 3) throw ImageError("RGB buffer size does not match dimensions");
  GrayImage out(width, height);
  for (std::size_t i = 0; i < width * height; ++i) {
    out.pixels[i] = luminance(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
  }
  return out;
}

namespace detail {

inline bool pgm_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

// Reads one unsigned header integer, skipping whitespace and '#' comments.
inline std::size_t pgm_header_int(std::string_view data, std::size_t& pos) {
  while (pos < data.size()) {
    if (pgm_space(data[pos])) {
      ++pos;
    } else if (data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  std::size_t value = 0;
  std::size_t digits = 0;
  while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') {
    value = value * 10 + static_cast<std::size_t>(data[pos] - '0');
    if (++digits > 9) throw ImageError("PGM header value too large");
    ++pos;
  }
  if (digits == 0) throw ImageError("malformed PGM header");
  return value;
}

}  // namespace detail

/// Decodes a binary PGM (P5) with maxval 255.
inline GrayImage decode_pgm(std::string_view data) {
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5') throw ImageError("not a binary PGM (P5) file");
  std::size_t pos = 2;
  const std::size_t w = detail::pgm_header_int(data, pos);
  const std::size_t h = detail::pgm_header_int(data, pos);
  const std::size_t maxval = detail::pgm_header_int(data, pos);
  if (maxval != 255) throw ImageError("only maxval 255 PGM files are supported");
  if (w == 0 || h == 0) throw ImageError("PGM dimensions must be >= 1");
  if (pos >= data.size() || !detail::pgm_space(data[pos])) throw ImageError("malformed PGM header");
  ++pos;  // exactly one whitespace byte before the raster
  if (data.size() - pos != w * h) throw ImageError("PGM raster size does not match header");
  GrayImage img(w, h);
  for (std::size_t i = 0; i < w * h; ++i) img.pixels[i] = static_cast<std::uint8_t>(data[pos + i]);
  return img;
}

inline std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(img.pixels.begin(), img.pixels.end());
  return out;
}

inline GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError("cannot open " + path);
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pgm(data);
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageError("cannot open " + path + " for writing");
  const std::string data = encode_pgm(img);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw ImageError("failed writing " + path);
}

}  // namespace armkit
