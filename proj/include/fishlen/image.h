#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fishlen {

/// 8-bit grayscale image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0);

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool Contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// BT.601 integer luma, rounding half up.
std::uint8_t Luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Loads binary PGM (P5, maxval <= 255) or PNG, chosen by file signature.
/// Colour PNGs are converted with Luma().
GrayImage LoadImage(const std::string& path);
GrayImage ReadPgm(const std::string& path);
GrayImage ReadPng(const std::string& path);
void WritePgm(const GrayImage& image, const std::string& path);

}  // namespace fishlen
