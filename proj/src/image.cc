#include "fishlen/image.h"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>

#include "fishlen/error.h"

namespace fishlen {

GrayImage::GrayImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

std::uint8_t Luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

namespace {

// Next whitespace-separated header token, skipping '#' comments.
std::string PgmToken(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

GrayImage ReadPgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path + "'");
  if (PgmToken(in) != "P5") throw ParseError(0, path, "not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(PgmToken(in));
    h = std::stoi(PgmToken(in));
    maxval = std::stoi(PgmToken(in));
  } catch (const std::exception&) {
    throw ParseError(0, path, "malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw ParseError(0, path, "unsupported PGM dimensions or maxval");
  GrayImage img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw ParseError(0, path, "truncated PGM data");
  if (maxval != 255)
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>((p * 255 + maxval / 2) / maxval);
  return img;
}

void WritePgm(const GrayImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image '" + path + "'");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

GrayImage ReadPng(const std::string& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str()))
    throw ParseError(0, path, std::string("cannot read PNG: ") + png.message);

  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&png);
    throw ParseError(0, path, std::string("cannot decode PNG: ") + png.message);
  }

  GrayImage img(static_cast<int>(png.width), static_cast<int>(png.height));
  if (!color) {
    img.pixels = std::move(buffer);
  } else {
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
      img.pixels[i] = Luma(buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]);
  }
  return img;
}

GrayImage LoadImage(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path + "'");
  char magic[8] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() >= 2 && magic[0] == 'P' && magic[1] == '5') return ReadPgm(path);
  if (in.gcount() == 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(magic), 0, 8) == 0)
    return ReadPng(path);
  throw ParseError(0, path, "unsupported image format (expected PGM P5 or PNG)");
}

}  // namespace fishlen
