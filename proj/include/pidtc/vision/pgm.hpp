#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "pidtc/textio.hpp"
#include "pidtc/vision/image.hpp"

namespace pidtc::vision {

namespace detail {

// Token scanner for the PGM header; supports '#' comments, tracks lines.
struct PgmScanner {
  const std::string& text;
  std::size_t pos = 0;
  std::size_t line = 1;

  std::string next_token() {
    for (;;) {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
        if (text[pos] == '\n') ++line;
        ++pos;
      }
      if (pos < text.size() && text[pos] == '#') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= text.size()) throw ParseError("line " + std::to_string(line) + ": unexpected end of PGM header");
    std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    return text.substr(start, pos - start);
  }
};

}  // namespace detail

// Reads binary (P5) or ASCII (P2) PGM with maxval 255.
inline GrayImage parse_pgm(const std::string& bytes) {
  detail::PgmScanner sc{bytes};
  const std::string magic = sc.next_token();
  if (magic != "P5" && magic != "P2") {
    throw ParseError("line 1: unsupported PGM magic '" + magic + "' (want P5 or P2)");
  }
  const auto w = parse_int(sc.next_token(), sc.line);
  const auto h = parse_int(sc.next_token(), sc.line);
  const auto maxval = parse_int(sc.next_token(), sc.line);
  if (w <= 0 || h <= 0 || w > kMaxImageSide || h > kMaxImageSide) {
    throw ParseError("line " + std::to_string(sc.line) + ": image extent " + std::to_string(w) +
                     "x" + std::to_string(h) + " out of range");
  }
  if (maxval != 255) {
    throw ParseError("line " + std::to_string(sc.line) + ": unsupported maxval " +
                     std::to_string(maxval) + " (want 255)");
  }
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  const std::size_t count = img.pixels.size();
  if (magic == "P5") {
    // Exactly one whitespace byte separates the header from raster data.
    std::size_t data = sc.pos;
    if (data >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[data]))) {
      throw ParseError("line " + std::to_string(sc.line) + ": missing raster separator");
    }
    ++data;
    if (bytes.size() - data < count) {
      throw ParseError("line " + std::to_string(sc.line) + ": raster truncated (" +
                       std::to_string(bytes.size() - data) + " of " + std::to_string(count) +
                       " bytes)");
    }
    for (std::size_t i = 0; i < count; ++i) {
      img.pixels[i] = static_cast<double>(static_cast<unsigned char>(bytes[data + i]));
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = parse_int(sc.next_token(), sc.line);
      if (v < 0 || v > 255) {
        throw ParseError("line " + std::to_string(sc.line) + ": sample " + std::to_string(v) +
                         " outside [0, 255]");
      }
      img.pixels[i] = static_cast<double>(v);
    }
  }
  return img;
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
  return parse_pgm(read_text_file(path));
}

inline std::string serialize_pgm(const GrayImage& img, bool binary = true) {
  std::string out = binary ? "P5\n" : "P2\n";
  out += std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  if (binary) {
    out.reserve(out.size() + img.pixels.size());
    for (double v : img.pixels) {
      const double q = std::clamp(std::round(v), 0.0, 255.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
    }
  } else {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const double q = std::clamp(std::round(img.at(x, y)), 0.0, 255.0);
        if (x) out += " ";
        out += std::to_string(static_cast<int>(q));
      }
      out += "\n";
    }
  }
  return out;
}

inline void write_pgm(const std::filesystem::path& path, const GrayImage& img,
                      bool binary = true) {
  write_text_file(path, serialize_pgm(img, binary));
}

}  // namespace pidtc::vision
