// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "nre/core/error.hpp"
#include "nre/data/dataset.hpp"

namespace nre::data {

namespace {

struct Pgm {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> pixels;
};

std::size_t read_header_int(const std::vector<unsigned char>& bytes, std::size_t& pos, const std::string& file) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t v = 0;
  bool any = false;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    v = v * 10 + (bytes[pos++] - '0');
    any = true;
  }
  if (!any) throw DataError("malformed PGM header in " + file);
  return v;
}

Pgm read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw DataError("wrong magic in " + path.string() + " (expected binary P5 PGM)");
  }
  std::size_t pos = 2;
  Pgm img;
  img.width = read_header_int(bytes, pos, path.string());
  img.height = read_header_int(bytes, pos, path.string());
  const auto maxval = read_header_int(bytes, pos, path.string());
  if (maxval == 0 || maxval > 255) throw DataError("only 8-bit PGM is supported: " + path.string());
  if (img.width == 0 || img.height == 0) throw DataError("zero-sized PGM: " + path.string());
  ++pos;  // single whitespace before the raster
  const auto n = img.width * img.height;
  if (bytes.size() < pos + n) throw DataError("truncated payload in " + path.string());
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    img.pixels[i] = std::min(1.0f, static_cast<float>(bytes[pos + i]) / static_cast<float>(maxval));
  }
  return img;
}

}  // namespace

Dataset load_pgm_folder(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  if (files.empty()) throw DataError("no .pgm files in " + dir.string());
  std::sort(files.begin(), files.end());

  std::vector<float> pixels;
  std::size_t h = 0;
  std::size_t w = 0;
  for (const auto& f : files) {
    auto img = read_pgm(f);
    if (h == 0) {
      h = img.height;
      w = img.width;
    } else if (img.height != h || img.width != w) {
      throw DataError("image " + f.string() + " is " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                      ", expected " + std::to_string(h) + "x" + std::to_string(w));
    }
    pixels.insert(pixels.end(), img.pixels.begin(), img.pixels.end());
  }
  Dataset ds;
  ds.images = Tensor<float>({files.size(), h, w}, std::move(pixels));
  ds.name = dir.filename().string();
  return ds;
}

void save_pgm(const std::filesystem::path& path, std::span<const float> pixels, std::size_t height,
              std::size_t width) {
  if (pixels.size() != height * width) throw ShapeError("pgm pixel count does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << width << " " << height << "\n255\n";
  for (auto v : pixels) out.put(static_cast<char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
}

}  // namespace nre::data
