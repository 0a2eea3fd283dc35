// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "nre/core/error.hpp"
#include "nre/data/dataset.hpp"

namespace nre::data {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset, const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) throw DataError("truncated header in " + path.string());
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

std::uint8_t to_byte(float v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)); }

}  // namespace

Dataset load_idx(const std::filesystem::path& image_path, const std::optional<std::filesystem::path>& label_path) {
  const auto bytes = read_file(image_path);
  const auto magic = read_be32(bytes, 0, image_path);
  if (magic != kImageMagic) throw DataError("wrong magic in image file " + image_path.string());
  const std::size_t count = read_be32(bytes, 4, image_path);
  const std::size_t rows = read_be32(bytes, 8, image_path);
  const std::size_t cols = read_be32(bytes, 12, image_path);
  if (count == 0 || rows == 0 || cols == 0) throw DataError("zero dimension in " + image_path.string());
  const std::size_t payload = count * rows * cols;
  if (bytes.size() < 16 + payload) throw DataError("truncated payload in " + image_path.string());

  std::vector<float> pixels(payload);
  for (std::size_t i = 0; i < payload; ++i) pixels[i] = static_cast<float>(bytes[16 + i]) / 255.0f;

  Dataset ds;
  ds.images = Tensor<float>({count, rows, cols}, std::move(pixels));
  ds.name = image_path.filename().string();

  if (label_path) {
    const auto lb = read_file(*label_path);
    if (read_be32(lb, 0, *label_path) != kLabelMagic) {
      throw DataError("wrong magic in label file " + label_path->string());
    }
    const std::size_t n = read_be32(lb, 4, *label_path);
    if (lb.size() < 8 + n) throw DataError("truncated payload in " + label_path->string());
    if (n != count) {
      throw DataError("image/label count mismatch: " + std::to_string(count) + " images, " + std::to_string(n) +
                      " labels");
    }
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = lb[8 + i];
    ds.labels = std::move(labels);
  }
  return ds;
}

void save_idx(const Dataset& ds, const std::filesystem::path& image_path,
              const std::optional<std::filesystem::path>& label_path) {
  ds.validate();
  {
    std::ofstream out(image_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + image_path.string());
    write_be32(out, kImageMagic);
    write_be32(out, static_cast<std::uint32_t>(ds.size()));
    write_be32(out, static_cast<std::uint32_t>(ds.height()));
    write_be32(out, static_cast<std::uint32_t>(ds.width()));
    std::vector<char> payload(ds.images.size());
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(to_byte(ds.images[i]));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  }
  if (label_path) {
    if (!ds.labels) throw DataError("dataset " + ds.name + " has no labels to save");
    std::ofstream out(*label_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + label_path->string());
    write_be32(out, kLabelMagic);
    write_be32(out, static_cast<std::uint32_t>(ds.labels->size()));
    for (int l : *ds.labels) {
      if (l < 0 || l > 255) throw DataError("label does not fit an unsigned byte");
      out.put(static_cast<char>(l));
    }
  }
}

}  // namespace nre::data
