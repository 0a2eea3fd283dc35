// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nre/core/tensor.hpp"

namespace nre::data {

/// Grayscale image collection, pixels in [0,1], images shaped (Z, H, W).
struct Dataset {
  Tensor<float> images;
  std::optional<std::vector<int>> labels;
  std::string name;
  /// Originating image for each row when the dataset was cut into patches.
  std::vector<std::size_t> source_index;

  std::size_t size() const noexcept { return images.empty() ? 0 : images.dim(0); }
  std::size_t height() const { return images.dim(1); }
  std::size_t width() const { return images.dim(2); }
  std::size_t pixels() const { return height() * width(); }

  /// (Z, H*W) view used as network input.
  Tensor<float> flat() const;
  /// Flattened rows for the given indices, shape (n, H*W).
  Tensor<float> batch(std::span<const std::size_t> indices) const;
  Dataset subset(std::span<const std::size_t> indices, std::string new_name = {}) const;
  /// Indices whose label satisfies the predicate; throws without labels.
  template <typename Pred>
  std::vector<std::size_t> indices_where(Pred pred) const;
  std::size_t class_count() const;

  /// Throws DataError on pixel-range or label-length violations.
  void validate() const;
};

template <typename Pred>
std::vector<std::size_t> Dataset::indices_where(Pred pred) const {
  std::vector<std::size_t> out;
  if (!labels) return out;
  for (std::size_t i = 0; i < labels->size(); ++i) {
    if (pred((*labels)[i])) out.push_back(i);
  }
  return out;
}

// IDX (MNIST) files: big-endian magic 0x00000803 / 0x00000801, big-endian
// dimension sizes, unsigned-byte payload.
Dataset load_idx(const std::filesystem::path& image_path,
                 const std::optional<std::filesystem::path>& label_path = std::nullopt);
void save_idx(const Dataset& ds, const std::filesystem::path& image_path,
              const std::optional<std::filesystem::path>& label_path = std::nullopt);

/// Directory of binary P5 PGM files, read in lexicographic filename order.
Dataset load_pgm_folder(const std::filesystem::path& dir);
void save_pgm(const std::filesystem::path& path, std::span<const float> pixels, std::size_t height,
              std::size_t width);

/// Gaussian blobs (noise std 0.05) around per-class centres offset from 0.5
/// by separation * 0.05 * N(0, I), clipped to [0,1]; images are (Z, 1, dim).
Dataset synth_blobs(std::size_t n_classes, std::size_t per_class, std::size_t dim, double separation,
                    std::uint64_t seed);

struct SplitSpec {
  std::size_t train = 0;
  std::size_t test = 0;
  std::size_t substitute = 0;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset test;
  std::optional<Dataset> substitute;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::vector<std::size_t> substitute_indices;
};

/// Seeded, disjoint, stratified by label when labels are present.
Split split(const Dataset& ds, const SplitSpec& spec);

/// Seeded per-epoch shuffle into mini-batches; the last batch may be short.
class Batcher {
 public:
  Batcher(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed);

  /// Index batches for one epoch. Same (seed, epoch) gives the same order.
  std::vector<std::vector<std::size_t>> epoch(std::size_t epoch_index) const;
  std::size_t batches_per_epoch() const noexcept;

 private:
  std::size_t size_;
  std::size_t batch_size_;
  std::uint64_t seed_;
};

/// Sliding-window patches of every image; labels (if any) are inherited and
/// source_index records the originating image.
Dataset extract_patches(const Dataset& ds, std::size_t patch_h, std::size_t patch_w, std::size_t stride);

}  // namespace nre::data
