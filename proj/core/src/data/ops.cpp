// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "nre/core/error.hpp"
#include "nre/core/rng.hpp"
#include "nre/data/dataset.hpp"

namespace nre::data {

Dataset synth_blobs(std::size_t n_classes, std::size_t per_class, std::size_t dim, double separation,
                    std::uint64_t seed) {
  if (!(separation > 0.0)) throw ConfigError("synth_blobs: separation must be positive");
  if (n_classes == 0 || per_class == 0 || dim == 0) throw ConfigError("synth_blobs: sizes must be positive");
  constexpr double kNoise = 0.05;
  auto rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::vector<double>> centers(n_classes, std::vector<double>(dim));
  for (auto& c : centers) {
    for (auto& v : c) v = 0.5 + separation * kNoise * normal(rng);
  }
  std::vector<float> pixels;
  pixels.reserve(n_classes * per_class * dim);
  std::vector<int> labels;
  for (std::size_t k = 0; k < n_classes; ++k) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        pixels.push_back(static_cast<float>(std::clamp(centers[k][j] + kNoise * normal(rng), 0.0, 1.0)));
      }
      labels.push_back(static_cast<int>(k));
    }
  }
  Dataset ds;
  ds.images = Tensor<float>({n_classes * per_class, 1, dim}, std::move(pixels));
  ds.labels = std::move(labels);
  ds.name = "blobs";
  return ds;
}

Split split(const Dataset& ds, const SplitSpec& spec) {
  const auto z = ds.size();
  const auto wanted = spec.train + spec.test + spec.substitute;
  if (wanted > z) {
    throw ConfigError("split asks for " + std::to_string(wanted) + " samples but dataset has " + std::to_string(z));
  }
  if (spec.train == 0) throw ConfigError("split needs a non-empty training set");
  auto rng = make_rng(spec.seed);

  std::vector<std::size_t> order(z);
  std::iota(order.begin(), order.end(), 0);
  if (ds.labels) {
    // Shuffle within each class, then interleave by relative rank so every
    // prefix of `order` keeps the class proportions.
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < z; ++i) by_class[(*ds.labels)[i]].push_back(i);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    std::vector<std::pair<double, std::size_t>> keyed;
    keyed.reserve(z);
    for (auto& [label, members] : by_class) {
      std::shuffle(members.begin(), members.end(), rng);
      const double n = static_cast<double>(members.size());
      for (std::size_t r = 0; r < members.size(); ++r) {
        keyed.emplace_back((static_cast<double>(r) + jitter(rng)) / n, members[r]);
      }
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t i = 0; i < z; ++i) order[i] = keyed[i].second;
  } else {
    std::shuffle(order.begin(), order.end(), rng);
  }

  auto take = [&order](std::size_t from, std::size_t count) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(from),
                                 order.begin() + static_cast<std::ptrdiff_t>(from + count));
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  Split out;
  out.train_indices = take(0, spec.train);
  out.test_indices = take(spec.train, spec.test);
  out.substitute_indices = take(spec.train + spec.test, spec.substitute);
  out.train = ds.subset(out.train_indices, ds.name + ":train");
  if (spec.test > 0) out.test = ds.subset(out.test_indices, ds.name + ":test");
  if (spec.substitute > 0) out.substitute = ds.subset(out.substitute_indices, ds.name + ":substitute");
  return out;
}

Batcher::Batcher(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed)
    : size_(dataset_size), batch_size_(batch_size), seed_(seed) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
}

std::size_t Batcher::batches_per_epoch() const noexcept { return (size_ + batch_size_ - 1) / batch_size_; }

std::vector<std::vector<std::size_t>> Batcher::epoch(std::size_t epoch_index) const {
  std::vector<std::size_t> order(size_);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(seed_, epoch_index);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(batches_per_epoch());
  for (std::size_t start = 0; start < size_; start += batch_size_) {
    const auto end = std::min(size_, start + batch_size_);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

Dataset extract_patches(const Dataset& ds, std::size_t patch_h, std::size_t patch_w, std::size_t stride) {
  if (patch_h == 0 || patch_w == 0 || stride == 0) throw ConfigError("patch sizes and stride must be positive");
  const auto h = ds.height();
  const auto w = ds.width();
  if (patch_h > h || patch_w > w) {
    throw ConfigError("patch " + std::to_string(patch_h) + "x" + std::to_string(patch_w) + " larger than image " +
                      std::to_string(h) + "x" + std::to_string(w));
  }
  std::vector<float> pixels;
  std::vector<std::size_t> source;
  std::vector<int> labels;
  for (std::size_t n = 0; n < ds.size(); ++n) {
    const float* img = ds.images.data() + n * h * w;
    for (std::size_t y = 0; y + patch_h <= h; y += stride) {
      for (std::size_t x = 0; x + patch_w <= w; x += stride) {
        for (std::size_t r = 0; r < patch_h; ++r) {
          const float* src = img + (y + r) * w + x;
          pixels.insert(pixels.end(), src, src + patch_w);
        }
        source.push_back(ds.source_index.empty() ? n : ds.source_index[n]);
        if (ds.labels) labels.push_back((*ds.labels)[n]);
      }
    }
  }
  Dataset out;
  out.images = Tensor<float>({source.size(), patch_h, patch_w}, std::move(pixels));
  out.source_index = std::move(source);
  if (ds.labels) out.labels = std::move(labels);
  out.name = ds.name + ":patches";
  return out;
}

}  // namespace nre::data
