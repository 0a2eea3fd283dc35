// SPDX-License-Identifier: Apache-2.0
#include "nre/data/dataset.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "nre/core/error.hpp"

namespace nre::data {

Tensor<float> Dataset::flat() const { return images.reshaped({size(), pixels()}); }

Tensor<float> Dataset::batch(std::span<const std::size_t> indices) const {
  return images.gather_rows(indices).reshaped({indices.size(), pixels()});
}

Dataset Dataset::subset(std::span<const std::size_t> indices, std::string new_name) const {
  if (indices.empty()) throw DataError("empty subset of " + name);
  Dataset out;
  out.images = images.gather_rows(indices);
  out.name = new_name.empty() ? name : std::move(new_name);
  if (labels) {
    std::vector<int> l;
    l.reserve(indices.size());
    for (auto i : indices) l.push_back((*labels)[i]);
    out.labels = std::move(l);
  }
  if (!source_index.empty()) {
    for (auto i : indices) out.source_index.push_back(source_index[i]);
  }
  return out;
}

std::size_t Dataset::class_count() const {
  if (!labels) return 0;
  return std::set<int>(labels->begin(), labels->end()).size();
}

void Dataset::validate() const {
  if (images.rank() != 3) throw DataError("dataset images must be (Z, H, W), got " + to_string(images.shape()));
  for (auto v : images.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw DataError("pixel value outside [0,1] in " + name);
  }
  if (labels && labels->size() != size()) {
    throw DataError("label count " + std::to_string(labels->size()) + " != image count " + std::to_string(size()));
  }
  if (!source_index.empty() && source_index.size() != size()) throw DataError("source index length mismatch");
}

}  // namespace nre::data
