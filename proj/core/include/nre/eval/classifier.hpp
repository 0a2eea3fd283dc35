// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nre/core/network.hpp"
#include "nre/data/dataset.hpp"

namespace nre::eval {

struct ProbeConfig {
  double l2 = 1e-4;
  std::size_t epochs = 40;
  double learning_rate = 1e-2;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
};

/// One-vs-rest linear classifier on standardised latents, trained with hinge
/// loss plus L2 through the numeric-core Adam optimiser.
class LinearProbe {
 public:
  LinearProbe() = default;
  LinearProbe(Network<float> scorer, std::vector<float> mean, std::vector<float> inv_std, std::vector<int> classes);

  std::vector<int> predict(const Tensor<float>& latents) const;
  double accuracy(const Tensor<float>& latents, std::span<const int> labels) const;
  /// (n_classes, d) weight of the scoring layer.
  const Tensor<float>& weight() const { return scorer_.layers().front().weight(); }
  const std::vector<int>& classes() const noexcept { return classes_; }

 private:
  Tensor<float> standardize(const Tensor<float>& latents) const;

  Network<float> scorer_;
  std::vector<float> mean_;
  std::vector<float> inv_std_;
  std::vector<int> classes_;
};

LinearProbe train_probe(const Tensor<float>& latents, std::span<const int> labels, const ProbeConfig& cfg);

struct ClassifierConfig {
  std::vector<std::size_t> hidden{256};
  std::size_t epochs = 10;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

/// Fully-connected softmax classifier over flattened pixels, labels 0..n_classes-1.
struct Classifier {
  Network<float> net;
  std::size_t n_classes = 0;

  std::vector<int> predict(const Tensor<float>& x) const;
  double accuracy(const Tensor<float>& x, std::span<const int> labels) const;
  /// Gradient of the mean cross-entropy with respect to the input pixels.
  Tensor<float> input_gradient(const Tensor<float>& x, std::span<const int> labels) const;
};

/// n_classes = 0 sizes the output layer from the largest label.
Classifier train_classifier(const data::Dataset& ds, const ClassifierConfig& cfg, std::size_t n_classes = 0);

/// Classifier trained on a small labelled budget to stand in for an unseen
/// target; throws DataError on fewer samples than classes or a single class.
Classifier train_substitute(const data::Dataset& ds, const ClassifierConfig& cfg, std::size_t n_classes = 10);

}  // namespace nre::eval
