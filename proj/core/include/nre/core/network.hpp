// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nre/core/layer.hpp"
#include "nre/core/tensor.hpp"

namespace nre {

template <typename T>
struct Gradients {
  /// Same order as Network::parameters().
  std::vector<Tensor<T>> params;
  Tensor<T> input;
};

/// Ordered stack of layers.
///
/// A frozen network still runs forward and propagates input gradients, but
/// refuses to hand out mutable parameters, so no optimiser can touch it.
/// Instances are not thread-safe: forward() mutates cached activations.
template <typename T>
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Layer<T>> layers);

  /// affine(dims[i] -> dims[i+1]) followed by `hidden` for every step except
  /// the last, which gets `output` (or nothing).
  static Network mlp(std::span<const std::size_t> dims, LayerKind hidden,
                     std::optional<LayerKind> output);

  /// Uniform(-sqrt(6/(fan_in+fan_out)), +...) weights, zero biases.
  void init_glorot(std::uint64_t seed);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t depth() const noexcept { return layers_.size(); }
  const std::vector<Layer<T>>& layers() const noexcept { return layers_; }
  /// Direct layer access for loading weights; throws when frozen.
  std::vector<Layer<T>>& mutable_layers();

  bool frozen() const noexcept { return frozen_; }
  void freeze() noexcept { frozen_ = true; }
  void unfreeze() noexcept { frozen_ = false; }

  /// Batch is (B, ...) with the trailing axes flattening to input_dim().
  /// Output is (B, output_dim()). Activations are cached for backward().
  Tensor<T> forward(const Tensor<T>& batch);
  Tensor<T> infer(const Tensor<T>& batch) const;

  Gradients<T> backward(const Tensor<T>& upstream);
  /// Input gradient only; skips weight-gradient work.
  Tensor<T> backward_input(const Tensor<T>& upstream);

  std::vector<const Tensor<T>*> parameters() const;
  std::vector<Tensor<T>*> mutable_parameters();
  std::size_t parameter_count() const;

  /// FNV-1a over architecture and raw parameter bytes.
  std::uint64_t fingerprint() const;

  template <typename U>
  Network<U> cast() const {
    std::vector<Layer<U>> layers;
    layers.reserve(layers_.size());
    for (const auto& l : layers_) layers.push_back(l.template cast<U>());
    Network<U> out(std::move(layers));
    if (frozen_) out.freeze();
    return out;
  }

 private:
  Tensor<T> flatten_input(const Tensor<T>& batch) const;
  Tensor<T> backward_impl(const Tensor<T>& upstream, bool param_grads);

  std::vector<Layer<T>> layers_;
  bool frozen_ = false;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace nre
