// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "nre/core/tensor.hpp"

namespace nre {

enum class LayerKind { affine, relu, sigmoid, tanh };

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view name);

/// One differentiable stage of a Network.
///
/// Affine layers own a weight of shape (out_dim, in_dim) and a bias of shape
/// (out_dim) and compute y = x W^T + b row-wise. Activation layers are
/// parameter-free and elementwise. forward() caches what backward() needs;
/// apply() is the cache-free const variant used for inference.
template <typename T>
class Layer {
 public:
  static Layer affine(std::size_t in_dim, std::size_t out_dim);
  static Layer activation(LayerKind kind, std::size_t dim);

  LayerKind kind() const noexcept { return kind_; }
  std::size_t in_dim() const noexcept { return in_dim_; }
  std::size_t out_dim() const noexcept { return out_dim_; }
  bool has_parameters() const noexcept { return kind_ == LayerKind::affine; }

  Tensor<T>& weight() noexcept { return weight_; }
  const Tensor<T>& weight() const noexcept { return weight_; }
  Tensor<T>& bias() noexcept { return bias_; }
  const Tensor<T>& bias() const noexcept { return bias_; }
  const Tensor<T>& weight_grad() const noexcept { return weight_grad_; }
  const Tensor<T>& bias_grad() const noexcept { return bias_grad_; }

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> apply(const Tensor<T>& x) const;

  /// Returns dL/dx for the cached batch. When `param_grads` is set the
  /// weight/bias gradients are (re)computed as well.
  Tensor<T> backward(const Tensor<T>& upstream, bool param_grads = true);

  bool has_cache() const noexcept { return cached_input_.has_value(); }
  void clear_cache() noexcept;

  template <typename U>
  Layer<U> cast() const {
    Layer<U> out = kind_ == LayerKind::affine ? Layer<U>::affine(in_dim_, out_dim_)
                                              : Layer<U>::activation(kind_, in_dim_);
    if (kind_ == LayerKind::affine) {
      out.weight() = weight_.template cast<U>();
      out.bias() = bias_.template cast<U>();
    }
    return out;
  }

 private:
  Layer(LayerKind kind, std::size_t in_dim, std::size_t out_dim);

  LayerKind kind_;
  std::size_t in_dim_;
  std::size_t out_dim_;
  Tensor<T> weight_;
  Tensor<T> bias_;
  Tensor<T> weight_grad_;
  Tensor<T> bias_grad_;
  std::optional<Tensor<T>> cached_input_;
  std::optional<Tensor<T>> cached_output_;
};

extern template class Layer<float>;
extern template class Layer<double>;

}  // namespace nre
