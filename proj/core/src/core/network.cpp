// SPDX-License-Identifier: Apache-2.0
#include "nre/core/network.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include "nre/core/error.hpp"

namespace nre {

template <typename T>
Network<T>::Network(std::vector<Layer<T>> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i - 1].out_dim() != layers_[i].in_dim()) {
      throw ShapeError("layer " + std::to_string(i) + " expects width " + std::to_string(layers_[i].in_dim()) +
                       " but previous layer produces " + std::to_string(layers_[i - 1].out_dim()));
    }
  }
}

template <typename T>
Network<T> Network<T>::mlp(std::span<const std::size_t> dims, LayerKind hidden,
                           std::optional<LayerKind> output) {
  if (dims.size() < 2) throw ShapeError("an mlp needs at least input and output widths");
  std::vector<Layer<T>> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    layers.push_back(Layer<T>::affine(dims[i], dims[i + 1]));
    const bool last = i + 2 == dims.size();
    if (!last) {
      layers.push_back(Layer<T>::activation(hidden, dims[i + 1]));
    } else if (output) {
      layers.push_back(Layer<T>::activation(*output, dims[i + 1]));
    }
  }
  return Network(std::move(layers));
}

template <typename T>
void Network<T>::init_glorot(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& layer : mutable_layers()) {
    if (!layer.has_parameters()) continue;
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in_dim() + layer.out_dim()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& w : layer.weight().values()) w = static_cast<T>(dist(rng));
    for (auto& b : layer.bias().values()) b = T{0};
  }
}

template <typename T>
std::size_t Network<T>::input_dim() const {
  if (layers_.empty()) throw ShapeError("empty network");
  return layers_.front().in_dim();
}

template <typename T>
std::size_t Network<T>::output_dim() const {
  if (layers_.empty()) throw ShapeError("empty network");
  return layers_.back().out_dim();
}

template <typename T>
std::vector<Layer<T>>& Network<T>::mutable_layers() {
  if (frozen_) throw ShapeError("frozen network parameters are read-only");
  return layers_;
}

template <typename T>
Tensor<T> Network<T>::flatten_input(const Tensor<T>& batch) const {
  if (batch.empty()) throw ShapeError("empty batch");
  if (batch.cols() != input_dim()) {
    throw ShapeError("batch " + to_string(batch.shape()) + " does not match network input width " +
                     std::to_string(input_dim()));
  }
  if (batch.rank() == 2) return batch;
  return batch.reshaped({batch.rows(), batch.cols()});
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& batch) {
  auto x = flatten_input(batch);
  for (auto& layer : layers_) x = layer.forward(x);
  return x;
}

template <typename T>
Tensor<T> Network<T>::infer(const Tensor<T>& batch) const {
  auto x = flatten_input(batch);
  for (const auto& layer : layers_) x = layer.apply(x);
  return x;
}

template <typename T>
Tensor<T> Network<T>::backward_impl(const Tensor<T>& upstream, bool param_grads) {
  if (layers_.empty()) throw ShapeError("empty network");
  if (!layers_.back().has_cache()) throw ShapeError("backward called before forward");
  Tensor<T> g = upstream;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = it->backward(g, param_grads);
  return g;
}

template <typename T>
Gradients<T> Network<T>::backward(const Tensor<T>& upstream) {
  Gradients<T> out;
  out.input = backward_impl(upstream, true);
  for (const auto& layer : layers_) {
    if (!layer.has_parameters()) continue;
    out.params.push_back(layer.weight_grad());
    out.params.push_back(layer.bias_grad());
  }
  return out;
}

template <typename T>
Tensor<T> Network<T>::backward_input(const Tensor<T>& upstream) {
  return backward_impl(upstream, false);
}

template <typename T>
std::vector<const Tensor<T>*> Network<T>::parameters() const {
  std::vector<const Tensor<T>*> out;
  for (const auto& layer : layers_) {
    if (!layer.has_parameters()) continue;
    out.push_back(&layer.weight());
    out.push_back(&layer.bias());
  }
  return out;
}

template <typename T>
std::vector<Tensor<T>*> Network<T>::mutable_parameters() {
  std::vector<Tensor<T>*> out;
  for (auto& layer : mutable_layers()) {
    if (!layer.has_parameters()) continue;
    out.push_back(&layer.weight());
    out.push_back(&layer.bias());
  }
  return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->size();
  return n;
}

template <typename T>
std::uint64_t Network<T>::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* bytes, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& layer : layers_) {
    const std::uint64_t header[3] = {static_cast<std::uint64_t>(layer.kind()), layer.in_dim(), layer.out_dim()};
    mix(header, sizeof(header));
    if (!layer.has_parameters()) continue;
    // Hash as float so float and double copies of one network agree.
    for (const auto* t : {&layer.weight(), &layer.bias()}) {
      for (auto v : t->values()) {
        const float f = static_cast<float>(v);
        mix(&f, sizeof(f));
      }
    }
  }
  return h;
}

template class Network<float>;
template class Network<double>;

}  // namespace nre
