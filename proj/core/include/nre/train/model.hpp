// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nre/core/network.hpp"

namespace nre::train {

/// (lambda1, lambda2, lambda3) of the neighbourhood-relational loss: weight of
/// the self term, the near-neighbour term and the far-sample term.
class LossWeights {
 public:
  /// Throws ConfigError unless all three are >= 0 and sum to 1 (within 1e-9).
  LossWeights(double self, double near, double far);

  double self() const noexcept { return self_; }
  double near() const noexcept { return near_; }
  double far() const noexcept { return far_; }
  /// Mining can be skipped when both relational terms are off.
  bool needs_mining() const noexcept { return near_ > 0.0 || far_ > 0.0; }
  /// lambda1 strictly dominating the other two.
  bool self_dominant() const noexcept { return self_ > near_ && self_ > far_; }

  friend bool operator==(const LossWeights&, const LossWeights&) = default;

 private:
  double self_;
  double near_;
  double far_;
};

/// Fully-connected encoder widths, input first, latent last, e.g. {784, 256, 32}.
/// The decoder mirrors them. Hidden units and the latent are relu; the
/// decoder output is sigmoid.
struct Architecture {
  std::vector<std::size_t> encoder_dims;

  std::size_t input_dim() const { return encoder_dims.front(); }
  std::size_t latent_dim() const { return encoder_dims.back(); }
  void validate() const;
  std::string to_string() const;
  static Architecture parse(const std::string& text);

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

template <typename T>
struct Autoencoder {
  Network<T> encoder;
  Network<T> decoder;

  static Autoencoder build(const Architecture& arch, std::uint64_t seed);

  Tensor<T> encode(const Tensor<T>& x) const { return encoder.infer(x); }
  Tensor<T> reconstruct(const Tensor<T>& x) const { return decoder.infer(encoder.infer(x)); }
  Architecture architecture() const;

  template <typename U>
  Autoencoder<U> cast() const {
    return {encoder.template cast<U>(), decoder.template cast<U>()};
  }
};

extern template struct Autoencoder<float>;
extern template struct Autoencoder<double>;

}  // namespace nre::train
