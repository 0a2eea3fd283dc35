// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nre/core/tensor.hpp"

namespace nre {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  std::vector<Tensor<T>> first_moment;
  std::vector<Tensor<T>> second_moment;
  std::uint64_t step = 0;

  AdamState() = default;
  explicit AdamState(AdamConfig cfg) : config(cfg) {}
};

/// One bias-corrected Adam update. Moments are allocated on the first call
/// and must keep mirroring `params` afterwards.
template <typename T>
void adam_step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads,
               AdamState<T>& state);

extern template void adam_step<float>(std::span<Tensor<float>* const>, std::span<const Tensor<float>>,
                                      AdamState<float>&);
extern template void adam_step<double>(std::span<Tensor<double>* const>,
                                       std::span<const Tensor<double>>, AdamState<double>&);

}  // namespace nre
