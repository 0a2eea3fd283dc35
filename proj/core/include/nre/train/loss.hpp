// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "nre/core/network.hpp"
#include "nre/train/model.hpp"

namespace nre::train {

template <typename T>
struct LossResult {
  /// Batch mean of the per-sample loss; terms are the weighted contributions
  /// and add up to `loss`.
  double loss = 0.0;
  double term1 = 0.0;
  double term2 = 0.0;
  double term3 = 0.0;
  std::vector<Tensor<T>> encoder_grads;
  std::vector<Tensor<T>> decoder_grads;
  Tensor<T> reconstruction;
};

/// Neighbourhood-relational loss for a batch X of B samples:
///
///   l1 * D(A(X), A(X')) + l2 * sum_i D(A(X'), A(X0_i)) + l3 * sum_i S(A(X'), A(Xinf_i))
///
/// with X' = decoder(encoder(X)), S the cosine similarity and D = 1 - S.
/// Neighbour/far latents are (B*T, d), rows b*T..b*T+T-1 belonging to sample
/// b; they may be empty when l2 = l3 = 0. Gradients run back through the
/// frozen similarity encoder into decoder and encoder; the similarity
/// encoder's parameters are never touched. `normalize_by_t` divides the two
/// sums by T.
template <typename T>
LossResult<T> nre_loss(const Tensor<T>& x, Network<T>& encoder, Network<T>& decoder, Network<T>& similarity,
                       const Tensor<T>& neighbor_latents, const Tensor<T>& far_latents, std::size_t t,
                       const LossWeights& weights, bool normalize_by_t = false);

/// Mean squared pixel error and its gradient wrt the autoencoder parameters.
template <typename T>
LossResult<T> reconstruction_loss(const Tensor<T>& x, Network<T>& encoder, Network<T>& decoder);

extern template LossResult<float> nre_loss<float>(const Tensor<float>&, Network<float>&, Network<float>&,
                                                  Network<float>&, const Tensor<float>&, const Tensor<float>&,
                                                  std::size_t, const LossWeights&, bool);
extern template LossResult<double> nre_loss<double>(const Tensor<double>&, Network<double>&, Network<double>&,
                                                    Network<double>&, const Tensor<double>&, const Tensor<double>&,
                                                    std::size_t, const LossWeights&, bool);
extern template LossResult<float> reconstruction_loss<float>(const Tensor<float>&, Network<float>&, Network<float>&);
extern template LossResult<double> reconstruction_loss<double>(const Tensor<double>&, Network<double>&,
                                                               Network<double>&);

}  // namespace nre::train
