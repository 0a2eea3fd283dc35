// SPDX-License-Identifier: Apache-2.0
#include "nre/train/loss.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "nre/core/error.hpp"

namespace nre::train {

namespace {

/// Adds coeff * dS(a, b)/da to grad and returns S(a, b); S is 0 (with zero
/// gradient) when either vector vanishes.
template <typename T>
double cosine_accumulate(std::span<const T> a, std::span<const T> b, double coeff, std::span<double> grad) {
  double dot = 0.0;
  double na2 = 0.0;
  double nb2 = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double x = a[j];
    const double y = b[j];
    dot += x * y;
    na2 += x * x;
    nb2 += y * y;
  }
  if (na2 == 0.0 || nb2 == 0.0) return 0.0;
  const double na = std::sqrt(na2);
  const double nb = std::sqrt(nb2);
  const double s = dot / (na * nb);
  if (coeff != 0.0) {
    const double inv = 1.0 / (na * nb);
    const double proj = s / na2;
    for (std::size_t j = 0; j < a.size(); ++j) {
      grad[j] += coeff * (static_cast<double>(b[j]) * inv - proj * static_cast<double>(a[j]));
    }
  }
  return std::clamp(s, 0.0, 1.0);
}

template <typename T>
void check_mined(const Tensor<T>& mined, std::size_t batch, std::size_t t, std::size_t d, const char* what) {
  if (mined.empty() || mined.rows() != batch * t || mined.cols() != d) {
    throw ShapeError(std::string(what) + " latents must be (" + std::to_string(batch * t) + ", " + std::to_string(d) +
                     "), got " + to_string(mined.shape()));
  }
}

}  // namespace

template <typename T>
LossResult<T> nre_loss(const Tensor<T>& x, Network<T>& encoder, Network<T>& decoder, Network<T>& similarity,
                       const Tensor<T>& neighbor_latents, const Tensor<T>& far_latents, std::size_t t,
                       const LossWeights& weights, bool normalize_by_t) {
  const auto batch = x.rows();
  auto recon = decoder.forward(encoder.forward(x));
  const auto anchor = similarity.infer(x);
  const auto latent = similarity.forward(recon);
  const auto d = latent.cols();

  if (weights.needs_mining()) {
    if (t == 0) throw ShapeError("relational loss terms need T >= 1");
    if (weights.near() > 0.0) check_mined(neighbor_latents, batch, t, d, "neighbour");
    if (weights.far() > 0.0) check_mined(far_latents, batch, t, d, "far");
  }

  const double per_t = normalize_by_t && t > 0 ? 1.0 / static_cast<double>(t) : 1.0;
  const double per_batch = 1.0 / static_cast<double>(batch);
  const double l1 = weights.self();
  const double l2 = weights.near() * per_t;
  const double l3 = weights.far() * per_t;

  LossResult<T> out;
  std::vector<double> grad(d);
  Tensor<T> latent_grad({batch, d});
  for (std::size_t b = 0; b < batch; ++b) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const auto rp = latent.row(b);
    if (l1 > 0.0) out.term1 += l1 * (1.0 - cosine_accumulate(rp, anchor.row(b), -l1, std::span<double>(grad)));
    for (std::size_t i = 0; i < t && l2 > 0.0; ++i) {
      out.term2 += l2 * (1.0 - cosine_accumulate(rp, neighbor_latents.row(b * t + i), -l2, std::span<double>(grad)));
    }
    for (std::size_t i = 0; i < t && l3 > 0.0; ++i) {
      out.term3 += l3 * cosine_accumulate(rp, far_latents.row(b * t + i), l3, std::span<double>(grad));
    }
    for (std::size_t j = 0; j < d; ++j) latent_grad.at(b, j) = static_cast<T>(grad[j] * per_batch);
  }
  out.term1 *= per_batch;
  out.term2 *= per_batch;
  out.term3 *= per_batch;
  out.loss = out.term1 + out.term2 + out.term3;
  if (!std::isfinite(out.loss)) throw NumericError("non-finite relational loss");

  const auto recon_grad = similarity.backward_input(latent_grad);
  auto dec = decoder.backward(recon_grad);
  auto enc = encoder.backward(dec.input);
  out.decoder_grads = std::move(dec.params);
  out.encoder_grads = std::move(enc.params);
  out.reconstruction = std::move(recon);
  return out;
}

template <typename T>
LossResult<T> reconstruction_loss(const Tensor<T>& x, Network<T>& encoder, Network<T>& decoder) {
  auto recon = decoder.forward(encoder.forward(x));
  if (recon.size() != x.size()) throw ShapeError("reconstruction width does not match input");
  const double scale = 1.0 / static_cast<double>(x.size());
  Tensor<T> grad({x.rows(), x.cols()});
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = static_cast<double>(recon[i]) - static_cast<double>(x[i]);
    sum += diff * diff;
    grad[i] = static_cast<T>(2.0 * diff * scale);
  }
  LossResult<T> out;
  out.loss = sum * scale;
  out.term1 = out.loss;
  if (!std::isfinite(out.loss)) throw NumericError("non-finite reconstruction loss");
  auto dec = decoder.backward(grad);
  auto enc = encoder.backward(dec.input);
  out.decoder_grads = std::move(dec.params);
  out.encoder_grads = std::move(enc.params);
  out.reconstruction = std::move(recon);
  return out;
}

template LossResult<float> nre_loss<float>(const Tensor<float>&, Network<float>&, Network<float>&, Network<float>&,
                                           const Tensor<float>&, const Tensor<float>&, std::size_t,
                                           const LossWeights&, bool);
template LossResult<double> nre_loss<double>(const Tensor<double>&, Network<double>&, Network<double>&,
                                             Network<double>&, const Tensor<double>&, const Tensor<double>&,
                                             std::size_t, const LossWeights&, bool);
template LossResult<float> reconstruction_loss<float>(const Tensor<float>&, Network<float>&, Network<float>&);
template LossResult<double> reconstruction_loss<double>(const Tensor<double>&, Network<double>&, Network<double>&);

}  // namespace nre::train
