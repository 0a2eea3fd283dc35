// SPDX-License-Identifier: Apache-2.0
#include "nre/train/model.hpp"

#include <cmath>
#include <sstream>

#include "nre/core/error.hpp"
#include "nre/core/rng.hpp"

namespace nre::train {

LossWeights::LossWeights(double self, double near, double far) : self_(self), near_(near), far_(far) {
  if (!(self >= 0.0 && near >= 0.0 && far >= 0.0)) throw ConfigError("loss weights must be nonnegative");
  if (std::abs(self + near + far - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "loss weights must sum to 1, got " << self << " + " << near << " + " << far;
    throw ConfigError(msg.str());
  }
}

void Architecture::validate() const {
  if (encoder_dims.size() < 2) throw ConfigError("architecture needs at least input and latent widths");
  for (auto d : encoder_dims) {
    if (d == 0) throw ConfigError("architecture widths must be positive");
  }
}

std::string Architecture::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < encoder_dims.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(encoder_dims[i]);
  }
  return out;
}

Architecture Architecture::parse(const std::string& text) {
  Architecture arch;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      arch.encoder_dims.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad architecture entry '" + item + "' in '" + text + "'");
    }
  }
  arch.validate();
  return arch;
}

template <typename T>
Autoencoder<T> Autoencoder<T>::build(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  std::vector<std::size_t> rev(arch.encoder_dims.rbegin(), arch.encoder_dims.rend());
  Autoencoder ae{Network<T>::mlp(arch.encoder_dims, LayerKind::relu, LayerKind::relu),
                 Network<T>::mlp(rev, LayerKind::relu, LayerKind::sigmoid)};
  ae.encoder.init_glorot(mix_seed(seed, 1));
  ae.decoder.init_glorot(mix_seed(seed, 2));
  return ae;
}

template <typename T>
Architecture Autoencoder<T>::architecture() const {
  Architecture arch;
  for (const auto& layer : encoder.layers()) {
    if (layer.has_parameters()) {
      if (arch.encoder_dims.empty()) arch.encoder_dims.push_back(layer.in_dim());
      arch.encoder_dims.push_back(layer.out_dim());
    }
  }
  return arch;
}

template struct Autoencoder<float>;
template struct Autoencoder<double>;

}  // namespace nre::train
