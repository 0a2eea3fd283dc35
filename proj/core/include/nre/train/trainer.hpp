// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nre/data/dataset.hpp"
#include "nre/train/model.hpp"

namespace nre::train {

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;
  double term1 = 0.0;
  double term2 = 0.0;
  double term3 = 0.0;
  double wall_ms = 0.0;

  /// One JSON-lines record: epoch, loss, term1, term2, term3, wall_ms.
  std::string to_json_line() const;
};

using MetricsSink = std::function<void(const EpochMetrics&)>;

struct PretrainConfig {
  Architecture architecture{{784, 256, 32}};
  std::size_t epochs = 40;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

using AutoencoderHook = std::function<void(const Autoencoder<float>&, std::size_t epoch)>;

/// Plain autoencoder trained on mean squared pixel error with Adam.
/// `on_epoch` sees the parameters at the end of every epoch.
Autoencoder<float> pretrain_ae(const data::Dataset& ds, const PretrainConfig& cfg, const MetricsSink& sink = {},
                               const AutoencoderHook& on_epoch = {});

enum class QueryMode { by_reconstruction, by_input };
enum class MiningMethod { clustered, exhaustive };

std::string to_string(QueryMode mode);
QueryMode parse_query_mode(const std::string& text);

struct TrainConfig {
  std::size_t neighbor_count = 1;  // T
  std::size_t cluster_count = 10;  // K
  double learning_rate = 1e-4;
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  std::size_t refresh_interval = 1;
  std::uint64_t seed = 0;
  QueryMode query_mode = QueryMode::by_reconstruction;
  /// Also drop the query's own row when mining from its reconstruction.
  bool exclude_self = false;
  bool normalize_by_t = false;
  MiningMethod mining = MiningMethod::clustered;
  std::size_t kmeans_iters = 100;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct NREModel {
  Autoencoder<float> ae;      // E_phi + D
  Network<float> similarity;  // frozen A
  LossWeights weights{1.0, 0.0, 0.0};
  TrainConfig config;

  Tensor<float> encode(const Tensor<float>& x) const { return ae.encode(x); }
  Tensor<float> reconstruct(const Tensor<float>& x) const { return ae.reconstruct(x); }
};

/// Mined row indices for every training sample at one refresh; each inner
/// vector holds neighbor_count entries.
struct MiningRecord {
  std::size_t epoch = 0;
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<std::vector<std::size_t>> farthest;
};

using MiningSink = std::function<void(const MiningRecord&)>;
using ModelHook = std::function<void(const NREModel&, std::size_t epoch)>;

/// Fine-tunes a copy of `pretrained` with the neighbourhood-relational loss.
/// The pretrained encoder is also frozen into the similarity encoder A, whose
/// latent table over `ds` is built once; neighbours and far samples are
/// re-mined every refresh_interval epochs.
NREModel train_nre(const Autoencoder<float>& pretrained, const data::Dataset& ds, const TrainConfig& cfg,
                   const LossWeights& weights, const MetricsSink& sink = {}, const MiningSink& mining_sink = {},
                   const ModelHook& on_epoch = {});

/// Mean over samples of the summed squared pixel error ||X - X~||^2.
double mean_reconstruction_error(const Autoencoder<float>& ae, const data::Dataset& ds);

}  // namespace nre::train
