// SPDX-License-Identifier: Apache-2.0
#include "nre/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nre/core/adam.hpp"
#include "nre/core/error.hpp"
#include "nre/core/rng.hpp"
#include "nre/similarity/exhaustive.hpp"
#include "nre/similarity/similarity.hpp"
#include "nre/train/loss.hpp"

namespace nre::train {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Aborts on a non-finite loss, or on a loss stuck above 10x its first-epoch
/// value for three epochs in a row.
class DivergenceGuard {
 public:
  void observe(std::size_t epoch, double loss) {
    if (!std::isfinite(loss)) throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch));
    if (!initial_) {
      initial_ = loss;
      return;
    }
    strikes_ = loss > 10.0 * *initial_ ? strikes_ + 1 : 0;
    if (strikes_ >= 3) {
      std::ostringstream msg;
      msg << "training diverged: loss " << loss << " at epoch " << epoch << " exceeds 10x the initial " << *initial_;
      throw NumericError(msg.str());
    }
  }

 private:
  std::optional<double> initial_;
  int strikes_ = 0;
};

void adam_update(Autoencoder<float>& ae, LossResult<float>& res, AdamState<float>& state) {
  auto params = ae.encoder.mutable_parameters();
  auto dec = ae.decoder.mutable_parameters();
  params.insert(params.end(), dec.begin(), dec.end());
  std::vector<Tensor<float>> grads = std::move(res.encoder_grads);
  for (auto& g : res.decoder_grads) grads.push_back(std::move(g));
  adam_step<float>(params, grads, state);
}

void gather_latents(const similarity::LatentTable& table, std::span<const std::size_t> rows, Tensor<float>& out) {
  const auto d = table.dim();
  out = Tensor<float>({rows.size(), d});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = table.row(rows[r]);
    std::copy(src.begin(), src.end(), out.data() + r * d);
  }
}

}  // namespace

std::string EpochMetrics::to_json_line() const {
  nlohmann::json j;
  j["epoch"] = epoch;
  j["loss"] = loss;
  j["term1"] = term1;
  j["term2"] = term2;
  j["term3"] = term3;
  j["wall_ms"] = wall_ms;
  return j.dump();
}

std::string to_string(QueryMode mode) {
  return mode == QueryMode::by_reconstruction ? "by-reconstruction" : "by-input";
}

QueryMode parse_query_mode(const std::string& text) {
  if (text == "by-reconstruction") return QueryMode::by_reconstruction;
  if (text == "by-input") return QueryMode::by_input;
  throw ConfigError("unknown query mode '" + text + "' (expected by-reconstruction or by-input)");
}

void TrainConfig::validate() const {
  if (neighbor_count == 0) throw ConfigError("T (neighbor count) must be >= 1");
  if (cluster_count == 0) throw ConfigError("K (cluster count) must be >= 1");
  if (refresh_interval == 0) throw ConfigError("refresh interval must be >= 1");
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (mining == MiningMethod::exhaustive && neighbor_count != 1) {
    throw ConfigError("exhaustive mining is defined for T = 1 only");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"T", neighbor_count},
          {"K", cluster_count},
          {"learning_rate", learning_rate},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"refresh_interval", refresh_interval},
          {"seed", seed},
          {"query_mode", to_string(query_mode)},
          {"exclude_self", exclude_self},
          {"normalize_by_t", normalize_by_t},
          {"mining", mining == MiningMethod::clustered ? "clustered" : "exhaustive"},
          {"kmeans_iters", kmeans_iters}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  try {
    cfg.neighbor_count = j.at("T").get<std::size_t>();
    cfg.cluster_count = j.at("K").get<std::size_t>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.epochs = j.at("epochs").get<std::size_t>();
    cfg.batch_size = j.at("batch_size").get<std::size_t>();
    cfg.refresh_interval = j.at("refresh_interval").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.query_mode = parse_query_mode(j.at("query_mode").get<std::string>());
    cfg.exclude_self = j.at("exclude_self").get<bool>();
    cfg.normalize_by_t = j.at("normalize_by_t").get<bool>();
    cfg.mining = j.at("mining").get<std::string>() == "exhaustive" ? MiningMethod::exhaustive : MiningMethod::clustered;
    cfg.kmeans_iters = j.at("kmeans_iters").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad training config in checkpoint: ") + e.what());
  }
  return cfg;
}

Autoencoder<float> pretrain_ae(const data::Dataset& ds, const PretrainConfig& cfg, const MetricsSink& sink,
                               const AutoencoderHook& on_epoch) {
  ds.validate();
  if (ds.size() == 0) throw DataError("cannot pretrain on an empty dataset");
  cfg.architecture.validate();
  if (cfg.architecture.input_dim() != ds.pixels()) {
    throw ConfigError("architecture input width " + std::to_string(cfg.architecture.input_dim()) +
                      " does not match " + std::to_string(ds.pixels()) + " pixels");
  }
  auto ae = Autoencoder<float>::build(cfg.architecture, cfg.seed);
  AdamState<float> adam(AdamConfig{cfg.learning_rate});
  const data::Batcher batcher(ds.size(), cfg.batch_size, mix_seed(cfg.seed, 3));
  DivergenceGuard guard;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = Clock::now();
    double total = 0.0;
    for (const auto& idx : batcher.epoch(epoch)) {
      auto res = reconstruction_loss(ds.batch(idx), ae.encoder, ae.decoder);
      total += res.loss * static_cast<double>(idx.size());
      adam_update(ae, res, adam);
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.loss = total / static_cast<double>(ds.size());
    m.term1 = m.loss;
    m.wall_ms = elapsed_ms(start);
    guard.observe(epoch, m.loss);
    if (sink) sink(m);
    if (on_epoch) on_epoch(ae, epoch);
  }
  return ae;
}

NREModel train_nre(const Autoencoder<float>& pretrained, const data::Dataset& ds, const TrainConfig& cfg,
                   const LossWeights& weights, const MetricsSink& sink, const MiningSink& mining_sink,
                   const ModelHook& on_epoch) {
  cfg.validate();
  ds.validate();
  if (ds.size() == 0) throw DataError("cannot train on an empty dataset");
  if (pretrained.encoder.input_dim() != ds.pixels()) {
    throw ShapeError("autoencoder input width does not match dataset pixels");
  }

  NREModel model;
  model.ae = pretrained;
  model.ae.encoder.unfreeze();
  model.ae.decoder.unfreeze();
  model.similarity = pretrained.encoder;
  model.similarity.freeze();
  model.weights = weights;
  model.config = cfg;
  const auto similarity_fp = model.similarity.fingerprint();

  const auto z = ds.size();
  const auto t = cfg.neighbor_count;
  similarity::LatentTable table;
  similarity::ClusterModel clusters;
  if (weights.needs_mining()) {
    table = similarity::encode_all(model.similarity, ds);
    if (cfg.mining == MiningMethod::clustered) {
      clusters = similarity::kmeans(table, cfg.cluster_count, mix_seed(cfg.seed, 4), cfg.kmeans_iters);
    }
  }

  std::vector<std::size_t> neighbors(z * t);
  std::vector<std::size_t> far(z * t);
  auto refresh = [&](std::size_t epoch) {
    Tensor<float> queries;
    if (cfg.query_mode == QueryMode::by_reconstruction) {
      queries = Tensor<float>({z, table.dim()});
      std::vector<std::size_t> idx;
      for (std::size_t start = 0; start < z; start += 512) {
        idx.resize(std::min(z, start + 512) - start);
        std::iota(idx.begin(), idx.end(), start);
        const auto q = model.similarity.infer(model.ae.reconstruct(ds.batch(idx)));
        std::copy(q.values().begin(), q.values().end(), queries.data() + start * table.dim());
      }
    }
    const auto stream = mix_seed(cfg.seed, 1000 + epoch);
    for (std::size_t i = 0; i < z; ++i) {
      const auto query = cfg.query_mode == QueryMode::by_input ? table.row(i) : queries.row(i);
      std::optional<std::size_t> exclude;
      if (cfg.query_mode == QueryMode::by_input || cfg.exclude_self) exclude = i;
      if (cfg.mining == MiningMethod::exhaustive) {
        neighbors[i] = similarity::exhaustive_nearest(query, table, exclude);
        far[i] = similarity::exhaustive_farthest(query, table, exclude, neighbors[i]);
        if (similarity::cosine_sim(query, table.row(far[i])) > similarity::cosine_sim(query, table.row(neighbors[i]))) {
          throw NumericError("mining produced a far sample more similar than its neighbour");
        }
        continue;
      }
      auto rng = make_rng(stream, i);
      const auto res = similarity::mine(query, table, clusters, t, rng, exclude);
      double weakest = 1.0;
      for (std::size_t j = 0; j < t; ++j) {
        neighbors[i * t + j] = res.neighbors[j].index;
        weakest = std::min(weakest, res.neighbors[j].similarity);
      }
      for (std::size_t j = 0; j < t; ++j) {
        if (res.farthest[j].similarity > weakest) {
          throw NumericError("mining produced a far sample more similar than its neighbours");
        }
        far[i * t + j] = res.farthest[j].index;
      }
    }
    if (mining_sink) {
      MiningRecord rec;
      rec.epoch = epoch;
      rec.neighbors.resize(z);
      rec.farthest.resize(z);
      for (std::size_t i = 0; i < z; ++i) {
        rec.neighbors[i].assign(neighbors.begin() + static_cast<std::ptrdiff_t>(i * t),
                                neighbors.begin() + static_cast<std::ptrdiff_t>((i + 1) * t));
        rec.farthest[i].assign(far.begin() + static_cast<std::ptrdiff_t>(i * t),
                               far.begin() + static_cast<std::ptrdiff_t>((i + 1) * t));
      }
      mining_sink(rec);
    }
  };

  AdamState<float> adam(AdamConfig{cfg.learning_rate});
  const data::Batcher batcher(z, cfg.batch_size, mix_seed(cfg.seed, 5));
  DivergenceGuard guard;
  Tensor<float> near_latents;
  Tensor<float> far_latents;
  std::vector<std::size_t> rows;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = Clock::now();
    if (weights.needs_mining() && epoch % cfg.refresh_interval == 0) refresh(epoch);
    EpochMetrics m;
    m.epoch = epoch;
    for (const auto& idx : batcher.epoch(epoch)) {
      if (weights.needs_mining()) {
        rows.clear();
        for (auto i : idx) rows.insert(rows.end(), neighbors.begin() + static_cast<std::ptrdiff_t>(i * t),
                                       neighbors.begin() + static_cast<std::ptrdiff_t>((i + 1) * t));
        gather_latents(table, rows, near_latents);
        rows.clear();
        for (auto i : idx) rows.insert(rows.end(), far.begin() + static_cast<std::ptrdiff_t>(i * t),
                                       far.begin() + static_cast<std::ptrdiff_t>((i + 1) * t));
        gather_latents(table, rows, far_latents);
      }
      auto res = nre_loss(ds.batch(idx), model.ae.encoder, model.ae.decoder, model.similarity, near_latents,
                          far_latents, t, weights, cfg.normalize_by_t);
      const auto n = static_cast<double>(idx.size());
      m.loss += res.loss * n;
      m.term1 += res.term1 * n;
      m.term2 += res.term2 * n;
      m.term3 += res.term3 * n;
      adam_update(model.ae, res, adam);
    }
    const auto zn = static_cast<double>(z);
    m.loss /= zn;
    m.term1 /= zn;
    m.term2 /= zn;
    m.term3 /= zn;
    m.wall_ms = elapsed_ms(start);
    guard.observe(epoch, m.loss);
    if (sink) sink(m);
    if (on_epoch) on_epoch(model, epoch);
  }

  if (model.similarity.fingerprint() != similarity_fp) {
    throw NumericError("similarity encoder parameters changed during training");
  }
  return model;
}

double mean_reconstruction_error(const Autoencoder<float>& ae, const data::Dataset& ds) {
  double total = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < ds.size(); start += 512) {
    idx.resize(std::min(ds.size(), start + 512) - start);
    std::iota(idx.begin(), idx.end(), start);
    const auto x = ds.batch(idx);
    const auto r = ae.reconstruct(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double diff = static_cast<double>(r[i]) - static_cast<double>(x[i]);
      total += diff * diff;
    }
  }
  return total / static_cast<double>(ds.size());
}

}  // namespace nre::train
