// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nre/core/network.hpp"
#include "nre/core/rng.hpp"
#include "nre/core/tensor.hpp"
#include "nre/data/dataset.hpp"

namespace nre::similarity {

/// a.b / (|a||b|) for nonnegative vectors; 0 when either vector is all-zero.
/// Throws ShapeError on length mismatch and ConfigError on a negative entry.
double cosine_sim(std::span<const float> a, std::span<const float> b);
double cosine_sim(std::span<const double> a, std::span<const double> b);
/// 1 - cosine_sim(a, b).
double cosine_dist(std::span<const float> a, std::span<const float> b);
double cosine_dist(std::span<const double> a, std::span<const double> b);

/// Latents of a whole dataset under the frozen similarity encoder.
class LatentTable {
 public:
  LatentTable() = default;
  /// Validates nonnegativity and precomputes row norms.
  LatentTable(Tensor<float> latents, std::string dataset_id, std::uint64_t encoder_fingerprint);

  std::size_t size() const noexcept { return latents_.empty() ? 0 : latents_.rows(); }
  std::size_t dim() const noexcept { return latents_.empty() ? 0 : latents_.cols(); }
  std::span<const float> row(std::size_t i) const noexcept { return latents_.row(i); }
  double norm(std::size_t i) const noexcept { return norms_[i]; }
  const Tensor<float>& latents() const noexcept { return latents_; }
  const std::string& dataset_id() const noexcept { return dataset_id_; }
  std::uint64_t encoder_fingerprint() const noexcept { return fingerprint_; }

  /// Cosine similarity between an arbitrary query (with its norm) and row i.
  double similarity(std::span<const float> query, double query_norm, std::size_t i) const noexcept;

 private:
  Tensor<float> latents_;
  std::vector<double> norms_;
  std::string dataset_id_;
  std::uint64_t fingerprint_ = 0;
};

/// Row i is the post-relu latent of sample i under `encoder`, which must be
/// frozen.
LatentTable encode_all(const Network<float>& encoder, const data::Dataset& ds, std::size_t batch_size = 512);

/// Header "index,z0,...,z{d-1}", one row per sample.
void export_csv(const LatentTable& table, const std::filesystem::path& path);

struct ClusterModel {
  Tensor<float> centers;  // (K, d)
  std::vector<std::size_t> assignment;
  std::vector<std::vector<std::size_t>> members;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  /// Within-cluster squared distance after every assignment step.
  std::vector<double> objective_trace;

  std::size_t k() const noexcept { return members.size(); }
  /// Clusters ordered by descending cosine similarity of their centre to
  /// `query` (ties by cluster id), paired with that similarity.
  std::vector<std::pair<std::size_t, double>> rank_clusters(std::span<const float> query) const;
};

/// Euclidean Lloyd iterations from a seeded k-means++ start; stops at an
/// assignment fixpoint or after max_iters. Empty clusters are re-seeded with
/// the point farthest from its centre.
ClusterModel kmeans(const LatentTable& table, std::size_t k, std::uint64_t seed, std::size_t max_iters = 100);

/// K=1 model over the whole table; turns the clustered queries into exact scans.
ClusterModel single_cluster(const LatentTable& table);

struct Hit {
  std::size_t index;
  double similarity;
  friend bool operator==(const Hit&, const Hit&) = default;
};

/// The T most similar rows, searched in the query's cluster first and topped
/// up from the next-nearest clusters. Ties go to the lower row index.
std::vector<Hit> nearest(std::span<const float> query, const LatentTable& table, const ClusterModel& clusters,
                         std::size_t t, std::optional<std::size_t> exclude = std::nullopt);

struct FarthestOptions {
  std::optional<std::size_t> exclude;
  /// Rows that must not be returned (e.g. the mined neighbours).
  std::span<const std::size_t> avoid;
  /// Only rows with similarity at most this value qualify.
  std::optional<double> at_most;
};

/// With one cluster: the exact T least-similar rows. Otherwise T rows drawn
/// uniformly without replacement from the ceil(K/4) clusters whose centres are
/// least similar to the query, widening to further clusters if needed.
std::vector<Hit> farthest(std::span<const float> query, const LatentTable& table, const ClusterModel& clusters,
                          std::size_t t, Rng& rng, const FarthestOptions& options = {});

struct NeighborQueryResult {
  std::vector<Hit> neighbors;
  std::vector<Hit> farthest;
};

/// Neighbours and far samples for one query: disjoint index sets, and no far
/// sample more similar to the query than the least similar neighbour.
NeighborQueryResult mine(std::span<const float> query, const LatentTable& table, const ClusterModel& clusters,
                         std::size_t t, Rng& rng, std::optional<std::size_t> exclude = std::nullopt);

}  // namespace nre::similarity
