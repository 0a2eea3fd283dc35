// SPDX-License-Identifier: Apache-2.0
#include "nre/similarity/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>

#include "nre/core/error.hpp"

namespace nre::similarity {

namespace {

template <typename T>
double checked_cosine(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine similarity of vectors with lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < T{0} || b[i] < T{0}) throw ConfigError("cosine similarity requires nonnegative components");
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

double norm_of(std::span<const float> v) {
  double s = 0.0;
  for (auto x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

double cosine_with_norms(std::span<const float> a, double na, std::span<const float> b, double nb) {
  if (na == 0.0 || nb == 0.0) return 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return std::clamp(dot / (na * nb), 0.0, 1.0);
}

bool more_similar(const Hit& a, const Hit& b) {
  return a.similarity > b.similarity || (a.similarity == b.similarity && a.index < b.index);
}

bool less_similar(const Hit& a, const Hit& b) {
  return a.similarity < b.similarity || (a.similarity == b.similarity && a.index < b.index);
}

void require_query(std::span<const float> query, const LatentTable& table, const ClusterModel& clusters) {
  if (table.size() == 0) throw DataError("empty latent table");
  if (query.size() != table.dim()) throw ShapeError("query width does not match latent table");
  if (clusters.assignment.size() != table.size()) throw ShapeError("cluster model does not match latent table");
}

}  // namespace

double cosine_sim(std::span<const float> a, std::span<const float> b) { return checked_cosine(a, b); }
double cosine_sim(std::span<const double> a, std::span<const double> b) { return checked_cosine(a, b); }
double cosine_dist(std::span<const float> a, std::span<const float> b) { return 1.0 - checked_cosine(a, b); }
double cosine_dist(std::span<const double> a, std::span<const double> b) { return 1.0 - checked_cosine(a, b); }

LatentTable::LatentTable(Tensor<float> latents, std::string dataset_id, std::uint64_t encoder_fingerprint)
    : latents_(std::move(latents)), dataset_id_(std::move(dataset_id)), fingerprint_(encoder_fingerprint) {
  if (latents_.rank() != 2) throw ShapeError("latent table must be (Z, d)");
  latents_.require_finite("latent table");
  for (auto v : latents_.values()) {
    if (v < 0.0f) throw ConfigError("latent table entries must be nonnegative (post-relu)");
  }
  norms_.resize(latents_.rows());
  for (std::size_t i = 0; i < norms_.size(); ++i) norms_[i] = norm_of(latents_.row(i));
}

double LatentTable::similarity(std::span<const float> query, double query_norm, std::size_t i) const noexcept {
  return cosine_with_norms(query, query_norm, row(i), norms_[i]);
}

LatentTable encode_all(const Network<float>& encoder, const data::Dataset& ds, std::size_t batch_size) {
  if (!encoder.frozen()) throw ConfigError("the similarity encoder must be frozen");
  if (ds.size() == 0) throw DataError("cannot encode an empty dataset");
  const auto flat = ds.flat();
  if (flat.cols() != encoder.input_dim()) {
    throw ShapeError("dataset has " + std::to_string(flat.cols()) + " pixels, encoder expects " +
                     std::to_string(encoder.input_dim()));
  }
  const auto d = encoder.output_dim();
  Tensor<float> latents({ds.size(), d});
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < ds.size(); start += batch_size) {
    const auto end = std::min(ds.size(), start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const auto out = encoder.infer(flat.gather_rows(idx));
    std::copy(out.values().begin(), out.values().end(), latents.data() + start * d);
  }
  return LatentTable(std::move(latents), ds.name, encoder.fingerprint());
}

void export_csv(const LatentTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "index";
  for (std::size_t j = 0; j < table.dim(); ++j) out << ",z" << j;
  out << "\n";
  out.precision(std::numeric_limits<float>::max_digits10);
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << i;
    for (auto v : table.row(i)) out << "," << v;
    out << "\n";
  }
}

std::vector<std::pair<std::size_t, double>> ClusterModel::rank_clusters(std::span<const float> query) const {
  const double qn = norm_of(query);
  std::vector<std::pair<std::size_t, double>> ranked;
  ranked.reserve(k());
  for (std::size_t c = 0; c < k(); ++c) {
    const auto center = centers.row(c);
    ranked.emplace_back(c, cosine_with_norms(query, qn, center, norm_of(center)));
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranked;
}

namespace {

double squared_distance(std::span<const float> x, const std::vector<double>& c) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = static_cast<double>(x[j]) - c[j];
    s += d * d;
  }
  return s;
}

}  // namespace

ClusterModel kmeans(const LatentTable& table, std::size_t k, std::uint64_t seed, std::size_t max_iters) {
  const auto z = table.size();
  const auto d = table.dim();
  if (k == 0) throw ConfigError("k-means needs K >= 1");
  if (k > z) throw ConfigError("k-means K=" + std::to_string(k) + " exceeds " + std::to_string(z) + " samples");
  auto rng = make_rng(seed);

  // k-means++ seeding.
  std::vector<std::vector<double>> centers;
  std::vector<char> chosen(z, 0);
  std::vector<double> dist2(z, std::numeric_limits<double>::infinity());
  auto add_center = [&](std::size_t i) {
    chosen[i] = 1;
    const auto r = table.row(i);
    centers.emplace_back(r.begin(), r.end());
    for (std::size_t p = 0; p < z; ++p) dist2[p] = std::min(dist2[p], squared_distance(table.row(p), centers.back()));
  };
  add_center(std::uniform_int_distribution<std::size_t>(0, z - 1)(rng));
  while (centers.size() < k) {
    const double total = std::accumulate(dist2.begin(), dist2.end(), 0.0);
    std::size_t pick = z;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t p = 0; p < z; ++p) {
        if (dist2[p] <= 0.0) continue;
        pick = p;
        target -= dist2[p];
        if (target <= 0.0) break;
      }
    }
    if (pick == z) {
      // Every point coincides with a centre; take an unused one uniformly.
      std::vector<std::size_t> unused;
      for (std::size_t p = 0; p < z; ++p) {
        if (!chosen[p]) unused.push_back(p);
      }
      pick = unused[std::uniform_int_distribution<std::size_t>(0, unused.size() - 1)(rng)];
    }
    add_center(pick);
  }

  ClusterModel model;
  model.seed = seed;
  model.assignment.assign(z, 0);
  std::vector<double> point_cost(z, 0.0);
  auto assign = [&]() {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t p = 0; p < z; ++p) {
      std::size_t best = 0;
      double best_d = squared_distance(table.row(p), centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double dd = squared_distance(table.row(p), centers[c]);
        if (dd < best_d) {
          best_d = dd;
          best = c;
        }
      }
      changed |= model.assignment[p] != best;
      model.assignment[p] = best;
      point_cost[p] = best_d;
      objective += best_d;
    }
    model.objective_trace.push_back(objective);
    return changed;
  };

  assign();
  for (std::size_t it = 0; it < max_iters; ++it) {
    std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t p = 0; p < z; ++p) {
      const auto c = model.assignment[p];
      ++counts[c];
      const auto r = table.row(p);
      for (std::size_t j = 0; j < d; ++j) sums[c][j] += r[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        const auto far = static_cast<std::size_t>(
            std::max_element(point_cost.begin(), point_cost.end()) - point_cost.begin());
        const auto r = table.row(far);
        centers[c].assign(r.begin(), r.end());
        point_cost[far] = 0.0;
        continue;
      }
      for (std::size_t j = 0; j < d; ++j) centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
    model.iterations = it + 1;
    if (!assign()) break;
  }

  model.centers = Tensor<float>({k, d});
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < d; ++j) model.centers.at(c, j) = static_cast<float>(centers[c][j]);
  }
  model.members.assign(k, {});
  for (std::size_t p = 0; p < z; ++p) model.members[model.assignment[p]].push_back(p);
  for (std::size_t c = 0; c < k; ++c) {
    if (model.members[c].empty()) throw NumericError("k-means left cluster " + std::to_string(c) + " empty");
  }
  model.centers.require_finite("k-means centres");
  return model;
}

ClusterModel single_cluster(const LatentTable& table) {
  if (table.size() == 0) throw DataError("empty latent table");
  ClusterModel model;
  model.centers = Tensor<float>({1, table.dim()});
  for (std::size_t p = 0; p < table.size(); ++p) {
    const auto r = table.row(p);
    for (std::size_t j = 0; j < table.dim(); ++j) model.centers[j] += r[j];
  }
  for (auto& v : model.centers.values()) v /= static_cast<float>(table.size());
  model.assignment.assign(table.size(), 0);
  model.members.assign(1, std::vector<std::size_t>(table.size()));
  std::iota(model.members[0].begin(), model.members[0].end(), 0);
  return model;
}

std::vector<Hit> nearest(std::span<const float> query, const LatentTable& table, const ClusterModel& clusters,
                         std::size_t t, std::optional<std::size_t> exclude) {
  require_query(query, table, clusters);
  if (t == 0) throw ConfigError("nearest needs T >= 1");
  const double qn = norm_of(query);
  std::vector<Hit> out;
  std::vector<Hit> candidates;
  for (const auto& [cluster, center_sim] : clusters.rank_clusters(query)) {
    candidates.clear();
    for (auto i : clusters.members[cluster]) {
      if (exclude && *exclude == i) continue;
      candidates.push_back({i, table.similarity(query, qn, i)});
    }
    const auto need = std::min(t - out.size(), candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(need), candidates.end(),
                      more_similar);
    out.insert(out.end(), candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(need));
    if (out.size() == t) break;
  }
  return out;
}

std::vector<Hit> farthest(std::span<const float> query, const LatentTable& table, const ClusterModel& clusters,
                          std::size_t t, Rng& rng, const FarthestOptions& options) {
  require_query(query, table, clusters);
  if (t == 0) throw ConfigError("farthest needs T >= 1");
  const double qn = norm_of(query);
  const std::unordered_set<std::size_t> avoid(options.avoid.begin(), options.avoid.end());
  auto eligible_index = [&](std::size_t i) { return !(options.exclude && *options.exclude == i) && !avoid.count(i); };
  auto eligible_sim = [&](double s) { return !options.at_most || s <= *options.at_most; };

  if (clusters.k() == 1) {
    std::vector<Hit> all;
    all.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (!eligible_index(i)) continue;
      const double s = table.similarity(query, qn, i);
      if (eligible_sim(s)) all.push_back({i, s});
    }
    const auto need = std::min(t, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(need), all.end(), less_similar);
    all.resize(need);
    return all;
  }

  auto ranked = clusters.rank_clusters(query);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  std::size_t take = std::max<std::size_t>(1, (clusters.k() + 3) / 4);

  std::vector<Hit> out;
  std::unordered_set<std::size_t> used;
  while (true) {
    std::vector<std::size_t> pool;
    for (std::size_t c = 0; c < take; ++c) {
      for (auto i : clusters.members[ranked[c].first]) {
        if (eligible_index(i) && !used.count(i)) pool.push_back(i);
      }
    }
    // Rejection sampling keeps the draw uniform over the qualifying rows
    // without scoring the whole pool.
    std::size_t attempts = 0;
    while (out.size() < t && !pool.empty() && attempts < 64 * t) {
      ++attempts;
      const auto j = std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng);
      const auto i = pool[j];
      const double s = table.similarity(query, qn, i);
      pool[j] = pool.back();
      pool.pop_back();
      if (!eligible_sim(s)) continue;
      out.push_back({i, s});
      used.insert(i);
    }
    if (out.size() < t && !pool.empty()) {
      std::vector<Hit> rest;
      for (auto i : pool) {
        const double s = table.similarity(query, qn, i);
        if (eligible_sim(s)) rest.push_back({i, s});
      }
      while (out.size() < t && !rest.empty()) {
        const auto j = std::uniform_int_distribution<std::size_t>(0, rest.size() - 1)(rng);
        out.push_back(rest[j]);
        used.insert(rest[j].index);
        rest[j] = rest.back();
        rest.pop_back();
      }
    }
    if (out.size() == t || take == clusters.k()) break;
    ++take;
  }
  return out;
}

NeighborQueryResult mine(std::span<const float> query, const LatentTable& table, const ClusterModel& clusters,
                         std::size_t t, Rng& rng, std::optional<std::size_t> exclude) {
  NeighborQueryResult result;
  result.neighbors = nearest(query, table, clusters, t, exclude);
  if (result.neighbors.size() < t) {
    throw DataError("only " + std::to_string(result.neighbors.size()) + " neighbours available for T=" +
                    std::to_string(t));
  }
  std::vector<std::size_t> taken;
  double weakest = 1.0;
  for (const auto& h : result.neighbors) {
    taken.push_back(h.index);
    weakest = std::min(weakest, h.similarity);
  }
  FarthestOptions options;
  options.exclude = exclude;
  options.avoid = taken;
  options.at_most = weakest;
  result.farthest = farthest(query, table, clusters, t, rng, options);
  if (result.farthest.size() < t) {
    throw DataError("only " + std::to_string(result.farthest.size()) + " far samples available for T=" +
                    std::to_string(t));
  }
  return result;
}

}  // namespace nre::similarity
