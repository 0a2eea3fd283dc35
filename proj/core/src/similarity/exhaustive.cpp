// SPDX-License-Identifier: Apache-2.0
#include "nre/similarity/exhaustive.hpp"

#include "nre/core/error.hpp"

namespace nre::similarity {

std::size_t exhaustive_nearest(std::span<const float> query, const LatentTable& table,
                               std::optional<std::size_t> exclude) {
  std::optional<std::size_t> best;
  double best_sim = -1.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (exclude == i) continue;
    const double s = cosine_sim(query, table.row(i));
    if (s > best_sim) {
      best_sim = s;
      best = i;
    }
  }
  if (!best) throw DataError("no candidate rows for exhaustive nearest");
  return *best;
}

std::size_t exhaustive_farthest(std::span<const float> query, const LatentTable& table,
                                std::optional<std::size_t> exclude, std::optional<std::size_t> avoid) {
  std::optional<std::size_t> best;
  double best_sim = 2.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (exclude == i || avoid == i) continue;
    const double s = cosine_sim(query, table.row(i));
    if (s < best_sim) {
      best_sim = s;
      best = i;
    }
  }
  if (!best) throw DataError("no candidate rows for exhaustive farthest");
  return *best;
}

}  // namespace nre::similarity
