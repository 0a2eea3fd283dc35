// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "nre/similarity/similarity.hpp"

namespace nre::similarity {

// Reference scans over the whole table. They share nothing with the clustered
// search beyond cosine_sim and serve as its oracle.

/// argmax_i S(query, row_i), i != exclude; first index wins ties.
std::size_t exhaustive_nearest(std::span<const float> query, const LatentTable& table,
                               std::optional<std::size_t> exclude = std::nullopt);
/// argmin_i S(query, row_i), i != exclude and i != avoid; first index wins ties.
std::size_t exhaustive_farthest(std::span<const float> query, const LatentTable& table,
                                std::optional<std::size_t> exclude = std::nullopt,
                                std::optional<std::size_t> avoid = std::nullopt);

}  // namespace nre::similarity
