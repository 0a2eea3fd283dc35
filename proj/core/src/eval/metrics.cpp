// SPDX-License-Identifier: Apache-2.0
#include "nre/eval/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "nre/core/error.hpp"

namespace nre::eval {

namespace {

struct Counts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

Counts check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("got " + std::to_string(scores.size()) + " scores but " + std::to_string(labels.size()) +
                     " labels");
  }
  Counts c;
  for (auto l : labels) {
    if (l == 1) {
      ++c.positives;
    } else if (l == 0) {
      ++c.negatives;
    } else {
      throw DataError("binary labels must be 0 or 1");
    }
  }
  if (c.positives == 0 || c.negatives == 0) throw DataError("both classes must be present");
  return c;
}

std::vector<std::size_t> order_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  return order;
}

}  // namespace

double eer(std::span<const double> scores, std::span<const int> labels) {
  const auto counts = check_inputs(scores, labels);
  const auto order = order_by_score(scores);
  const double n_pos = static_cast<double>(counts.positives);
  const double n_neg = static_cast<double>(counts.negatives);

  // Walking thresholds upwards: everything strictly below the current unique
  // score is flagged normal.
  std::size_t neg_below = 0;
  std::size_t pos_below = 0;
  double prev_fpr = 0.0;
  double prev_fnr = 0.0;
  bool have_prev = false;
  std::size_t i = 0;
  auto crossing = [&](double fpr, double fnr) -> std::optional<double> {
    const double diff = fpr - fnr;
    if (diff == 0.0) return fpr;
    if (have_prev && diff < 0.0) {
      const double prev_diff = prev_fpr - prev_fnr;
      const double alpha = prev_diff / (prev_diff - diff);
      return prev_fpr + alpha * (fpr - prev_fpr);
    }
    return std::nullopt;
  };
  while (i < order.size()) {
    const double fpr = static_cast<double>(counts.negatives - neg_below) / n_neg;
    const double fnr = static_cast<double>(pos_below) / n_pos;
    if (auto v = crossing(fpr, fnr)) return *v;
    prev_fpr = fpr;
    prev_fnr = fnr;
    have_prev = true;
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? pos_below : neg_below) += 1;
      ++i;
    }
  }
  // Threshold above every score: FPR 0, FNR 1.
  return *crossing(0.0, 1.0);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const auto counts = check_inputs(scores, labels);
  const auto order = order_by_score(scores);
  // Twice the positive rank sum keeps mid-ranks integral.
  double twice_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double twice_mid_rank = static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) twice_rank_sum += twice_mid_rank;
    }
    i = j;
  }
  const double n_pos = static_cast<double>(counts.positives);
  const double n_neg = static_cast<double>(counts.negatives);
  const double twice_u = twice_rank_sum - n_pos * (n_pos + 1.0);
  return twice_u / (2.0 * n_pos * n_neg);
}

}  // namespace nre::eval
