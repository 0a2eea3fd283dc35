// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace nre::eval {

// Scores: larger means "more anomalous". Labels: 1 anomaly, 0 normal.

/// Equal error rate from a sweep over the sorted unique scores (threshold
/// theta flags score >= theta), linearly interpolated where FPR - FNR
/// changes sign.
double eer(std::span<const double> scores, std::span<const int> labels);

/// Area under the ROC curve via the Mann-Whitney rank statistic with
/// mid-ranks for ties.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace nre::eval
