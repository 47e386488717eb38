#pragma once

#include <cstddef>
#include <span>

#include "imbalance/loss.hpp"

namespace imbalance {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn_ = 0;
    std::size_t tn = 0;

    [[nodiscard]] std::size_t total() const noexcept { return tp + fp + fn_ + tn; }
    bool operator==(const ConfusionCounts&) const = default;
};

struct ClassifierMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;

    bool operator==(const ClassifierMetrics&) const = default;
};

/// 1 iff p1 > threshold (strict).
int harden(const ProbPair& p, double threshold = 0.5);

/// Tallies hard predictions against gold labels; both must be {0,1} vectors
/// of equal non-zero length.
ConfusionCounts confusion(std::span<const int> preds, std::span<const int> golds);

/// Undefined precision/recall/F1 are reported as 0.
ClassifierMetrics metrics_from_counts(const ConfusionCounts& c);

/// Sorensen-Dice coefficient 2|A n B| / (|A| + |B|) of the predicted-positive
/// and gold-positive index sets; 1 when both are empty.
double set_dice(std::span<const int> preds, std::span<const int> golds);

}  // namespace imbalance
