#include "imbalance/metrics.hpp"

#include <stdexcept>

namespace imbalance {

namespace {

void check_binary_pair(std::span<const int> preds, std::span<const int> golds) {
    if (preds.size() != golds.size()) {
        throw std::invalid_argument("predictions and golds differ in length");
    }
    if (preds.empty()) {
        throw std::invalid_argument("cannot score an empty set");
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if ((preds[i] != 0 && preds[i] != 1) || (golds[i] != 0 && golds[i] != 1)) {
            throw std::invalid_argument("labels must be 0 or 1");
        }
    }
}

double safe_ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

int harden(const ProbPair& p, double threshold) { return p.p1 > threshold ? 1 : 0; }

ConfusionCounts confusion(std::span<const int> preds, std::span<const int> golds) {
    check_binary_pair(preds, golds);
    ConfusionCounts c;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == 1) {
            ++(golds[i] == 1 ? c.tp : c.fp);
        } else {
            ++(golds[i] == 1 ? c.fn_ : c.tn);
        }
    }
    return c;
}

ClassifierMetrics metrics_from_counts(const ConfusionCounts& c) {
    if (c.total() == 0) {
        throw std::invalid_argument("metrics_from_counts: no scored examples");
    }
    ClassifierMetrics m;
    m.precision = safe_ratio(c.tp, c.tp + c.fp);
    m.recall = safe_ratio(c.tp, c.tp + c.fn_);
    // harmonic mean of precision and recall, in count form
    m.f1 = safe_ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_);
    m.accuracy = safe_ratio(c.tp + c.tn, c.total());
    return m;
}

double set_dice(std::span<const int> preds, std::span<const int> golds) {
    check_binary_pair(preds, golds);
    std::size_t both = 0;
    std::size_t predicted = 0;
    std::size_t gold = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        predicted += static_cast<std::size_t>(preds[i]);
        gold += static_cast<std::size_t>(golds[i]);
        both += static_cast<std::size_t>(preds[i] & golds[i]);
    }
    if (predicted + gold == 0) {
        return 1.0;
    }
    return static_cast<double>(2 * both) / static_cast<double>(predicted + gold);
}

}  // namespace imbalance
