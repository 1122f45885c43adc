#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace contextda {

/// Confusion counts with the anomaly class as positive.
struct ConfusionCounts {
    long long tp = 0, fp = 0, tn = 0, fn = 0;

    long long total() const { return tp + fp + tn + fn; }
};

inline ConfusionCounts confusion_counts(std::span<const int> predictions,
                                        std::span<const int> labels) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("metrics: prediction/label length mismatch");
    if (predictions.empty()) throw std::invalid_argument("metrics: empty input");
    ConfusionCounts c;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool p = predictions[i] == 1;
        const bool y = labels[i] == 1;
        if (p && y)
            ++c.tp;
        else if (p && !y)
            ++c.fp;
        else if (!p && y)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

namespace detail {
inline double f1_from(long long tp, long long fp, long long fn) {
    const long long denom = 2 * tp + fp + fn;
    if (denom == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}
}  // namespace detail

/// Unweighted mean of the per-class F1 scores for {normal, anomaly}. A class
/// whose precision and recall are both zero contributes F1 = 0.
inline double macro_f1(std::span<const int> predictions, std::span<const int> labels) {
    const ConfusionCounts c = confusion_counts(predictions, labels);
    const double f1_anomaly = detail::f1_from(c.tp, c.fp, c.fn);
    // normal as positive: swap roles
    const double f1_normal = detail::f1_from(c.tn, c.fn, c.fp);
    return 0.5 * (f1_anomaly + f1_normal);
}

/// AUC-ROC in the rank (Mann-Whitney) formulation: the probability that a
/// random anomalous point outscores a random normal one, ties at half credit.
/// The numerator is accumulated in integers (2 per win, 1 per tie) so the
/// result matches the pairwise definition exactly.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("auc: score/label length mismatch");
    long long n_pos = 0, n_neg = 0;
    for (int y : labels) (y == 1 ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("auc: undefined when only one class is present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    long long numerator2 = 0;  // 2 * wins + ties
    long long negatives_below = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        long long pos_in_group = 0, neg_in_group = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] == 1 ? pos_in_group : neg_in_group) += 1;
            ++j;
        }
        numerator2 += pos_in_group * (2 * negatives_below + neg_in_group);
        negatives_below += neg_in_group;
        i = j;
    }
    return static_cast<double>(numerator2) / (2.0 * static_cast<double>(n_pos * n_neg));
}

}  // namespace contextda
