#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "contextda/detector.hpp"
#include "contextda/dqn.hpp"
#include "contextda/trainer.hpp"

namespace contextda {

/// Per-target-point anomaly scores and the target window size the policy
/// chose at each point.
struct ScoreSeries {
    std::vector<double> scores;
    std::vector<std::size_t> window_sizes;
};

struct PredictionSeries {
    std::vector<int> predictions;
    double threshold = 0.0;
};

/// Greedy policy-driven scoring of the target series. The source window is
/// frozen at the most frequently selected size; the state at each point pairs
/// the frozen-source latent (source index = target index mod source length)
/// with the latent of the current target window, whose size carries over from
/// the previous step's chosen action. Dropout stays disabled throughout.
inline ScoreSeries infer_scores(const DetectorBundle& bundle, const QNetwork& q,
                                const ActionCounter& counter, const TimeSeries& target,
                                const TimeSeries& source) {
    if (counter.total <= 0) throw std::runtime_error("infer_scores: empty action counter");
    const std::size_t m_star = most_frequent_source_window(counter);
    std::size_t n_carry = most_frequent_target_window(counter);

    ScoreSeries out;
    const std::size_t t_total = target.length();
    out.scores.reserve(t_total);
    out.window_sizes.reserve(t_total);

    for (std::size_t t = 0; t < t_total; ++t) {
        const std::size_t src_idx = t % source.length();
        const auto z_src = bundle.encode(sample_window(source, src_idx, m_star), Domain::source);
        const auto z_tgt = bundle.encode(sample_window(target, t, n_carry), Domain::target);
        EnvState state;
        state.reserve(z_src.size() + z_tgt.size());
        state.insert(state.end(), z_src.begin(), z_src.end());
        state.insert(state.end(), z_tgt.begin(), z_tgt.end());

        const EnvAction action = decode_action(greedy_action(q, state), counter.k_max);
        const Subsequence window = sample_window(target, t, action.target_window);
        out.scores.push_back(bundle.anomaly_score(window));
        out.window_sizes.push_back(action.target_window);
        n_carry = action.target_window;
    }
    return out;
}

/// Nearest-rank empirical quantile of the scores at level q in (0, 1].
inline double nearest_rank_quantile(std::vector<double> sorted_scores, double q) {
    std::sort(sorted_scores.begin(), sorted_scores.end());
    const std::size_t n = sorted_scores.size();
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(n)));
    rank = std::min(std::max<std::size_t>(rank, 1), n);
    return sorted_scores[rank - 1];
}

/// Flags the points whose score lies strictly above the (1 - contamination)
/// quantile. With all-equal scores nothing is flagged.
inline PredictionSeries threshold_scores(const ScoreSeries& series, double contamination) {
    if (series.scores.empty()) throw std::invalid_argument("threshold_scores: empty scores");
    if (!(contamination > 0.0 && contamination <= 0.5))
        throw std::invalid_argument("threshold_scores: contamination must lie in (0, 0.5]");
    PredictionSeries out;
    out.threshold = nearest_rank_quantile(series.scores, 1.0 - contamination);
    out.predictions.reserve(series.scores.size());
    for (double s : series.scores) out.predictions.push_back(s > out.threshold ? 1 : 0);
    return out;
}

}  // namespace contextda
