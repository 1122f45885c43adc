#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "contextda/detector.hpp"
#include "contextda/rng.hpp"
#include "contextda/timeseries.hpp"

namespace contextda {

/// Concatenated source/target latent feature vector (length 2 * d_z).
using EnvState = std::vector<double>;

/// A pair of context window sizes, both in [1, K_max].
struct EnvAction {
    std::size_t source_window = 1;
    std::size_t target_window = 1;
};

inline std::size_t encode_action(const EnvAction& a, std::size_t k_max) {
    if (a.source_window < 1 || a.source_window > k_max || a.target_window < 1 ||
        a.target_window > k_max)
        throw std::out_of_range("encode_action: window size out of [1, K_max]");
    return (a.source_window - 1) * k_max + (a.target_window - 1);
}

inline EnvAction decode_action(std::size_t index, std::size_t k_max) {
    if (index >= k_max * k_max) throw std::out_of_range("decode_action: index out of range");
    return {index / k_max + 1, index % k_max + 1};
}

/// Reward: reciprocal of the coefficient-weighted loss combination. The
/// denominator is clamped below at 1e-6 so the reward stays finite and
/// positive even when the discrimination term dominates.
inline double compute_reward(const LossBreakdown& losses, const RewardCoefficients& c) {
    const double denom = c.alpha * losses.cls + c.beta * losses.recon + c.gamma_r * losses.align -
                         c.lambda * losses.disc;
    return 1.0 / std::max(denom, 1e-6);
}

struct StepOutcome {
    EnvState next_state;
    double reward = 0.0;
    LossBreakdown losses;
    std::size_t step_index = 0;
};

struct EnvConfig {
    std::size_t k_max = 10;
    std::size_t detector_batch = 128;  // total windows per update; 2 per pair
    std::size_t replay_capacity = 1024;
    RewardCoefficients coeffs;
};

/// The training MDP. Each step samples one source and one target window with
/// the action's sizes at the advancing time cursor, updates the detector on a
/// replay-stabilized batch, and pays the reciprocal-loss reward.
///
/// The episode horizon is min(T_source, T_target) - 1: step t consumes the
/// windows ending at index t+1, so the initial state (index 0) plus the
/// episode covers each series once. A shorter domain wraps modulo its length.
class ContextEnv {
public:
    ContextEnv(const DomainPair& pair, DetectorBundle& bundle, EnvConfig config, std::uint64_t seed)
        : pair_(&pair),
          bundle_(&bundle),
          config_(config),
          env_rng_(derive_seed(seed, 0)),
          dropout_rng_(derive_seed(seed, 1)) {
        if (pair.source.length() < 1 || pair.target.length() < 1)
            throw std::invalid_argument("environment: domains must be nonempty");
        if (config_.k_max < 1) throw std::invalid_argument("environment: K_max must be >= 1");
        if (!pair.source.labels)
            throw std::invalid_argument("environment: source labels are required");
        horizon_ = std::min(pair.source.length(), pair.target.length()) - 1;
        weights_ = class_weights_from_labels(*pair.source.labels);
    }

    std::size_t horizon() const { return horizon_; }
    std::size_t step_index() const { return step_; }
    const ClassWeights& weights() const { return weights_; }

    /// Draws uniform random window sizes for both domains and builds the
    /// state from the windows ending at index 0.
    EnvState reset() {
        const EnvAction a{1 + env_rng_.uniform_int(config_.k_max),
                          1 + env_rng_.uniform_int(config_.k_max)};
        step_ = 0;
        return state_at(0, a);
    }

    /// Re-enters the time range for a new epoch, rebuilding the state at
    /// index 0 from the given window sizes (no re-randomization).
    EnvState reset_epoch(const EnvAction& last_action) {
        step_ = 0;
        return state_at(0, last_action);
    }

    StepOutcome step(const EnvAction& action) {
        if (step_ >= horizon_) throw std::runtime_error("environment: step after episode end");
        const std::size_t idx = step_ + 1;
        const std::size_t src_idx = idx % pair_->source.length();
        const std::size_t tgt_idx = idx % pair_->target.length();

        StepOutcome out;
        out.step_index = step_;
        out.next_state = state_at(idx, action);

        WindowBatch batch = assemble_batch(src_idx, tgt_idx, action);
        try {
            out.losses = bundle_->update(batch, config_.coeffs, weights_, dropout_rng_);
        } catch (const std::exception& e) {
            throw std::runtime_error("step " + std::to_string(step_) + ": " + e.what());
        }
        out.reward = compute_reward(out.losses, config_.coeffs);

        memory_.push_back({src_idx, action.source_window, tgt_idx, action.target_window,
                           (*pair_->source.labels)[src_idx]});
        if (memory_.size() > config_.replay_capacity) memory_.pop_front();
        ++step_;
        return out;
    }

private:
    struct PairSample {
        std::size_t src_idx, m, tgt_idx, n;
        int label;
    };

    EnvState state_at(std::size_t idx, const EnvAction& a) const {
        const auto zs = bundle_->encode(
            sample_window(pair_->source, idx % pair_->source.length(), a.source_window),
            Domain::source);
        const auto zt = bundle_->encode(
            sample_window(pair_->target, idx % pair_->target.length(), a.target_window),
            Domain::target);
        EnvState s;
        s.reserve(zs.size() + zt.size());
        s.insert(s.end(), zs.begin(), zs.end());
        s.insert(s.end(), zt.begin(), zt.end());
        return s;
    }

    WindowBatch assemble_batch(std::size_t src_idx, std::size_t tgt_idx, const EnvAction& a) {
        WindowBatch batch;
        auto push = [&](const PairSample& ps) {
            batch.source.push_back(sample_window(pair_->source, ps.src_idx, ps.m));
            batch.source_labels.push_back(ps.label);
            batch.target.push_back(sample_window(pair_->target, ps.tgt_idx, ps.n));
        };
        push({src_idx, a.source_window, tgt_idx, a.target_window,
              (*pair_->source.labels)[src_idx]});
        const std::size_t max_pairs = std::max<std::size_t>(1, config_.detector_batch / 2);
        for (std::size_t i = 1; i < max_pairs && !memory_.empty(); ++i)
            push(memory_[env_rng_.uniform_int(memory_.size())]);
        return batch;
    }

    const DomainPair* pair_;
    DetectorBundle* bundle_;
    EnvConfig config_;
    Rng env_rng_;
    Rng dropout_rng_;
    ClassWeights weights_;
    std::size_t horizon_ = 0;
    std::size_t step_ = 0;
    std::deque<PairSample> memory_;
};

}  // namespace contextda
