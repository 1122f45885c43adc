#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "contextda/detector.hpp"
#include "contextda/dqn.hpp"
#include "contextda/env.hpp"

namespace contextda {

/// How the per-step action is produced during training.
enum class PolicyKind {
    learned,         // epsilon-greedy on the Q-network
    uniform_random,  // uniform over the action space
    constant,        // a fixed (w, w) pair
};

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t detector_batch = 128;  // windows per detector update
    std::size_t k_max = 30;
    RewardCoefficients coeffs;
    AgentConfig agent;
    double learning_rate = 0.05;
    nn::UpdateRule update_rule = nn::UpdateRule::adam;
    std::uint64_t seed = 0;
    DetectorSizes sizes;
    std::size_t replay_capacity = 1024;  // env window-replay memory

    PolicyKind policy = PolicyKind::learned;
    std::size_t constant_window = 1;  // used by PolicyKind::constant
    bool train_agent = true;
};

/// Occurrence counts over the flat action space.
struct ActionCounter {
    std::size_t k_max = 0;
    std::vector<long long> counts;
    long long total = 0;

    ActionCounter() = default;
    explicit ActionCounter(std::size_t k) : k_max(k), counts(k * k, 0) {}

    void record(std::size_t action_index) {
        counts.at(action_index) += 1;
        ++total;
    }
};

/// Marginalizes the counter over the source component and returns the window
/// size with the highest count; ties break toward the smaller size.
inline std::size_t most_frequent_source_window(const ActionCounter& counter) {
    if (counter.total <= 0) throw std::runtime_error("action counter is empty");
    std::size_t best = 1;
    long long best_count = -1;
    for (std::size_t m = 1; m <= counter.k_max; ++m) {
        long long c = 0;
        for (std::size_t n = 1; n <= counter.k_max; ++n)
            c += counter.counts[(m - 1) * counter.k_max + (n - 1)];
        if (c > best_count) {
            best = m;
            best_count = c;
        }
    }
    return best;
}

/// Same marginalization over the target component.
inline std::size_t most_frequent_target_window(const ActionCounter& counter) {
    if (counter.total <= 0) throw std::runtime_error("action counter is empty");
    std::size_t best = 1;
    long long best_count = -1;
    for (std::size_t n = 1; n <= counter.k_max; ++n) {
        long long c = 0;
        for (std::size_t m = 1; m <= counter.k_max; ++m)
            c += counter.counts[(m - 1) * counter.k_max + (n - 1)];
        if (c > best_count) {
            best = n;
            best_count = c;
        }
    }
    return best;
}

struct StepRecord {
    std::size_t epoch = 0;
    std::size_t t = 0;
    std::size_t action_m = 0;
    std::size_t action_n = 0;
    double reward = 0.0;
    LossBreakdown losses;
    double td_loss = 0.0;  // mean over the inner agent steps; 0 when disabled
};

struct TrainReport {
    std::vector<StepRecord> steps;
    double wall_seconds = 0.0;
};

struct TrainResult {
    DetectorBundle bundle;
    QNetwork q;
    ReplayBuffer buffer;
    ActionCounter counter;
    TrainReport report;
};

/// Runs the joint training loop: per step, select an action, sample windows,
/// count the action, update the detector, pay the reward, store the
/// transition, and take the agent's inner training steps. Deterministic given
/// the config seed.
inline TrainResult train(const DomainPair& pair, const TrainConfig& config) {
    if (!pair.source.labels) throw std::invalid_argument("train: source labels are required");
    if (config.k_max < 1) throw std::invalid_argument("train: K_max must be >= 1");
    const std::size_t min_len = std::min(pair.source.length(), pair.target.length());
    if (config.k_max > min_len)
        throw std::invalid_argument("train: K_max exceeds the shortest domain length");

    const auto t_start = std::chrono::steady_clock::now();

    DetectorBundle bundle(pair.source.dims(), pair.target.dims(), config.sizes,
                          config.learning_rate, derive_seed(config.seed, 1), config.update_rule);
    const std::size_t state_dim = 2 * bundle.latent_dim();
    const std::size_t n_actions = config.k_max * config.k_max;
    QNetwork q(state_dim, config.agent.q_hidden, n_actions, config.learning_rate,
               derive_seed(config.seed, 2), config.update_rule);
    QNetwork target_q(state_dim, config.agent.q_hidden, n_actions, config.learning_rate,
                      derive_seed(config.seed, 2), config.update_rule);

    EnvConfig env_config{config.k_max, config.detector_batch, config.replay_capacity,
                         config.coeffs};
    ContextEnv env(pair, bundle, env_config, derive_seed(config.seed, 3));
    Rng agent_rng(derive_seed(config.seed, 5));

    ReplayBuffer buffer(config.agent.buffer_capacity);
    ActionCounter counter(config.k_max);
    TrainReport report;
    const std::size_t t_env = env.horizon();
    report.steps.reserve(config.epochs * t_env);

    EnvState state = env.reset();
    std::size_t last_action = encode_action({1, 1}, config.k_max);
    std::size_t agent_steps = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (epoch > 0) state = env.reset_epoch(decode_action(last_action, config.k_max));
        for (std::size_t t = 0; t < t_env; ++t) {
            std::size_t action_idx = 0;
            switch (config.policy) {
                case PolicyKind::learned:
                    action_idx = select_action(q, state, config.agent.epsilon, agent_rng);
                    break;
                case PolicyKind::uniform_random:
                    action_idx = agent_rng.uniform_int(n_actions);
                    break;
                case PolicyKind::constant:
                    action_idx =
                        encode_action({config.constant_window, config.constant_window}, config.k_max);
                    break;
            }
            counter.record(action_idx);
            const EnvAction action = decode_action(action_idx, config.k_max);

            StepOutcome outcome;
            try {
                outcome = env.step(action);
            } catch (const std::exception& e) {
                throw std::runtime_error("train epoch " + std::to_string(epoch) + ", " + e.what());
            }
            const bool terminal = (t + 1 == t_env);
            buffer.store({state, action_idx, outcome.next_state, outcome.reward, terminal});

            double td_loss = 0.0;
            if (config.train_agent) {
                for (std::size_t s = 0; s < config.agent.inner_steps; ++s) {
                    td_loss += agent_train_step(q, target_q, buffer, config.agent, agent_rng);
                    ++agent_steps;
                    if (agent_steps % config.agent.sync_period == 0) sync_target(q, target_q);
                }
                if (config.agent.inner_steps > 0)
                    td_loss /= static_cast<double>(config.agent.inner_steps);
            }

            report.steps.push_back({epoch, t, action.source_window, action.target_window,
                                    outcome.reward, outcome.losses, td_loss});
            state = outcome.next_state;
            last_action = action_idx;
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {std::move(bundle), std::move(q), std::move(buffer), std::move(counter),
            std::move(report)};
}

}  // namespace contextda
