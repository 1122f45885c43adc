#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "contextda/env.hpp"
#include "contextda/nn.hpp"
#include "contextda/rng.hpp"

namespace contextda {

/// MLP approximator of state-action values: one output per flat action index.
struct QNetwork {
    nn::Mlp net;
    nn::Optimizer optimizer;

    QNetwork(std::size_t state_dim, const std::vector<std::size_t>& hidden, std::size_t n_actions,
             double learning_rate, std::uint64_t init_seed,
             nn::UpdateRule rule = nn::UpdateRule::adam)
        : optimizer(learning_rate, rule) {
        Rng rng(init_seed);
        net = nn::make_mlp("q", state_dim, hidden, n_actions, nn::Activation::relu,
                           nn::Activation::identity, 0.0, rng);
    }

    std::size_t n_actions() const { return net.out_dim(); }

    std::vector<double> q_values(std::span<const double> state) const { return net.forward(state); }
};

/// Makes `target`'s parameters a bit-identical copy of `online`'s.
inline void sync_target(const QNetwork& online, QNetwork& target) {
    auto dst = target.net.params();
    auto mutable_online = const_cast<QNetwork&>(online);
    const auto src = mutable_online.net.params();
    if (src.size() != dst.size()) throw std::invalid_argument("sync_target: network shapes differ");
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i]->rows != dst[i]->rows || src[i]->cols != dst[i]->cols)
            throw std::invalid_argument("sync_target: tensor shape mismatch");
        dst[i]->val = src[i]->val;
    }
}

struct Transition {
    EnvState state;
    std::size_t action = 0;
    EnvState next_state;
    double reward = 0.0;
    bool terminal = false;
};

/// Bounded FIFO of transitions; eviction is strictly oldest-first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {
        if (capacity_ < 1) throw std::invalid_argument("replay buffer: capacity must be >= 1");
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return items_[i]; }

    void store(Transition tr) {
        items_.push_back(std::move(tr));
        if (items_.size() > capacity_) items_.pop_front();
    }

    /// Uniform sample of k transitions: with replacement while the buffer is
    /// smaller than k, without replacement otherwise.
    std::vector<const Transition*> sample(std::size_t k, Rng& rng) const {
        if (items_.empty()) throw std::runtime_error("replay buffer: sample from empty buffer");
        std::vector<const Transition*> out;
        out.reserve(k);
        if (items_.size() < k) {
            for (std::size_t i = 0; i < k; ++i) out.push_back(&items_[rng.uniform_int(items_.size())]);
            return out;
        }
        // partial Fisher-Yates over an index vector
        std::vector<std::size_t> idx(items_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + rng.uniform_int(idx.size() - i);
            std::swap(idx[i], idx[j]);
            out.push_back(&items_[idx[i]]);
        }
        return out;
    }

private:
    std::size_t capacity_;
    std::deque<Transition> items_;
};

struct AgentConfig {
    double epsilon = 0.2;
    double discount = 0.95;
    std::size_t batch = 64;
    std::size_t sync_period = 100;  // agent training steps between target syncs
    std::size_t inner_steps = 1;    // agent steps per environment step
    std::size_t buffer_capacity = 10000;
    std::vector<std::size_t> q_hidden = {256, 128, 64};
};

/// Greedy argmax with ties broken toward the lowest index.
inline std::size_t greedy_action(const QNetwork& q, std::span<const double> state) {
    const auto values = q.q_values(state);
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

/// Epsilon-greedy: uniform random with probability epsilon, else greedy.
inline std::size_t select_action(const QNetwork& q, std::span<const double> state, double epsilon,
                                 Rng& rng) {
    if (rng.uniform() < epsilon) return rng.uniform_int(q.n_actions());
    return greedy_action(q, state);
}

/// Bellman target: r + discount * max_a' Q(s', a'), or r at a terminal step.
inline double td_target(double reward, double discount, std::span<const double> next_q_values,
                        bool terminal) {
    if (terminal) return reward;
    double best = next_q_values[0];
    for (double v : next_q_values) best = std::max(best, v);
    return reward + discount * best;
}

/// One DQN update: samples a batch, builds targets with the target network,
/// and takes one optimizer step on the online network only. Returns the
/// pre-step mean squared TD error.
inline double agent_train_step(QNetwork& q, const QNetwork& target_q, const ReplayBuffer& buffer,
                               const AgentConfig& config, Rng& rng) {
    const auto batch = buffer.sample(config.batch, rng);
    const double inv_n = 1.0 / static_cast<double>(batch.size());

    nn::zero_grads(q.net.params());
    double loss = 0.0;
    Rng no_dropout(0);  // q-network has no dropout; stream is never consumed
    for (const Transition* tr : batch) {
        const auto next_q = target_q.q_values(tr->next_state);
        const double target = td_target(tr->reward, config.discount, next_q, tr->terminal);
        nn::MlpCache cache;
        const auto pred = q.net.forward_train(tr->state, no_dropout, cache);
        const double err = pred[tr->action] - target;
        loss += err * err * inv_n;
        std::vector<double> dout(pred.size(), 0.0);
        dout[tr->action] = 2.0 * err * inv_n;
        q.net.backward(cache, dout);
    }
    if (!std::isfinite(loss)) throw std::runtime_error("agent: non-finite TD loss");
    q.optimizer.step(q.net.params());
    return loss;
}

}  // namespace contextda
