#pragma once

#include <atomic>
#include <chrono>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "contextda/inference.hpp"
#include "contextda/metrics.hpp"
#include "contextda/trainer.hpp"

namespace contextda {

enum class BaselineKind { ae_mlp, ae_lstm, rdc, rdc_vrada, rand_contextda, contextda };

inline std::string baseline_name(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::ae_mlp: return "AE-MLP";
        case BaselineKind::ae_lstm: return "AE-LSTM";
        case BaselineKind::rdc: return "RDC";
        case BaselineKind::rdc_vrada: return "RDC-VRADA";
        case BaselineKind::rand_contextda: return "RandContexTDA";
        case BaselineKind::contextda: return "ContexTDA";
    }
    return "?";
}

inline BaselineKind baseline_from_name(const std::string& name) {
    for (const auto kind : {BaselineKind::ae_mlp, BaselineKind::ae_lstm, BaselineKind::rdc,
                            BaselineKind::rdc_vrada, BaselineKind::rand_contextda,
                            BaselineKind::contextda})
        if (baseline_name(kind) == name) return kind;
    throw std::invalid_argument("unknown method '" + name + "'");
}

/// Training configuration a fixed-policy baseline runs under: RDC-VRADA is
/// the full detector with a constant context action; RDC additionally drops
/// the discriminator objective.
inline TrainConfig baseline_train_config(BaselineKind kind, const TrainConfig& base,
                                         std::size_t fixed_window) {
    TrainConfig cfg = base;
    switch (kind) {
        case BaselineKind::rdc:
            cfg.coeffs.lambda = 0.0;
            cfg.policy = PolicyKind::constant;
            cfg.constant_window = fixed_window;
            cfg.train_agent = false;
            break;
        case BaselineKind::rdc_vrada:
            cfg.policy = PolicyKind::constant;
            cfg.constant_window = fixed_window;
            cfg.train_agent = false;
            break;
        case BaselineKind::rand_contextda:
            cfg.policy = PolicyKind::uniform_random;
            cfg.train_agent = false;
            break;
        case BaselineKind::contextda:
            cfg.policy = PolicyKind::learned;
            cfg.train_agent = true;
            break;
        default: break;
    }
    return cfg;
}

namespace detail {

/// Unsupervised autoencoder training shared by the single-domain baselines.
/// Each step draws a uniform minibatch of target indices; the loss is the
/// summed squared reconstruction error.
template <typename ForwardBackward>
void train_unsupervised(std::size_t steps, std::size_t batch, std::size_t t_total, Rng& rng,
                        ForwardBackward&& step_fn) {
    for (std::size_t s = 0; s < steps; ++s) {
        std::vector<std::size_t> idx(batch);
        for (auto& i : idx) i = rng.uniform_int(t_total);
        step_fn(idx);
    }
}

inline ScoreSeries score_fixed_window(const DetectorBundle& bundle, const TimeSeries& target,
                                      std::size_t window) {
    ScoreSeries out;
    out.scores.reserve(target.length());
    out.window_sizes.assign(target.length(), window);
    for (std::size_t t = 0; t < target.length(); ++t)
        out.scores.push_back(bundle.anomaly_score(sample_window(target, t, window)));
    return out;
}

}  // namespace detail

/// Runs one method end to end and returns the per-point target scores.
/// `fixed_window` applies to the fixed-window kinds; 0 means "use k_max".
inline ScoreSeries run_baseline(BaselineKind kind, const DomainPair& pair,
                                const TrainConfig& config, std::size_t fixed_window = 0) {
    const std::size_t w = fixed_window > 0 ? fixed_window : config.k_max;
    const TimeSeries& target = pair.target;

    switch (kind) {
        case BaselineKind::ae_mlp: {
            // dense autoencoder over single observations
            Rng init(derive_seed(config.seed, 11));
            nn::Mlp net = nn::make_mlp("ae_mlp", target.dims(), config.sizes.ae_hidden,
                                       target.dims(), nn::Activation::relu,
                                       nn::Activation::identity, 0.0, init);
            nn::Optimizer opt(config.learning_rate, config.update_rule);
            Rng rng(derive_seed(config.seed, 12));
            auto params = net.params();
            Rng no_dropout(0);
            const std::size_t steps = config.epochs * target.length();
            detail::train_unsupervised(
                steps, config.detector_batch, target.length(), rng,
                [&](const std::vector<std::size_t>& idx) {
                    nn::zero_grads(params);
                    for (std::size_t i : idx) {
                        nn::MlpCache cache;
                        const auto row = target.values.row(i);
                        const auto out = net.forward_train(row, no_dropout, cache);
                        std::vector<double> dout(out.size());
                        for (std::size_t c = 0; c < out.size(); ++c)
                            dout[c] = 2.0 * (out[c] - row[c]);
                        net.backward(cache, dout);
                    }
                    opt.step(params);
                });
            ScoreSeries out;
            out.window_sizes.assign(target.length(), 1);
            out.scores.reserve(target.length());
            for (std::size_t t = 0; t < target.length(); ++t) {
                const auto row = target.values.row(t);
                const auto rec = net.forward(row);
                double s = 0.0;
                for (std::size_t c = 0; c < rec.size(); ++c)
                    s += (rec[c] - row[c]) * (rec[c] - row[c]);
                out.scores.push_back(s);
            }
            return out;
        }

        case BaselineKind::ae_lstm: {
            // LSTM autoencoder over fixed-size target windows
            Rng init(derive_seed(config.seed, 13));
            nn::LstmStack enc("ae_enc", target.dims(), config.sizes.enc_hidden, init);
            Decoder dec("ae_dec", config.sizes.latent, config.sizes.dec_hidden, target.dims(), init);
            nn::Optimizer opt(config.learning_rate, config.update_rule);
            nn::ParamRefs params = enc.params();
            for (auto* t : dec.params()) params.push_back(t);
            Rng rng(derive_seed(config.seed, 14));
            const std::size_t batch = std::max<std::size_t>(1, config.detector_batch / 2);
            const std::size_t steps = config.epochs * target.length();
            detail::train_unsupervised(
                steps, batch, target.length(), rng, [&](const std::vector<std::size_t>& idx) {
                    nn::zero_grads(params);
                    for (std::size_t i : idx) {
                        const Subsequence win = sample_window(target, i, w);
                        nn::LstmStack::Cache ec;
                        Decoder::Cache dc;
                        const auto z = enc.encode(win.values, &ec);
                        const Matrix rec = dec.forward(z, w, &dc);
                        Matrix dr(rec.rows, rec.cols);
                        for (std::size_t k = 0; k < dr.data.size(); ++k)
                            dr.data[k] = 2.0 * (rec.data[k] - win.values.data[k]);
                        const auto dz = dec.backward(dc, dr);
                        enc.backward_from_latent(ec, dz);
                    }
                    opt.step(params);
                });
            ScoreSeries out;
            out.window_sizes.assign(target.length(), w);
            out.scores.reserve(target.length());
            for (std::size_t t = 0; t < target.length(); ++t) {
                const Subsequence win = sample_window(target, t, w);
                const auto z = enc.encode(win.values);
                const Matrix rec = dec.forward(z, w);
                out.scores.push_back(squared_distance(win.values, rec));
            }
            return out;
        }

        case BaselineKind::rdc:
        case BaselineKind::rdc_vrada: {
            const TrainResult result = train(pair, baseline_train_config(kind, config, w));
            return detail::score_fixed_window(result.bundle, target, w);
        }

        case BaselineKind::rand_contextda: {
            const TrainResult result =
                train(pair, baseline_train_config(kind, config, w));
            Rng infer_rng(derive_seed(config.seed, 6));
            ScoreSeries out;
            out.scores.reserve(target.length());
            out.window_sizes.reserve(target.length());
            for (std::size_t t = 0; t < target.length(); ++t) {
                const std::size_t n = 1 + infer_rng.uniform_int(config.k_max);
                out.scores.push_back(result.bundle.anomaly_score(sample_window(target, t, n)));
                out.window_sizes.push_back(n);
            }
            return out;
        }

        case BaselineKind::contextda: {
            const TrainResult result = train(pair, baseline_train_config(kind, config, w));
            return infer_scores(result.bundle, result.q, result.counter, target, pair.source);
        }
    }
    throw std::invalid_argument("unknown baseline kind");
}

struct CompareCell {
    std::string method;
    std::uint64_t seed = 0;
    double macro_f1 = 0.0;
    double auc_score = 0.0;
    bool failed = false;
    std::string error;
    double runtime_s = 0.0;
    ScoreSeries scores;
};

/// Runs every (method, seed) cell, thresholds at the contamination level and
/// evaluates both metrics against the held-out target labels. A failing
/// method marks its row failed without aborting the others. Cells may run in
/// parallel; results are assembled in deterministic order.
inline std::vector<CompareCell> compare(const std::vector<BaselineKind>& kinds,
                                        const DomainPair& pair, const TrainConfig& base_config,
                                        double contamination,
                                        const std::vector<std::uint64_t>& seeds,
                                        std::size_t fixed_window = 0, std::size_t threads = 1) {
    if (kinds.empty()) throw std::invalid_argument("compare: no methods given");
    if (!pair.target_labels) throw std::invalid_argument("compare: target labels are required");

    std::vector<CompareCell> cells(kinds.size() * seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t c = next.fetch_add(1);
            if (c >= cells.size()) return;
            const BaselineKind kind = kinds[c / seeds.size()];
            const std::uint64_t seed = seeds[c % seeds.size()];
            CompareCell& cell = cells[c];
            cell.method = baseline_name(kind);
            cell.seed = seed;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                TrainConfig cfg = base_config;
                cfg.seed = seed;
                cell.scores = run_baseline(kind, pair, cfg, fixed_window);
                const auto preds = threshold_scores(cell.scores, contamination);
                cell.macro_f1 = macro_f1(preds.predictions, *pair.target_labels);
                cell.auc_score = auc(cell.scores.scores, *pair.target_labels);
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
            }
            cell.runtime_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };

    const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, cells.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return cells;
}

}  // namespace contextda
