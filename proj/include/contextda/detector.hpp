#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "contextda/nn.hpp"
#include "contextda/timeseries.hpp"

namespace contextda {

/// Coefficients weighting the four losses, both in the detector objective and
/// in the reward. gamma_r names the alignment coefficient; the discount
/// factor of the agent is a separate quantity.
struct RewardCoefficients {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma_r = 1.0;
    double lambda = 1.0;
};

/// Per-class loss weights for the source classifier.
struct ClassWeights {
    double anomaly = 1.0;
    double normal = 1.0;
};

/// Computes inverse-class-frequency weights from source labels, normalized so
/// the per-point average weight is 1.
inline ClassWeights class_weights_from_labels(std::span<const int> labels) {
    double n_anom = 0.0;
    for (int y : labels) n_anom += (y == 1) ? 1.0 : 0.0;
    const double n = static_cast<double>(labels.size());
    const double n_norm = n - n_anom;
    ClassWeights w;
    w.anomaly = n_anom > 0.0 ? n / (2.0 * n_anom) : 1.0;
    w.normal = n_norm > 0.0 ? n / (2.0 * n_norm) : 1.0;
    return w;
}

struct LossBreakdown {
    double cls = 0.0;
    double recon = 0.0;
    double align = 0.0;
    double disc = 0.0;

    bool all_finite() const {
        return std::isfinite(cls) && std::isfinite(recon) && std::isfinite(align) &&
               std::isfinite(disc);
    }
};

// ---------------------------------------------------------------------------
// loss functions
// ---------------------------------------------------------------------------

inline double clamp_probability(double p) {
    const double eps = 1e-7;
    if (p < eps) return eps;
    if (p > 1.0 - eps) return 1.0 - eps;
    return p;
}

/// Sum of squared L2 norms of (window - reconstruction) over pairs.
inline double loss_recon(std::span<const Matrix> windows, std::span<const Matrix> recons) {
    if (windows.size() != recons.size())
        throw std::invalid_argument("loss_recon: pair count mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) s += squared_distance(windows[i], recons[i]);
    return s;
}

/// Weighted binary cross-entropy summed over points; the weight for each
/// point is chosen by its label.
inline double loss_cls(std::span<const double> probs, std::span<const int> labels,
                       const ClassWeights& weights) {
    if (probs.size() != labels.size()) throw std::invalid_argument("loss_cls: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = clamp_probability(probs[i]);
        const double w = labels[i] == 1 ? weights.anomaly : weights.normal;
        s += -w * (labels[i] * std::log(p) + (1 - labels[i]) * std::log(1.0 - p));
    }
    return s;
}

/// Sum over paired latents of squared L2 distance.
inline double loss_align(std::span<const std::vector<double>> source_latents,
                         std::span<const std::vector<double>> target_latents) {
    if (source_latents.size() != target_latents.size())
        throw std::invalid_argument("loss_align: batch-size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < source_latents.size(); ++i)
        s += squared_distance(source_latents[i], target_latents[i]);
    return s;
}

/// Unweighted binary cross-entropy over domain predictions
/// (0 = source, 1 = target).
inline double loss_disc(std::span<const double> probs, std::span<const int> domain_labels) {
    if (probs.size() != domain_labels.size())
        throw std::invalid_argument("loss_disc: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = clamp_probability(probs[i]);
        s += -(domain_labels[i] * std::log(p) + (1 - domain_labels[i]) * std::log(1.0 - p));
    }
    return s;
}

// ---------------------------------------------------------------------------
// decoder: LSTM stack unrolled from a repeated latent, plus linear projection
// ---------------------------------------------------------------------------

struct Decoder {
    nn::LstmStack stack;
    nn::DenseLayer proj;

    struct Cache {
        nn::LstmStack::Cache stack_cache;
        std::vector<nn::DenseCache> proj_cache;
    };

    Decoder() = default;
    Decoder(const std::string& name, std::size_t latent, const std::vector<std::size_t>& hidden,
            std::size_t d_out, Rng& rng)
        : stack(name + ".stack", latent, hidden, rng),
          proj(name + ".proj", hidden.back(), d_out, nn::Activation::identity, rng) {}

    /// Unrolls the stack for m steps, feeding the latent at every step from a
    /// zero initial state, then projects each hidden state to a data row.
    Matrix forward(std::span<const double> latent, std::size_t m, Cache* cache = nullptr) const {
        if (m < 1) throw std::invalid_argument("decoder: length must be >= 1");
        Matrix input(m, latent.size());
        for (std::size_t t = 0; t < m; ++t)
            for (std::size_t j = 0; j < latent.size(); ++j) input(t, j) = latent[j];
        const Matrix h = stack.forward(input, cache ? &cache->stack_cache : nullptr);
        Matrix out(m, proj.out_dim());
        if (cache) cache->proj_cache.resize(m);
        for (std::size_t t = 0; t < m; ++t) {
            const auto row = proj.forward(h.row(t), cache ? &cache->proj_cache[t] : nullptr);
            for (std::size_t c = 0; c < row.size(); ++c) out(t, c) = row[c];
        }
        return out;
    }

    /// Accumulates parameter gradients; returns the latent gradient.
    std::vector<double> backward(const Cache& cache, const Matrix& dout) {
        const std::size_t m = dout.rows;
        Matrix dh(m, stack.out_dim());
        for (std::size_t t = 0; t < m; ++t) {
            const auto dht = proj.backward(cache.proj_cache[t], dout.row(t));
            for (std::size_t j = 0; j < dht.size(); ++j) dh(t, j) = dht[j];
        }
        const Matrix dx = stack.backward(cache.stack_cache, dh);
        std::vector<double> dlatent(dx.cols, 0.0);
        for (std::size_t t = 0; t < m; ++t)
            for (std::size_t j = 0; j < dx.cols; ++j) dlatent[j] += dx(t, j);
        return dlatent;
    }

    nn::ParamRefs params() {
        auto out = stack.params();
        out.push_back(&proj.W);
        out.push_back(&proj.b);
        return out;
    }
};

// ---------------------------------------------------------------------------
// detector bundle
// ---------------------------------------------------------------------------

struct DetectorSizes {
    std::size_t latent = 128;
    std::vector<std::size_t> enc_hidden = {256, 128};  // last entry is the latent dim
    std::vector<std::size_t> dec_hidden = {128, 256};
    std::vector<std::size_t> cls_hidden = {128, 128};
    std::vector<std::size_t> ae_hidden = {256, 128, 128, 256};  // dense-autoencoder baseline
    double dropout = 0.2;
};

enum class Domain { source, target };

/// A paired training batch: source and target windows aligned by index (the
/// alignment loss pairs them), with the source end-point labels.
struct WindowBatch {
    std::vector<Subsequence> source;
    std::vector<int> source_labels;
    std::vector<Subsequence> target;

    std::size_t pairs() const { return source.size(); }
};

/// Encoder/decoder autoencoder with a source classifier and a domain
/// discriminator. In heterogeneous mode (different feature dimensions) the
/// target domain gets its own encoder/decoder; the classifier and
/// discriminator are always shared.
struct DetectorBundle {
    DetectorSizes sizes;
    std::size_t d_source = 0, d_target = 0;
    bool heterogeneous = false;

    nn::LstmStack enc_src, enc_tgt;
    Decoder dec_src, dec_tgt;
    nn::Mlp classifier;     // logit output; callers apply sigmoid
    nn::Mlp discriminator;  // logit output; callers apply sigmoid
    nn::Optimizer optimizer;

    DetectorBundle(std::size_t d_src, std::size_t d_tgt, DetectorSizes s, double learning_rate,
                   std::uint64_t init_seed, nn::UpdateRule rule = nn::UpdateRule::adam)
        : sizes(std::move(s)),
          d_source(d_src),
          d_target(d_tgt),
          heterogeneous(d_src != d_tgt),
          optimizer(learning_rate, rule) {
        if (sizes.enc_hidden.empty() || sizes.enc_hidden.back() != sizes.latent)
            throw std::invalid_argument("detector: encoder hidden sizes must end at the latent dim");
        Rng rng(init_seed);
        enc_src = nn::LstmStack("enc_src", d_source, sizes.enc_hidden, rng);
        dec_src = Decoder("dec_src", sizes.latent, sizes.dec_hidden, d_source, rng);
        if (heterogeneous) {
            enc_tgt = nn::LstmStack("enc_tgt", d_target, sizes.enc_hidden, rng);
            dec_tgt = Decoder("dec_tgt", sizes.latent, sizes.dec_hidden, d_target, rng);
        }
        classifier = nn::make_mlp("cls", sizes.latent, sizes.cls_hidden, 1, nn::Activation::relu,
                                  nn::Activation::identity, sizes.dropout, rng);
        discriminator = nn::make_mlp("disc", sizes.latent, sizes.cls_hidden, 1, nn::Activation::relu,
                                     nn::Activation::identity, sizes.dropout, rng);
    }

    std::size_t latent_dim() const { return sizes.latent; }

    nn::LstmStack& encoder(Domain d) {
        return (d == Domain::target && heterogeneous) ? enc_tgt : enc_src;
    }
    const nn::LstmStack& encoder(Domain d) const {
        return (d == Domain::target && heterogeneous) ? enc_tgt : enc_src;
    }
    Decoder& decoder(Domain d) { return (d == Domain::target && heterogeneous) ? dec_tgt : dec_src; }
    const Decoder& decoder(Domain d) const {
        return (d == Domain::target && heterogeneous) ? dec_tgt : dec_src;
    }

    /// Latent feature vector: final hidden state of the encoder over the
    /// window. Evaluation mode.
    std::vector<double> encode(const Subsequence& subseq, Domain domain) const {
        return encoder(domain).encode(subseq.values);
    }

    /// Decoder unrolled over `m` steps from the latent. Evaluation mode.
    Matrix reconstruct(std::span<const double> latent, std::size_t m, Domain domain) const {
        return decoder(domain).forward(latent, m);
    }

    /// Anomaly confidence of the source classifier for a latent.
    double classify(std::span<const double> latent) const {
        return nn::sigmoid(classifier.forward(latent)[0]);
    }

    /// Probability that a latent comes from the target domain.
    double discriminate(std::span<const double> latent) const {
        return nn::sigmoid(discriminator.forward(latent)[0]);
    }

    /// Per-point anomaly score for a target window: classifier confidence
    /// times squared reconstruction error. Dropout disabled.
    double anomaly_score(const Subsequence& subseq) const {
        const auto latent = encode(subseq, Domain::target);
        const Matrix recon = reconstruct(latent, subseq.window_size, Domain::target);
        const Matrix windows[] = {subseq.values};
        const Matrix recons[] = {recon};
        return classify(latent) * loss_recon(windows, recons);
    }

    nn::ParamRefs params() {
        nn::ParamRefs out = enc_src.params();
        for (auto* t : dec_src.params()) out.push_back(t);
        if (heterogeneous) {
            for (auto* t : enc_tgt.params()) out.push_back(t);
            for (auto* t : dec_tgt.params()) out.push_back(t);
        }
        for (auto* t : classifier.params()) out.push_back(t);
        for (auto* t : discriminator.params()) out.push_back(t);
        return out;
    }

    nn::ConstParamRefs params() const {
        auto mutable_self = const_cast<DetectorBundle*>(this);
        const auto refs = mutable_self->params();
        return {refs.begin(), refs.end()};
    }

    /// Computes the four losses on the batch, backpropagates the combined
    /// objective alpha*cls + beta*recon + gamma_r*align + lambda*disc through
    /// all networks, applies one optimizer step, and returns the pre-update
    /// breakdown. The returned values (which feed the reward) are computed in
    /// evaluation mode: dropout stays confined to the gradient path. Aborts
    /// without updating on a non-finite loss.
    LossBreakdown update(const WindowBatch& batch, const RewardCoefficients& coeffs,
                         const ClassWeights& weights, Rng& dropout_rng) {
        nn::zero_grads(params());
        const LossBreakdown out = accumulate_gradients(batch, coeffs, weights, dropout_rng);
        optimizer.step(params());
        return out;
    }

    /// Forward passes, the four losses, and gradient accumulation, without an
    /// optimizer step. Callers zero gradients first. Returns evaluation-mode
    /// losses; `train_losses`, when given, receives the dropout-mode values
    /// the gradients actually descend.
    LossBreakdown accumulate_gradients(const WindowBatch& batch, const RewardCoefficients& coeffs,
                                       const ClassWeights& weights, Rng& dropout_rng,
                                       LossBreakdown* train_losses = nullptr) {
        const std::size_t n = batch.pairs();
        if (n == 0) throw std::invalid_argument("detector update: empty batch");
        if (batch.source_labels.size() != n || batch.target.size() != n)
            throw std::invalid_argument("detector update: batch fields must have equal length");

        struct PairState {
            nn::LstmStack::Cache enc_s, enc_t;
            Decoder::Cache dec_s, dec_t;
            nn::MlpCache cls_cache, disc_s_cache, disc_t_cache;
            std::vector<double> z_s, z_t;
            Matrix recon_s, recon_t;
            double p_cls = 0.0, q_s = 0.0, q_t = 0.0;              // train mode, post-sigmoid
            double p_cls_eval = 0.0, q_s_eval = 0.0, q_t_eval = 0.0;  // no dropout
        };
        std::vector<PairState> ps(n);

        nn::LstmStack& enc_t_net = encoder(Domain::target);
        Decoder& dec_t_net = decoder(Domain::target);

        for (std::size_t i = 0; i < n; ++i) {
            auto& p = ps[i];
            p.z_s = enc_src.encode(batch.source[i].values, &p.enc_s);
            p.z_t = enc_t_net.encode(batch.target[i].values, &p.enc_t);
            p.recon_s = dec_src.forward(p.z_s, batch.source[i].window_size, &p.dec_s);
            p.recon_t = dec_t_net.forward(p.z_t, batch.target[i].window_size, &p.dec_t);
            p.p_cls_eval = nn::sigmoid(classifier.forward(p.z_s)[0]);
            p.q_s_eval = nn::sigmoid(discriminator.forward(p.z_s)[0]);
            p.q_t_eval = nn::sigmoid(discriminator.forward(p.z_t)[0]);
            p.p_cls = nn::sigmoid(classifier.forward_train(p.z_s, dropout_rng, p.cls_cache)[0]);
            p.q_s = nn::sigmoid(discriminator.forward_train(p.z_s, dropout_rng, p.disc_s_cache)[0]);
            p.q_t = nn::sigmoid(discriminator.forward_train(p.z_t, dropout_rng, p.disc_t_cache)[0]);
        }

        // pre-update losses; reconstruction and alignment have no dropout, so
        // their evaluation- and train-mode values coincide
        std::vector<double> cls_eval(n), cls_train(n);
        std::vector<Matrix> rw, rr;
        std::vector<std::vector<double>> zs(n), zt(n);
        std::vector<double> disc_eval, disc_train;
        std::vector<int> disc_labels;
        for (std::size_t i = 0; i < n; ++i) {
            cls_eval[i] = ps[i].p_cls_eval;
            cls_train[i] = ps[i].p_cls;
            if (batch.source_labels[i] == 0) {
                rw.push_back(batch.source[i].values);
                rr.push_back(ps[i].recon_s);
            }
            rw.push_back(batch.target[i].values);
            rr.push_back(ps[i].recon_t);
            zs[i] = ps[i].z_s;
            zt[i] = ps[i].z_t;
            disc_eval.push_back(ps[i].q_s_eval);
            disc_train.push_back(ps[i].q_s);
            disc_labels.push_back(0);
            disc_eval.push_back(ps[i].q_t_eval);
            disc_train.push_back(ps[i].q_t);
            disc_labels.push_back(1);
        }
        LossBreakdown out;
        out.cls = loss_cls(cls_eval, batch.source_labels, weights);
        out.recon = loss_recon(rw, rr);
        out.align = loss_align(zs, zt);
        out.disc = loss_disc(disc_eval, disc_labels);

        LossBreakdown train_bd = out;
        train_bd.cls = loss_cls(cls_train, batch.source_labels, weights);
        train_bd.disc = loss_disc(disc_train, disc_labels);
        if (train_losses) *train_losses = train_bd;
        if (!out.all_finite() || !train_bd.all_finite())
            throw std::runtime_error("detector update: non-finite loss");

        // backward
        const std::size_t dz = sizes.latent;
        for (std::size_t i = 0; i < n; ++i) {
            auto& p = ps[i];
            std::vector<double> dz_s(dz, 0.0), dz_t(dz, 0.0);

            if (coeffs.alpha != 0.0) {
                const double w = batch.source_labels[i] == 1 ? weights.anomaly : weights.normal;
                const double dlogit = coeffs.alpha * w * (p.p_cls - batch.source_labels[i]);
                const double dv[] = {dlogit};
                const auto dx = classifier.backward(p.cls_cache, dv);
                for (std::size_t j = 0; j < dz; ++j) dz_s[j] += dx[j];
            }
            if (coeffs.lambda != 0.0) {
                const double ds[] = {coeffs.lambda * (p.q_s - 0.0)};
                const auto dxs = discriminator.backward(p.disc_s_cache, ds);
                for (std::size_t j = 0; j < dz; ++j) dz_s[j] += dxs[j];
                const double dt[] = {coeffs.lambda * (p.q_t - 1.0)};
                const auto dxt = discriminator.backward(p.disc_t_cache, dt);
                for (std::size_t j = 0; j < dz; ++j) dz_t[j] += dxt[j];
            }
            if (coeffs.gamma_r != 0.0) {
                for (std::size_t j = 0; j < dz; ++j) {
                    const double g = 2.0 * coeffs.gamma_r * (p.z_s[j] - p.z_t[j]);
                    dz_s[j] += g;
                    dz_t[j] -= g;
                }
            }
            if (coeffs.beta != 0.0) {
                if (batch.source_labels[i] == 0) {
                    Matrix dr(p.recon_s.rows, p.recon_s.cols);
                    for (std::size_t k = 0; k < dr.data.size(); ++k)
                        dr.data[k] = 2.0 * coeffs.beta *
                                     (p.recon_s.data[k] - batch.source[i].values.data[k]);
                    const auto dl = dec_src.backward(p.dec_s, dr);
                    for (std::size_t j = 0; j < dz; ++j) dz_s[j] += dl[j];
                }
                Matrix dr(p.recon_t.rows, p.recon_t.cols);
                for (std::size_t k = 0; k < dr.data.size(); ++k)
                    dr.data[k] =
                        2.0 * coeffs.beta * (p.recon_t.data[k] - batch.target[i].values.data[k]);
                const auto dl = dec_t_net.backward(p.dec_t, dr);
                for (std::size_t j = 0; j < dz; ++j) dz_t[j] += dl[j];
            }

            enc_src.backward_from_latent(p.enc_s, dz_s);
            enc_t_net.backward_from_latent(p.enc_t, dz_t);
        }
        return out;
    }

    void save(std::ostream& os) const { nn::save_params(os, params()); }
    void load(std::istream& is) {
        auto refs = params();
        nn::load_params(is, refs);
    }
};

}  // namespace contextda
