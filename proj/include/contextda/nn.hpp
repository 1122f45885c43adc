#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "contextda/csv.hpp"
#include "contextda/matrix.hpp"
#include "contextda/rng.hpp"

namespace contextda::nn {

/// A named parameter array with co-located gradient storage. Vectors use
/// cols == 1. Shapes are fixed at construction.
struct Tensor {
    std::string name;
    std::size_t rows = 0, cols = 0;
    std::vector<double> val, grad;

    Tensor() = default;
    Tensor(std::string n, std::size_t r, std::size_t c)
        : name(std::move(n)), rows(r), cols(c), val(r * c, 0.0), grad(r * c, 0.0) {}

    std::size_t size() const { return val.size(); }
};

/// Ordered view over a network's parameters; the unit the optimizer and the
/// checkpoint format operate on.
using ParamRefs = std::vector<Tensor*>;
using ConstParamRefs = std::vector<const Tensor*>;

inline void zero_grads(const ParamRefs& params) {
    for (Tensor* t : params) std::fill(t->grad.begin(), t->grad.end(), 0.0);
}

/// Uniform init scaled by fan-in: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
inline void init_fan_in(Tensor& t, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : 1));
    for (auto& v : t.val) v = rng.uniform(-bound, bound);
}

enum class Activation { identity, relu, sigmoid };

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double apply_activation(Activation a, double z) {
    switch (a) {
        case Activation::identity: return z;
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::sigmoid: return sigmoid(z);
    }
    return z;
}

/// Derivative expressed through the activation output y.
inline double activation_grad(Activation a, double y) {
    switch (a) {
        case Activation::identity: return 1.0;
        case Activation::relu: return y > 0.0 ? 1.0 : 0.0;
        case Activation::sigmoid: return y * (1.0 - y);
    }
    return 1.0;
}

// ---------------------------------------------------------------------------
// dense layer
// ---------------------------------------------------------------------------

struct DenseCache {
    std::vector<double> x;  // input
    std::vector<double> y;  // activation output
};

struct DenseLayer {
    Tensor W;  // out x in
    Tensor b;  // out x 1
    Activation act = Activation::identity;

    DenseLayer() = default;
    DenseLayer(const std::string& name, std::size_t in, std::size_t out, Activation a, Rng& rng)
        : W(name + ".W", out, in), b(name + ".b", out, 1), act(a) {
        init_fan_in(W, in, rng);
        // biases share the fan-in-scaled init; an all-zero bias vector leaves
        // relu layers sitting exactly on the kink whenever inputs go dark
        init_fan_in(b, in, rng);
    }

    std::size_t in_dim() const { return W.cols; }
    std::size_t out_dim() const { return W.rows; }

    /// y = act(W x + b)
    std::vector<double> forward(std::span<const double> x, DenseCache* cache = nullptr) const {
        if (x.size() != in_dim())
            throw std::invalid_argument("dense '" + W.name + "': input length " +
                                        std::to_string(x.size()) + " != " + std::to_string(in_dim()));
        std::vector<double> y(out_dim());
        for (std::size_t r = 0; r < out_dim(); ++r) {
            const double* wr = W.val.data() + r * in_dim();
            double s = b.val[r];
            for (std::size_t c = 0; c < in_dim(); ++c) s += wr[c] * x[c];
            y[r] = apply_activation(act, s);
        }
        if (cache) {
            cache->x.assign(x.begin(), x.end());
            cache->y = y;
        }
        return y;
    }

    /// Accumulates parameter gradients and returns the input gradient.
    std::vector<double> backward(const DenseCache& cache, std::span<const double> dy) {
        std::vector<double> dx(in_dim(), 0.0);
        for (std::size_t r = 0; r < out_dim(); ++r) {
            const double dz = dy[r] * activation_grad(act, cache.y[r]);
            if (dz == 0.0) continue;
            double* wg = W.grad.data() + r * in_dim();
            const double* wr = W.val.data() + r * in_dim();
            for (std::size_t c = 0; c < in_dim(); ++c) {
                wg[c] += dz * cache.x[c];
                dx[c] += dz * wr[c];
            }
            b.grad[r] += dz;
        }
        return dx;
    }

    ParamRefs params() { return {&W, &b}; }
};

// ---------------------------------------------------------------------------
// multi-layer perceptron with optional hidden dropout
// ---------------------------------------------------------------------------

struct MlpCache {
    std::vector<DenseCache> dense;
    std::vector<std::vector<double>> mask;  // inverted dropout scale per hidden layer
    std::vector<double> out;
};

struct Mlp {
    std::vector<DenseLayer> layers;
    double dropout = 0.0;  // applied to hidden activations in training mode only

    std::size_t in_dim() const { return layers.front().in_dim(); }
    std::size_t out_dim() const { return layers.back().out_dim(); }

    /// Evaluation-mode forward: no dropout, pure function of (params, x).
    std::vector<double> forward(std::span<const double> x) const {
        std::vector<double> h(x.begin(), x.end());
        for (const auto& layer : layers) h = layer.forward(h);
        return h;
    }

    /// Training-mode forward. Dropout masks are drawn from `rng` and recorded
    /// in the cache so backward sees the same thinned network.
    std::vector<double> forward_train(std::span<const double> x, Rng& rng, MlpCache& cache) const {
        cache.dense.resize(layers.size());
        cache.mask.assign(layers.size(), {});
        std::vector<double> h(x.begin(), x.end());
        for (std::size_t l = 0; l < layers.size(); ++l) {
            h = layers[l].forward(h, &cache.dense[l]);
            const bool hidden = l + 1 < layers.size();
            if (hidden && dropout > 0.0) {
                auto& mask = cache.mask[l];
                mask.resize(h.size());
                const double keep = 1.0 - dropout;
                for (std::size_t i = 0; i < h.size(); ++i) {
                    mask[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
                    h[i] *= mask[i];
                }
            }
        }
        cache.out = h;
        return h;
    }

    std::vector<double> backward(const MlpCache& cache, std::span<const double> dout) {
        std::vector<double> d(dout.begin(), dout.end());
        for (std::size_t l = layers.size(); l-- > 0;) {
            if (!cache.mask[l].empty())
                for (std::size_t i = 0; i < d.size(); ++i) d[i] *= cache.mask[l][i];
            d = layers[l].backward(cache.dense[l], d);
        }
        return d;
    }

    ParamRefs params() {
        ParamRefs out;
        for (auto& l : layers) {
            out.push_back(&l.W);
            out.push_back(&l.b);
        }
        return out;
    }
};

inline Mlp make_mlp(const std::string& name, std::size_t in, const std::vector<std::size_t>& hidden,
                    std::size_t out, Activation hidden_act, Activation out_act, double dropout,
                    Rng& rng) {
    Mlp mlp;
    mlp.dropout = dropout;
    std::size_t prev = in;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        mlp.layers.emplace_back(name + ".l" + std::to_string(i), prev, hidden[i], hidden_act, rng);
        prev = hidden[i];
    }
    mlp.layers.emplace_back(name + ".out", prev, out, out_act, rng);
    return mlp;
}

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

/// Single LSTM layer. Gate blocks are packed in order (input, forget, cell,
/// output) inside Wx (4h x in), Wh (4h x h) and b (4h).
struct LstmLayer {
    std::size_t in_dim = 0, hidden = 0;
    Tensor Wx, Wh, b;

    struct Cache {
        Matrix x;              // m x in
        Matrix i, f, g, o, c;  // m x h, post-activation gates and cell state
        Matrix h;              // m x h
    };

    LstmLayer() = default;
    LstmLayer(const std::string& name, std::size_t in, std::size_t h, Rng& rng)
        : in_dim(in),
          hidden(h),
          Wx(name + ".Wx", 4 * h, in),
          Wh(name + ".Wh", 4 * h, h),
          b(name + ".b", 4 * h, 1) {
        init_fan_in(Wx, in, rng);
        init_fan_in(Wh, h, rng);
    }

    /// Runs the recurrence from zero initial hidden/cell state over an
    /// m-step input; returns the m x h hidden-state sequence.
    Matrix forward(const Matrix& x, Cache* cache = nullptr) const {
        if (x.cols != in_dim)
            throw std::invalid_argument("lstm '" + Wx.name + "': input dim " + std::to_string(x.cols) +
                                        " != " + std::to_string(in_dim));
        const std::size_t m = x.rows, h = hidden;
        Matrix hs(m, h), cs(m, h), gi(m, h), gf(m, h), gg(m, h), go(m, h);
        std::vector<double> z(4 * h);
        for (std::size_t t = 0; t < m; ++t) {
            const double* xt = x.data.data() + t * in_dim;
            const double* hp = t > 0 ? hs.data.data() + (t - 1) * h : nullptr;
            for (std::size_t r = 0; r < 4 * h; ++r) {
                const double* wx = Wx.val.data() + r * in_dim;
                double s = b.val[r];
                for (std::size_t c = 0; c < in_dim; ++c) s += wx[c] * xt[c];
                if (hp) {
                    const double* wh = Wh.val.data() + r * h;
                    for (std::size_t c = 0; c < h; ++c) s += wh[c] * hp[c];
                }
                z[r] = s;
            }
            for (std::size_t j = 0; j < h; ++j) {
                const double iv = sigmoid(z[j]);
                const double fv = sigmoid(z[h + j]);
                const double gv = std::tanh(z[2 * h + j]);
                const double ov = sigmoid(z[3 * h + j]);
                const double cprev = t > 0 ? cs(t - 1, j) : 0.0;
                const double cv = fv * cprev + iv * gv;
                gi(t, j) = iv;
                gf(t, j) = fv;
                gg(t, j) = gv;
                go(t, j) = ov;
                cs(t, j) = cv;
                hs(t, j) = ov * std::tanh(cv);
            }
        }
        if (cache) {
            cache->x = x;
            cache->i = std::move(gi);
            cache->f = std::move(gf);
            cache->g = std::move(gg);
            cache->o = std::move(go);
            cache->c = std::move(cs);
            cache->h = hs;
        }
        return hs;
    }

    /// Backpropagation through time. `dh_seq` carries the upstream gradient
    /// for every hidden step (zero rows where nothing flows in). Accumulates
    /// parameter gradients; returns the gradient w.r.t. the input sequence.
    Matrix backward(const Cache& cache, const Matrix& dh_seq) {
        const std::size_t m = cache.x.rows, h = hidden;
        Matrix dx(m, in_dim);
        std::vector<double> dh_carry(h, 0.0), dc_carry(h, 0.0), dz(4 * h);
        for (std::size_t t = m; t-- > 0;) {
            for (std::size_t j = 0; j < h; ++j) {
                const double dh = dh_seq(t, j) + dh_carry[j];
                const double tc = std::tanh(cache.c(t, j));
                const double iv = cache.i(t, j), fv = cache.f(t, j);
                const double gv = cache.g(t, j), ov = cache.o(t, j);
                const double dov = dh * tc;
                const double dc = dc_carry[j] + dh * ov * (1.0 - tc * tc);
                const double div = dc * gv;
                const double dgv = dc * iv;
                const double cprev = t > 0 ? cache.c(t - 1, j) : 0.0;
                const double dfv = dc * cprev;
                dc_carry[j] = dc * fv;
                dz[j] = div * iv * (1.0 - iv);
                dz[h + j] = dfv * fv * (1.0 - fv);
                dz[2 * h + j] = dgv * (1.0 - gv * gv);
                dz[3 * h + j] = dov * ov * (1.0 - ov);
            }
            const double* xt = cache.x.data.data() + t * in_dim;
            const double* hp = t > 0 ? cache.h.data.data() + (t - 1) * h : nullptr;
            std::fill(dh_carry.begin(), dh_carry.end(), 0.0);
            double* dxt = dx.data.data() + t * in_dim;
            for (std::size_t r = 0; r < 4 * h; ++r) {
                const double dzr = dz[r];
                if (dzr == 0.0) continue;
                double* wxg = Wx.grad.data() + r * in_dim;
                const double* wx = Wx.val.data() + r * in_dim;
                for (std::size_t c = 0; c < in_dim; ++c) {
                    wxg[c] += dzr * xt[c];
                    dxt[c] += dzr * wx[c];
                }
                if (hp) {
                    double* whg = Wh.grad.data() + r * h;
                    const double* wh = Wh.val.data() + r * h;
                    for (std::size_t c = 0; c < h; ++c) {
                        whg[c] += dzr * hp[c];
                        dh_carry[c] += dzr * wh[c];
                    }
                }
                b.grad[r] += dzr;
            }
        }
        return dx;
    }

    ParamRefs params() { return {&Wx, &Wh, &b}; }
};

/// A stack of LSTM layers; layer L consumes the hidden sequence of layer L-1.
struct LstmStack {
    std::vector<LstmLayer> layers;

    struct Cache {
        std::vector<LstmLayer::Cache> layer;
    };

    LstmStack() = default;
    LstmStack(const std::string& name, std::size_t in, const std::vector<std::size_t>& hidden,
              Rng& rng) {
        std::size_t prev = in;
        for (std::size_t i = 0; i < hidden.size(); ++i) {
            layers.emplace_back(name + ".lstm" + std::to_string(i), prev, hidden[i], rng);
            prev = hidden[i];
        }
    }

    std::size_t out_dim() const { return layers.back().hidden; }
    std::size_t in_dim() const { return layers.front().in_dim; }

    Matrix forward(const Matrix& x, Cache* cache = nullptr) const {
        if (cache) cache->layer.resize(layers.size());
        Matrix h = x;
        for (std::size_t l = 0; l < layers.size(); ++l)
            h = layers[l].forward(h, cache ? &cache->layer[l] : nullptr);
        return h;
    }

    /// Final hidden state of the top layer; the latent feature vector.
    std::vector<double> encode(const Matrix& x, Cache* cache = nullptr) const {
        const Matrix h = forward(x, cache);
        const auto last = h.row(h.rows - 1);
        return {last.begin(), last.end()};
    }

    /// Full BPTT from per-step upstream gradients on the top layer.
    Matrix backward(const Cache& cache, const Matrix& dh_top) {
        Matrix d = dh_top;
        for (std::size_t l = layers.size(); l-- > 0;) d = layers[l].backward(cache.layer[l], d);
        return d;
    }

    /// BPTT when only the final hidden state feeds downstream.
    void backward_from_latent(const Cache& cache, std::span<const double> dlatent) {
        const auto& top = cache.layer.back();
        Matrix dh_top(top.h.rows, top.h.cols);
        for (std::size_t j = 0; j < dlatent.size(); ++j) dh_top(top.h.rows - 1, j) = dlatent[j];
        backward(cache, dh_top);
    }

    ParamRefs params() {
        ParamRefs out;
        for (auto& l : layers)
            for (Tensor* t : l.params()) out.push_back(t);
        return out;
    }
};

// ---------------------------------------------------------------------------
// optimizer
// ---------------------------------------------------------------------------

enum class UpdateRule { sgd, adam };

/// First/second-moment adaptive update (or plain gradient descent). Moment
/// buffers bind to the parameter list by position on first use.
class Optimizer {
public:
    explicit Optimizer(double lr, UpdateRule rule = UpdateRule::adam) : lr_(lr), rule_(rule) {}

    double learning_rate() const { return lr_; }
    long step_count() const { return step_count_; }

    /// Applies one update. Aborts (throws, no partial write) if any gradient
    /// entry is non-finite.
    void step(const ParamRefs& params) {
        for (const Tensor* t : params)
            if (!all_finite(t->grad))
                throw std::runtime_error("optimizer: non-finite gradient in '" + t->name + "'");

        ++step_count_;
        if (rule_ == UpdateRule::sgd) {
            for (Tensor* t : params)
                for (std::size_t i = 0; i < t->size(); ++i) t->val[i] -= lr_ * t->grad[i];
            return;
        }

        if (m_.empty()) {
            for (const Tensor* t : params) {
                m_.emplace_back(t->size(), 0.0);
                v_.emplace_back(t->size(), 0.0);
            }
        }
        if (m_.size() != params.size())
            throw std::invalid_argument("optimizer: parameter list changed size");

        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
        for (std::size_t p = 0; p < params.size(); ++p) {
            Tensor* t = params[p];
            auto& m = m_[p];
            auto& v = v_[p];
            if (m.size() != t->size())
                throw std::invalid_argument("optimizer: shape mismatch for '" + t->name + "'");
            for (std::size_t i = 0; i < t->size(); ++i) {
                const double g = t->grad[i];
                m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
                v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
                const double mh = m[i] / bc1;
                const double vh = v[i] / bc2;
                t->val[i] -= lr_ * mh / (std::sqrt(vh) + eps_);
            }
        }
    }

private:
    double lr_;
    UpdateRule rule_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long step_count_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

// ---------------------------------------------------------------------------
// parameter serialization
// ---------------------------------------------------------------------------

/// Writes ordered (name, shape, row-major values) records. Values use full
/// round-trip precision.
inline void save_params(std::ostream& out, const ConstParamRefs& params) {
    out << "params " << params.size() << "\n";
    for (const Tensor* t : params) {
        out << t->name << " " << t->rows << " " << t->cols << "\n";
        for (std::size_t i = 0; i < t->size(); ++i) {
            if (i) out << ' ';
            out << format_float_exact(t->val[i]);
        }
        out << "\n";
    }
}

/// Loads records written by save_params, validating names and shapes.
inline void load_params(std::istream& in, const ParamRefs& params) {
    std::string tag;
    std::size_t count = 0;
    in >> tag >> count;
    if (tag != "params" || count != params.size())
        throw std::runtime_error("checkpoint: expected " + std::to_string(params.size()) +
                                 " parameter records, found " + std::to_string(count));
    for (Tensor* t : params) {
        std::string name;
        std::size_t rows = 0, cols = 0;
        in >> name >> rows >> cols;
        if (name != t->name || rows != t->rows || cols != t->cols)
            throw std::runtime_error("checkpoint: record '" + name + "' (" + std::to_string(rows) +
                                     "x" + std::to_string(cols) + ") does not match '" + t->name +
                                     "' (" + std::to_string(t->rows) + "x" + std::to_string(t->cols) +
                                     ")");
        for (std::size_t i = 0; i < t->size(); ++i) {
            if (!(in >> t->val[i]))
                throw std::runtime_error("checkpoint: truncated values for '" + t->name + "'");
        }
    }
}

}  // namespace contextda::nn
