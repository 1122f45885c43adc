// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "contextda/contextda.hpp"

using namespace contextda;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// --------------------------------------------------------------------------
// 1. loss oracles
// --------------------------------------------------------------------------
Check criterion_loss_oracles() {
    Check c;
    Rng rng(101);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.uniform_int(8);
        std::vector<double> probs(n);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            probs[i] = rng.uniform(0.005, 0.995);
            labels[i] = static_cast<int>(rng.uniform_int(2));
        }
        const ClassWeights w{rng.uniform(0.25, 4.0), rng.uniform(0.25, 4.0)};

        double bce_w = 0.0, bce_u = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double term =
                -(labels[i] * std::log(probs[i]) + (1 - labels[i]) * std::log(1.0 - probs[i]));
            bce_w += (labels[i] == 1 ? w.anomaly : w.normal) * term;
            bce_u += term;
        }
        c.expect(std::abs(loss_cls(probs, labels, w) - bce_w) <= 1e-12, "loss_cls oracle mismatch");
        c.expect(std::abs(loss_disc(probs, labels) - bce_u) <= 1e-12, "loss_disc oracle mismatch");

        // recon: direct squared-norm sums over random window pairs
        const std::size_t pairs = 1 + rng.uniform_int(4);
        std::vector<Matrix> ws, rs;
        double direct = 0.0;
        for (std::size_t p = 0; p < pairs; ++p) {
            const std::size_t m = 1 + rng.uniform_int(4), d = 1 + rng.uniform_int(3);
            Matrix a(m, d), b(m, d);
            for (std::size_t i = 0; i < a.data.size(); ++i) {
                a.data[i] = rng.uniform(-1.0, 1.0);
                b.data[i] = rng.uniform(-1.0, 1.0);
                const double diff = a.data[i] - b.data[i];
                direct += diff * diff;
            }
            ws.push_back(a);
            rs.push_back(b);
        }
        c.expect(std::abs(loss_recon(ws, rs) - direct) <= 1e-12, "loss_recon oracle mismatch");

        // align: direct paired squared distances
        const std::size_t bsz = 1 + rng.uniform_int(6);
        std::vector<std::vector<double>> za(bsz), zb(bsz);
        double align_direct = 0.0;
        for (std::size_t i = 0; i < bsz; ++i) {
            za[i].resize(5);
            zb[i].resize(5);
            for (std::size_t j = 0; j < 5; ++j) {
                za[i][j] = rng.uniform(-2.0, 2.0);
                zb[i][j] = rng.uniform(-2.0, 2.0);
                const double diff = za[i][j] - zb[i][j];
                align_direct += diff * diff;
            }
        }
        c.expect(std::abs(loss_align(za, zb) - align_direct) <= 1e-12,
                 "loss_align oracle mismatch");
    }
    return c;
}

// --------------------------------------------------------------------------
// 2. gradient suite
// --------------------------------------------------------------------------
double fd_max_rel_error(const nn::ParamRefs& params, const std::function<double()>& loss,
                        const std::function<void()>& analytic) {
    // central finite differences, step 1e-4
    std::vector<std::vector<double>> fd;
    for (nn::Tensor* t : params) {
        std::vector<double> g(t->size());
        for (std::size_t i = 0; i < t->size(); ++i) {
            const double saved = t->val[i];
            t->val[i] = saved + 1e-4;
            const double up = loss();
            t->val[i] = saved - 1e-4;
            const double down = loss();
            t->val[i] = saved;
            g[i] = (up - down) / 2e-4;
        }
        fd.push_back(std::move(g));
    }
    nn::zero_grads(params);
    analytic();
    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p)
        for (std::size_t i = 0; i < params[p]->size(); ++i) {
            const double a = params[p]->grad[i];
            const double n = fd[p][i];
            worst = std::max(worst, std::abs(a - n) / std::max(1.0, std::abs(a) + std::abs(n)));
        }
    return worst;
}

Check criterion_gradients() {
    Check c;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng init(seed);
        Rng data(seed + 500);

        {  // encoder
            nn::LstmStack enc("enc", 2, {4, 3}, init);
            Matrix x(4, 2);
            for (auto& v : x.data) v = data.uniform(-1.0, 1.0);
            std::vector<double> target(3);
            for (auto& v : target) v = data.uniform(-1.0, 1.0);
            auto params = enc.params();
            auto loss = [&] {
                const auto z = enc.encode(x);
                double s = 0.0;
                for (std::size_t i = 0; i < z.size(); ++i)
                    s += (z[i] - target[i]) * (z[i] - target[i]);
                return s;
            };
            auto analytic = [&] {
                nn::LstmStack::Cache cache;
                const auto z = enc.encode(x, &cache);
                std::vector<double> dz(z.size());
                for (std::size_t i = 0; i < z.size(); ++i) dz[i] = 2.0 * (z[i] - target[i]);
                enc.backward_from_latent(cache, dz);
            };
            c.expect(fd_max_rel_error(params, loss, analytic) <= 1e-4,
                     "encoder gradient seed " + std::to_string(seed));
        }
        {  // decoder
            Rng init2(seed + 40);
            Decoder dec("dec", 3, {3, 4}, 2, init2);
            std::vector<double> latent(3);
            for (auto& v : latent) v = data.uniform(-1.0, 1.0);
            Matrix target(3, 2);
            for (auto& v : target.data) v = data.uniform(-1.0, 1.0);
            auto params = dec.params();
            auto loss = [&] { return squared_distance(dec.forward(latent, 3), target); };
            auto analytic = [&] {
                Decoder::Cache cache;
                const Matrix rec = dec.forward(latent, 3, &cache);
                Matrix dr(rec.rows, rec.cols);
                for (std::size_t i = 0; i < dr.data.size(); ++i)
                    dr.data[i] = 2.0 * (rec.data[i] - target.data[i]);
                dec.backward(cache, dr);
            };
            c.expect(fd_max_rel_error(params, loss, analytic) <= 1e-4,
                     "decoder gradient seed " + std::to_string(seed));
        }
        for (const bool weighted : {true, false}) {  // classifier and discriminator
            Rng init3(seed + 80 + (weighted ? 1 : 0));
            nn::Mlp head = nn::make_mlp("head", 3, {4, 4}, 1, nn::Activation::relu,
                                        nn::Activation::identity, 0.2, init3);
            std::vector<double> z(3);
            for (auto& v : z) v = data.uniform(-1.0, 1.0);
            const int y = static_cast<int>(data.uniform_int(2));
            const double w = weighted ? 1.7 : 1.0;
            auto params = head.params();
            auto loss = [&] {
                Rng drop(99);
                nn::MlpCache cache;
                const double p = nn::sigmoid(head.forward_train(z, drop, cache)[0]);
                const double pc = clamp_probability(p);
                return -w * (y * std::log(pc) + (1 - y) * std::log(1.0 - pc));
            };
            auto analytic = [&] {
                Rng drop(99);
                nn::MlpCache cache;
                const double p = nn::sigmoid(head.forward_train(z, drop, cache)[0]);
                const double dlogit[] = {w * (p - y)};
                head.backward(cache, dlogit);
            };
            c.expect(fd_max_rel_error(params, loss, analytic) <= 1e-4,
                     std::string(weighted ? "classifier" : "discriminator") + " gradient seed " +
                         std::to_string(seed));
        }
        {  // Q-network
            Rng init4(seed + 160);
            nn::Mlp q = nn::make_mlp("q", 4, {4, 4}, 3, nn::Activation::relu,
                                     nn::Activation::identity, 0.0, init4);
            std::vector<double> state(4);
            for (auto& v : state) v = data.uniform(-1.0, 1.0);
            const std::size_t action = data.uniform_int(3);
            const double target = data.uniform(-1.0, 1.0);
            auto params = q.params();
            auto loss = [&] {
                const double pred = q.forward(state)[action];
                return (pred - target) * (pred - target);
            };
            auto analytic = [&] {
                Rng drop(0);
                nn::MlpCache cache;
                const auto pred = q.forward_train(state, drop, cache);
                std::vector<double> dout(pred.size(), 0.0);
                dout[action] = 2.0 * (pred[action] - target);
                q.backward(cache, dout);
            };
            c.expect(fd_max_rel_error(params, loss, analytic) <= 1e-4,
                     "q-network gradient seed " + std::to_string(seed));
        }
    }
    return c;
}

// --------------------------------------------------------------------------
// 3. reward function
// --------------------------------------------------------------------------
Check criterion_reward() {
    Check c;
    Rng rng(303);
    for (int trial = 0; trial < 1000; ++trial) {
        RewardCoefficients coeffs{rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0),
                                  rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)};
        LossBreakdown l{rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0),
                        rng.uniform(0.0, 3.0)};
        if (trial % 5 == 0) l.disc = 100.0;  // force clamped cases into the mix

        const double denom = coeffs.alpha * l.cls + coeffs.beta * l.recon +
                             coeffs.gamma_r * l.align - coeffs.lambda * l.disc;
        const double expected = 1.0 / std::max(denom, 1e-6);
        c.expect(compute_reward(l, coeffs) == expected, "reward mismatch");

        if (denom >= 1e-6) {
            for (int field = 0; field < 3; ++field) {
                LossBreakdown up = l;
                (field == 0 ? up.cls : field == 1 ? up.recon : up.align) += 0.25;
                c.expect(compute_reward(up, coeffs) <= compute_reward(l, coeffs),
                         "reward not nonincreasing in a loss term");
            }
            LossBreakdown up = l;
            up.disc += 0.25;
            c.expect(compute_reward(up, coeffs) >= compute_reward(l, coeffs),
                     "reward not nondecreasing in the discrimination loss");
        }
    }
    return c;
}

// --------------------------------------------------------------------------
// 4. metric oracles
// --------------------------------------------------------------------------
Check criterion_metrics() {
    Check c;
    Rng rng(404);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.uniform_int(199);
        std::vector<double> scores(n);
        std::vector<int> labels(n), preds(n);
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = std::floor(rng.uniform() * 8.0) / 8.0;  // ties guaranteed
            labels[i] = static_cast<int>(rng.uniform_int(2));
            preds[i] = trial % 7 == 0 ? 0 : static_cast<int>(rng.uniform_int(2));
            (labels[i] == 1 ? has_pos : has_neg) = true;
        }
        if (!has_pos) labels[0] = 1;
        if (!has_neg) labels[n - 1] = 0;

        // pairwise brute force with half credit for ties
        long long num2 = 0, n_pos = 0, n_neg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] != 1) continue;
            ++n_pos;
            for (std::size_t j = 0; j < n; ++j) {
                if (labels[j] == 1) continue;
                if (scores[i] > scores[j])
                    num2 += 2;
                else if (scores[i] == scores[j])
                    num2 += 1;
            }
        }
        n_neg = static_cast<long long>(n) - n_pos;
        const double auc_oracle =
            static_cast<double>(num2) / (2.0 * static_cast<double>(n_pos * n_neg));
        c.expect(auc(scores, labels) == auc_oracle, "auc oracle mismatch");

        long long tp = 0, fp = 0, tn = 0, fn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            tp += (preds[i] == 1 && labels[i] == 1);
            fp += (preds[i] == 1 && labels[i] == 0);
            tn += (preds[i] == 0 && labels[i] == 0);
            fn += (preds[i] == 0 && labels[i] == 1);
        }
        auto f1 = [](long long tp_, long long fp_, long long fn_) {
            return (2 * tp_ + fp_ + fn_) == 0
                       ? 0.0
                       : 2.0 * static_cast<double>(tp_) / static_cast<double>(2 * tp_ + fp_ + fn_);
        };
        const double f1_oracle = 0.5 * (f1(tp, fp, fn) + f1(tn, fn, fp));
        c.expect(macro_f1(preds, labels) == f1_oracle, "macro_f1 oracle mismatch");
    }
    return c;
}

// --------------------------------------------------------------------------
// 5. DQN sanity
// --------------------------------------------------------------------------
Check criterion_dqn() {
    Check c;
    {  // two-action bandit with deterministic rewards
        QNetwork q(2, {16}, 2, 0.01, 21);
        QNetwork target(2, {16}, 2, 0.01, 21);
        ReplayBuffer buf(64);
        const EnvState s{0.5, -0.5};
        buf.store({s, 0, s, 1.0, true});
        buf.store({s, 1, s, 0.2, true});
        AgentConfig cfg;
        cfg.batch = 8;
        cfg.sync_period = 50;
        Rng rng(22);
        for (int step = 1; step <= 2000; ++step) {
            agent_train_step(q, target, buf, cfg, rng);
            if (step % cfg.sync_period == 0) sync_target(q, target);
        }
        const auto qv = q.q_values(s);
        c.expect(std::abs(qv[0] - 1.0) < 0.05, "bandit Q(a0) = " + std::to_string(qv[0]));
        c.expect(std::abs(qv[1] - 0.2) < 0.05, "bandit Q(a1) = " + std::to_string(qv[1]));
    }
    {  // two-state chain, discounted fixed point
        const EnvState s0{1.0, 0.0}, s1{0.0, 1.0};
        QNetwork q(2, {16, 16}, 2, 0.005, 31);
        QNetwork target(2, {16, 16}, 2, 0.005, 31);
        ReplayBuffer buf(10000);
        AgentConfig cfg;
        cfg.batch = 32;
        cfg.discount = 0.9;
        cfg.sync_period = 100;
        Rng behavior(32), rng(33);
        EnvState state = s0;
        for (int step = 1; step <= 5000; ++step) {
            const std::size_t a = behavior.uniform_int(2);
            const EnvState next = (a == 1) ? s1 : s0;
            buf.store({state, a, next, a == 1 ? 1.0 : 0.0, false});
            state = next;
            agent_train_step(q, target, buf, cfg, rng);
            if (step % cfg.sync_period == 0) sync_target(q, target);
        }
        for (const EnvState& s : {s0, s1}) {
            const auto qv = q.q_values(s);
            c.expect(std::abs(qv[1] - 10.0) / 10.0 < 0.05,
                     "chain Q(s,1) = " + std::to_string(qv[1]));
            c.expect(std::abs(qv[0] - 9.0) / 9.0 < 0.05,
                     "chain Q(s,0) = " + std::to_string(qv[0]));
        }
    }
    return c;
}

// --------------------------------------------------------------------------
// 6. code-path equivalence
// --------------------------------------------------------------------------
Check criterion_equivalence() {
    Check c;
    SyntheticSpec spec;
    spec.seed = 61;
    spec.length = 101;  // horizon 100
    spec.dims_source = spec.dims_target = 3;
    spec.anomaly_ratio = 0.08;
    DomainPair pair = generate_synthetic(spec);
    pair.source = normalize(pair.source);
    pair.target = normalize(pair.target);

    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.detector_batch = 8;
    cfg.k_max = 5;
    cfg.learning_rate = 0.01;
    cfg.seed = 62;
    cfg.sizes.latent = 4;
    cfg.sizes.enc_hidden = {6, 4};
    cfg.sizes.dec_hidden = {4, 6};
    cfg.sizes.cls_hidden = {6, 6};
    cfg.agent.q_hidden = {16, 8};
    cfg.agent.batch = 8;

    const std::size_t w = 3;
    const TrainResult vrada = train(pair, baseline_train_config(BaselineKind::rdc_vrada, cfg, w));

    TrainConfig forced = cfg;
    forced.policy = PolicyKind::constant;
    forced.constant_window = w;
    forced.train_agent = true;  // agent activity must not disturb the detector
    const TrainResult forced_result = train(pair, forced);

    c.expect(vrada.report.steps.size() == 100, "expected 100 training steps");
    auto a = vrada.bundle.params();
    auto b = forced_result.bundle.params();
    c.expect(a.size() == b.size(), "parameter list size mismatch");
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
        c.expect(a[i]->val == b[i]->val, "detector parameters diverge in '" + a[i]->name + "'");
    return c;
}

// --------------------------------------------------------------------------
// 7. end-to-end synthetic transfer
// --------------------------------------------------------------------------
Check criterion_transfer() {
    Check c;
    SyntheticSpec spec;
    spec.seed = 71;
    spec.length = 2000;
    spec.dims_source = spec.dims_target = 5;
    spec.anomaly_ratio = 0.05;
    spec.signature_lengths = {2, 8};
    DomainPair pair = generate_synthetic(spec);
    pair.source = normalize(pair.source);
    pair.target = normalize(pair.target);

    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.detector_batch = 8;
    cfg.k_max = 10;
    cfg.learning_rate = 0.005;
    cfg.sizes.latent = 16;
    cfg.sizes.enc_hidden = {32, 16};
    cfg.sizes.dec_hidden = {16, 32};
    cfg.sizes.cls_hidden = {16, 16};
    cfg.agent.q_hidden = {64, 32};

    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    const auto cells =
        compare({BaselineKind::contextda, BaselineKind::rand_contextda, BaselineKind::ae_lstm},
                pair, cfg, 0.05, seeds, 0, 2);

    auto mean_of = [&](std::size_t method_index, bool use_auc) {
        double sum = 0.0;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            const auto& cell = cells[method_index * seeds.size() + s];
            if (cell.failed) return -1.0;
            sum += use_auc ? cell.auc_score : cell.macro_f1;
        }
        return sum / static_cast<double>(seeds.size());
    };
    const double auc_ctda = mean_of(0, true), auc_rand = mean_of(1, true),
                 auc_lstm = mean_of(2, true);
    const double f1_ctda = mean_of(0, false), f1_rand = mean_of(1, false);

    std::printf("    mean AUC: ContexTDA=%.4f RandContexTDA=%.4f AE-LSTM=%.4f\n", auc_ctda,
                auc_rand, auc_lstm);
    std::printf("    mean Macro-F1: ContexTDA=%.4f RandContexTDA=%.4f\n", f1_ctda, f1_rand);
    std::fflush(stdout);

    c.expect(auc_ctda >= 0.0 && auc_rand >= 0.0 && auc_lstm >= 0.0, "a method failed to run");
    // equality within 0.005 counts as a pass; only strictly-below fails
    c.expect(auc_ctda >= auc_rand - 0.005, "mean AUC below RandContexTDA");
    c.expect(auc_ctda >= auc_lstm - 0.005, "mean AUC below AE-LSTM");
    c.expect(f1_ctda >= f1_rand - 0.005, "mean Macro-F1 below RandContexTDA");
    return c;
}

// --------------------------------------------------------------------------
// 8. determinism of the CLI commands
// --------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Check criterion_determinism() {
    Check c;
    RunConfig cfg;
    cfg.set("synthetic.seed", "81");
    cfg.set("synthetic.length", "120");
    cfg.set("synthetic.dims_source", "3");
    cfg.set("synthetic.dims_target", "3");
    cfg.set("synthetic.anomaly_ratio", "0.08");
    cfg.set("train.epochs", "2");
    cfg.set("train.batch", "6");
    cfg.set("train.k_max", "4");
    cfg.set("train.learning_rate", "0.01");
    cfg.set("train.learning_rate_grid", "0.01,0.05");
    cfg.set("arch.latent", "4");
    cfg.set("arch.enc_hidden", "6,4");
    cfg.set("arch.dec_hidden", "4,6");
    cfg.set("arch.cls_hidden", "6,6");
    cfg.set("arch.ae_hidden", "8,4,4,8");
    cfg.set("agent.q_hidden", "16,8");
    cfg.set("agent.batch", "8");
    cfg.set("compare.methods", "AE-MLP,RDC-VRADA");
    cfg.set("compare.seeds", "1,2");
    cfg.set("compare.threads", "2");

    const auto base = fs::temp_directory_path() / "ctda_acceptance";
    fs::remove_all(base);
    cli::CommandOptions run_a, run_b;
    run_a.out_dir = (base / "a").string();
    run_b.out_dir = (base / "b").string();

    c.expect(cli::cmd_train(cfg, run_a) == 0, "cmd_train run A failed");
    c.expect(cli::cmd_train(cfg, run_b) == 0, "cmd_train run B failed");
    c.expect(slurp(base / "a" / "report.csv") == slurp(base / "b" / "report.csv"),
             "report.csv differs between reruns");
    c.expect(slurp(base / "a" / "checkpoint.txt") == slurp(base / "b" / "checkpoint.txt"),
             "checkpoint differs between reruns");

    cli::CommandOptions cmp_a, cmp_b;
    cmp_a.out_dir = (base / "ca").string();
    cmp_b.out_dir = (base / "cb").string();
    c.expect(cli::cmd_compare(cfg, cmp_a) == 0, "cmd_compare run A failed");
    c.expect(cli::cmd_compare(cfg, cmp_b) == 0, "cmd_compare run B failed");
    for (const std::string name :
         {"results.csv", "long.csv", "scores_AE_MLP_1.csv", "scores_RDC_VRADA_2.csv"})
        c.expect(slurp(base / "ca" / name) == slurp(base / "cb" / name),
                 name + " differs between reruns");
    return c;
}

// --------------------------------------------------------------------------
// 9. windowing and threshold edge cases
// --------------------------------------------------------------------------
Check criterion_edges() {
    Check c;
    // left padding repeats observation 0
    TimeSeries ts;
    ts.values = Matrix(4, 2);
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t d = 0; d < 2; ++d) ts.values(t, d) = static_cast<double>(10 * t + d);
    const auto padded = sample_window(ts, 0, 3);
    c.expect(padded.values.rows == 3, "padded window row count");
    for (std::size_t k = 0; k < 3; ++k)
        c.expect(padded.values(k, 0) == 0.0 && padded.values(k, 1) == 1.0,
                 "left padding must repeat observation 0");

    // m = 1 windows carry exactly the point
    const auto unit = sample_window(ts, 2, 1);
    c.expect(unit.values.rows == 1 && unit.values(0, 0) == 20.0, "unit window content");

    // interior windows are raw slices (no padding)
    const auto raw = sample_window(ts, 3, 2);
    c.expect(raw.values(0, 0) == 20.0 && raw.values(1, 0) == 30.0, "raw slice content");

    // all-tied scores produce zero detections at any contamination
    ScoreSeries tied;
    tied.scores.assign(50, 2.0);
    tied.window_sizes.assign(50, 1);
    for (double contamination : {0.01, 0.3}) {
        const auto preds = threshold_scores(tied, contamination);
        for (int p : preds.predictions) c.expect(p == 0, "tied scores must yield no detections");
    }

    // contamination grid endpoints on distinct scores
    ScoreSeries distinct;
    for (int i = 0; i < 1000; ++i) distinct.scores.push_back(static_cast<double>(i));
    distinct.window_sizes.assign(1000, 1);
    const auto low = threshold_scores(distinct, 0.01);
    long long flagged_low = 0;
    for (int p : low.predictions) flagged_low += p;
    c.expect(flagged_low == 10, "contamination 0.01 must flag the top 1%");

    const auto high = threshold_scores(distinct, 0.3);
    long long flagged_high = 0;
    for (int p : high.predictions) flagged_high += p;
    c.expect(flagged_high == 300, "contamination 0.3 must flag the top 30%");
    return c;
}

struct Criterion {
    int number;
    std::string name;
    std::function<Check()> run;
    double time_limit;  // seconds; 0 = report only
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "loss oracles (weighted BCE, squared-norm sums)", criterion_loss_oracles, 5.0},
        {2, "finite-difference gradient suite, 20 seeds", criterion_gradients, 60.0},
        {3, "reward function: exact value, clamp, monotonicity", criterion_reward, 1.0},
        {4, "metric oracles: pairwise AUC, confusion-matrix macro-F1", criterion_metrics, 10.0},
        {5, "DQN sanity: bandit and two-state chain fixed points", criterion_dqn, 60.0},
        {6, "code-path equivalence: RDC-VRADA vs constant-action trainer", criterion_equivalence,
         0.0},
        {7, "end-to-end synthetic transfer, 5 seeds", criterion_transfer, 0.0},
        {8, "CLI determinism: byte-identical CSV outputs", criterion_determinism, 0.0},
        {9, "windowing and threshold edge cases", criterion_edges, 5.0},
    };

    const int selected = argc > 1 ? std::atoi(argv[1]) : 0;

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (selected != 0 && criterion.number != selected) continue;
        const double t0 = now_seconds();
        Check result;
        try {
            result = criterion.run();
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail = std::string("exception: ") + e.what();
        }
        const double elapsed = now_seconds() - t0;
        if (criterion.time_limit > 0.0 && elapsed > criterion.time_limit) {
            result.ok = false;
            result.detail = "exceeded time limit of " + std::to_string(criterion.time_limit) + "s";
        }
        std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n", result.ok ? "PASS" : "FAIL",
                    criterion.number, criterion.name.c_str(), elapsed, result.ok ? "" : " -- ",
                    result.ok ? "" : result.detail.c_str());
        std::fflush(stdout);
        if (!result.ok) ++failures;
    }
    return failures;
}
