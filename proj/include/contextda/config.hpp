#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "contextda/baselines.hpp"
#include "contextda/csv.hpp"
#include "contextda/synthetic.hpp"
#include "contextda/trainer.hpp"

namespace contextda {

/// Flat key-value experiment configuration. Lines look like `key = value`;
/// blank lines and `#` comments are ignored. Unknown keys are rejected so a
/// typo cannot silently fall back to a default.
class RunConfig {
public:
    static const std::set<std::string>& known_keys() {
        static const std::set<std::string> keys = {
            "data.source", "data.target", "data.target_labels",
            "synthetic.seed", "synthetic.length", "synthetic.dims_source", "synthetic.dims_target",
            "synthetic.anomaly_ratio", "synthetic.signature_lengths", "synthetic.noise_sigma",
            "synthetic.spike_magnitude", "synthetic.drift_magnitude",
            "train.epochs", "train.batch", "train.k_max", "train.learning_rate",
            "train.learning_rate_grid", "train.update_rule", "train.seed",
            "train.replay_capacity",
            "reward.alpha", "reward.beta", "reward.gamma_r", "reward.lambda",
            "agent.epsilon", "agent.discount", "agent.batch", "agent.sync_period",
            "agent.inner_steps", "agent.buffer_capacity", "agent.q_hidden",
            "arch.latent", "arch.enc_hidden", "arch.dec_hidden", "arch.cls_hidden",
            "arch.ae_hidden", "arch.dropout",
            "eval.contamination",
            "compare.methods", "compare.seeds", "compare.fixed_window", "compare.threads",
            "out.dir",
        };
        return keys;
    }

    static RunConfig parse_file(const std::string& path) {
        RunConfig cfg;
        std::size_t line_no = 0;
        for (const std::string& raw : read_lines(path)) {
            ++line_no;
            std::string line = raw;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto first = line.find_first_not_of(" \t");
            if (first == std::string::npos) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                            ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (!known_keys().count(key))
                throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                            ": unknown key '" + key + "'");
            if (cfg.values_.count(key))
                throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                            ": duplicate key '" + key + "'");
            cfg.values_[key] = value;
        }
        cfg.validate_value_formats();
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    void set(const std::string& key, const std::string& value) {
        if (!known_keys().count(key)) throw std::invalid_argument("unknown key '" + key + "'");
        values_[key] = value;
    }

    std::string get_string(const std::string& key, const std::string& fallback = "") const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_number(key, it->second);
    }

    long long get_int(const std::string& key, long long fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_integer(key, it->second);
    }

    std::vector<std::size_t> get_size_list(const std::string& key,
                                           const std::vector<std::size_t>& fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::size_t> out;
        for (const auto& cell : split_csv_line(it->second)) {
            const long long v = parse_integer(key, trim(cell));
            if (v < 0) throw std::invalid_argument("key '" + key + "': negative entry");
            out.push_back(static_cast<std::size_t>(v));
        }
        return out;
    }

    std::vector<std::uint64_t> get_seed_list(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return {};
        std::vector<std::uint64_t> out;
        for (const auto& cell : split_csv_line(it->second))
            out.push_back(static_cast<std::uint64_t>(parse_integer(key, trim(cell))));
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return {};
        std::vector<std::string> out;
        for (const auto& cell : split_csv_line(it->second)) out.push_back(trim(cell));
        return out;
    }

    bool has_synthetic() const { return has("synthetic.length") || has("synthetic.seed"); }
    bool has_csv_data() const { return has("data.source") || has("data.target"); }

    SyntheticSpec synthetic_spec() const {
        SyntheticSpec spec;
        spec.seed = static_cast<std::uint64_t>(get_int("synthetic.seed", 7));
        spec.length = static_cast<std::size_t>(get_int("synthetic.length", 2000));
        spec.dims_source = static_cast<std::size_t>(get_int("synthetic.dims_source", 5));
        spec.dims_target = static_cast<std::size_t>(get_int("synthetic.dims_target", 5));
        spec.anomaly_ratio = get_double("synthetic.anomaly_ratio", 0.05);
        spec.signature_lengths = get_size_list("synthetic.signature_lengths", {2, 8});
        spec.noise_sigma = get_double("synthetic.noise_sigma", spec.noise_sigma);
        spec.spike_magnitude = get_double("synthetic.spike_magnitude", spec.spike_magnitude);
        spec.drift_magnitude = get_double("synthetic.drift_magnitude", spec.drift_magnitude);
        return spec;
    }

    TrainConfig train_config() const {
        TrainConfig cfg;
        cfg.epochs = static_cast<std::size_t>(get_int("train.epochs", 10));
        cfg.detector_batch = static_cast<std::size_t>(get_int("train.batch", 128));
        cfg.k_max = static_cast<std::size_t>(get_int("train.k_max", 30));
        cfg.learning_rate = get_double("train.learning_rate", 0.05);
        {
            // the learning rate must come from the configured grid
            std::vector<double> grid{0.05, 0.1, 0.15, 0.2, 0.25};
            if (has("train.learning_rate_grid")) {
                grid.clear();
                for (const auto& cell : get_string_list("train.learning_rate_grid"))
                    grid.push_back(parse_number("train.learning_rate_grid", cell));
            }
            bool in_grid = false;
            for (double g : grid) in_grid = in_grid || g == cfg.learning_rate;
            if (!in_grid)
                throw std::invalid_argument(
                    "train.learning_rate must be one of train.learning_rate_grid");
        }
        cfg.seed = static_cast<std::uint64_t>(get_int("train.seed", 0));
        cfg.replay_capacity = static_cast<std::size_t>(get_int("train.replay_capacity", 1024));
        const std::string rule = get_string("train.update_rule", "adam");
        if (rule == "adam")
            cfg.update_rule = nn::UpdateRule::adam;
        else if (rule == "sgd")
            cfg.update_rule = nn::UpdateRule::sgd;
        else
            throw std::invalid_argument("train.update_rule must be 'adam' or 'sgd'");

        cfg.coeffs.alpha = get_double("reward.alpha", 1.0);
        cfg.coeffs.beta = get_double("reward.beta", 1.0);
        cfg.coeffs.gamma_r = get_double("reward.gamma_r", 1.0);
        cfg.coeffs.lambda = get_double("reward.lambda", 1.0);
        if (cfg.coeffs.alpha == 0.0 && cfg.coeffs.beta == 0.0 && cfg.coeffs.gamma_r == 0.0 &&
            cfg.coeffs.lambda == 0.0)
            throw std::invalid_argument("at least one reward coefficient must be positive");

        cfg.agent.epsilon = get_double("agent.epsilon", 0.2);
        cfg.agent.discount = get_double("agent.discount", 0.95);
        cfg.agent.batch = static_cast<std::size_t>(get_int("agent.batch", 64));
        cfg.agent.sync_period = static_cast<std::size_t>(get_int("agent.sync_period", 100));
        cfg.agent.inner_steps = static_cast<std::size_t>(get_int("agent.inner_steps", 1));
        cfg.agent.buffer_capacity =
            static_cast<std::size_t>(get_int("agent.buffer_capacity", 10000));
        cfg.agent.q_hidden = get_size_list("agent.q_hidden", {256, 128, 64});

        cfg.sizes.latent = static_cast<std::size_t>(get_int("arch.latent", 128));
        cfg.sizes.enc_hidden = get_size_list("arch.enc_hidden", {256, 128});
        cfg.sizes.dec_hidden = get_size_list("arch.dec_hidden", {128, 256});
        cfg.sizes.cls_hidden = get_size_list("arch.cls_hidden", {128, 128});
        cfg.sizes.ae_hidden = get_size_list("arch.ae_hidden", {256, 128, 128, 256});
        cfg.sizes.dropout = get_double("arch.dropout", 0.2);
        if (cfg.sizes.enc_hidden.empty() || cfg.sizes.enc_hidden.back() != cfg.sizes.latent)
            throw std::invalid_argument("arch.enc_hidden must end at arch.latent");

        if (!(cfg.agent.epsilon >= 0.0 && cfg.agent.epsilon <= 1.0))
            throw std::invalid_argument("agent.epsilon must lie in [0, 1]");
        if (!(cfg.agent.discount > 0.0 && cfg.agent.discount < 1.0))
            throw std::invalid_argument("agent.discount must lie in (0, 1)");
        if (cfg.agent.batch < 1) throw std::invalid_argument("agent.batch must be >= 1");
        return cfg;
    }

    double contamination() const { return get_double("eval.contamination", 0.1); }

    std::vector<BaselineKind> compare_methods() const {
        std::vector<BaselineKind> kinds;
        for (const auto& name : get_string_list("compare.methods"))
            kinds.push_back(baseline_from_name(name));
        return kinds;
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t");
        return s.substr(b, e - b + 1);
    }

    static double parse_number(const std::string& key, const std::string& value) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(value, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("key '" + key + "': '" + value + "' is not a number");
        }
        if (pos != value.size())
            throw std::invalid_argument("key '" + key + "': '" + value + "' is not a number");
        return v;
    }

    static long long parse_integer(const std::string& key, const std::string& value) {
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(value, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("key '" + key + "': '" + value + "' is not an integer");
        }
        if (pos != value.size())
            throw std::invalid_argument("key '" + key + "': '" + value + "' is not an integer");
        return v;
    }

    /// Eagerly exercises every typed accessor so malformed values fail at
    /// parse time, before any command starts writing outputs.
    void validate_value_formats() const {
        const TrainConfig train_cfg = train_config();
        if (has_synthetic()) {
            const SyntheticSpec spec = synthetic_spec();
            for (std::size_t len : spec.signature_lengths)
                if (len > train_cfg.k_max)
                    throw std::invalid_argument(
                        "synthetic.signature_lengths must not exceed train.k_max");
        }
        (void)contamination();
        (void)compare_methods();
        (void)get_seed_list("compare.seeds");
        (void)get_int("compare.fixed_window", 0);
        (void)get_int("compare.threads", 1);
    }

    std::map<std::string, std::string> values_;
};

}  // namespace contextda
