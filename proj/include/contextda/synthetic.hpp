#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "contextda/rng.hpp"
#include "contextda/timeseries.hpp"

namespace contextda {

/// Recipe for a two-domain synthetic dataset. Both domains share the same
/// regime structure (piecewise sinusoid) under an affine per-dimension shift;
/// anomalies are planted as short spikes and slow drifts so that which ones a
/// window can separate depends on the window length.
struct SyntheticSpec {
    std::uint64_t seed = 7;
    std::size_t length = 2000;
    std::size_t dims_source = 5;
    std::size_t dims_target = 5;
    double anomaly_ratio = 0.05;
    /// Window lengths at which the planted anomaly kinds become separable:
    /// min = spike span, max = drift span.
    std::vector<std::size_t> signature_lengths = {2, 8};

    // shape controls; defaults tuned so spikes dominate one-step deltas while
    // drift steps hide inside the base-signal slope
    double noise_sigma = 0.04;
    double spike_magnitude = 2.2;
    double drift_magnitude = 1.0;
};

namespace detail {

struct AnomalyEvent {
    std::size_t start = 0;
    std::size_t length = 0;
    bool is_spike = false;
};

/// Splits an exact point budget into spike events (spike_len points each) and
/// drift events (>= drift_len points each).
inline std::vector<std::size_t> plan_event_lengths(std::size_t budget, std::size_t spike_len,
                                                   std::size_t drift_len, std::size_t& n_spikes) {
    std::vector<std::size_t> lengths;
    std::size_t spike_points = budget / 2;
    n_spikes = spike_points / spike_len;
    std::size_t remaining = budget - n_spikes * spike_len;
    const std::size_t n_drifts = remaining / drift_len;
    remaining -= n_drifts * drift_len;
    while (remaining >= spike_len) {
        ++n_spikes;
        remaining -= spike_len;
    }
    for (std::size_t i = 0; i < n_spikes; ++i) lengths.push_back(spike_len);
    for (std::size_t i = 0; i < n_drifts; ++i) lengths.push_back(drift_len);
    if (remaining > 0) {
        // tack the sub-spike remainder onto an existing event
        if (n_drifts > 0)
            lengths.back() += remaining;
        else if (!lengths.empty())
            lengths.back() += remaining;
        else
            lengths.push_back(remaining);
    }
    return lengths;
}

inline std::vector<AnomalyEvent> place_events(const std::vector<std::size_t>& lengths,
                                              std::size_t n_spikes, std::size_t t_total,
                                              std::size_t desired_gap, Rng& rng) {
    // shrink the spacing when the series is too short for the preferred gap;
    // random placement needs headroom beyond the bare footprint
    std::size_t total_len = 0;
    for (std::size_t len : lengths) total_len += len;
    std::size_t gap = desired_gap;
    while (gap > 1 && (total_len + lengths.size() * 2 * gap) * 2 + 2 * gap + 2 > t_total) --gap;

    std::vector<AnomalyEvent> events;
    std::vector<char> occupied(t_total, 0);
    const std::size_t margin = gap;

    auto footprint_free = [&](std::size_t start, std::size_t len) {
        const std::size_t lo = start > gap ? start - gap : 0;
        const std::size_t hi = std::min(t_total, start + len + gap);
        for (std::size_t i = lo; i < hi; ++i)
            if (occupied[i]) return false;
        return true;
    };
    auto claim = [&](std::size_t start, std::size_t len, bool is_spike) {
        const std::size_t lo = start > gap ? start - gap : 0;
        const std::size_t hi = std::min(t_total, start + len + gap);
        for (std::size_t i = lo; i < hi; ++i) occupied[i] = 1;
        events.push_back({start, len, is_spike});
    };

    for (std::size_t e = 0; e < lengths.size(); ++e) {
        const std::size_t len = lengths[e];
        if (t_total < 2 * margin + len + 2)
            throw std::runtime_error("synthetic spec infeasible: series too short for anomalies");
        const std::size_t span = t_total - 2 * margin - len;
        bool placed = false;
        for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
            const std::size_t start = margin + rng.uniform_int(span);
            if (!footprint_free(start, len)) continue;
            claim(start, len, e < n_spikes);
            placed = true;
        }
        if (!placed) {
            // deterministic sweep from a random offset
            const std::size_t offset = margin + rng.uniform_int(span);
            for (std::size_t k = 0; k <= span && !placed; ++k) {
                const std::size_t start = margin + (offset - margin + k) % (span + 1);
                if (!footprint_free(start, len)) continue;
                claim(start, len, e < n_spikes);
                placed = true;
            }
        }
        if (!placed)
            throw std::runtime_error("synthetic spec infeasible: could not place anomaly events");
    }
    return events;
}

}  // namespace detail

/// Generates a deterministic source/target pair. Target labels are produced
/// but stored separately from the target series (evaluation only).
inline DomainPair generate_synthetic(const SyntheticSpec& spec) {
    if (spec.length < 1 || spec.dims_source < 1 || spec.dims_target < 1)
        throw std::invalid_argument("generate_synthetic: length and dims must be >= 1");
    if (!(spec.anomaly_ratio > 0.0 && spec.anomaly_ratio < 0.5))
        throw std::invalid_argument("generate_synthetic: anomaly_ratio must lie in (0, 0.5)");
    if (spec.signature_lengths.empty())
        throw std::invalid_argument("generate_synthetic: signature_lengths must be nonempty");

    const std::size_t budget =
        static_cast<std::size_t>(std::llround(spec.anomaly_ratio * static_cast<double>(spec.length)));
    if (budget == 0) throw std::runtime_error("synthetic spec infeasible: anomaly count is zero");

    const std::size_t spike_len =
        *std::min_element(spec.signature_lengths.begin(), spec.signature_lengths.end());
    const std::size_t drift_len =
        *std::max_element(spec.signature_lengths.begin(), spec.signature_lengths.end());

    Rng regime_rng(derive_seed(spec.seed, 0));
    Rng noise_src(derive_seed(spec.seed, 1));
    Rng noise_tgt(derive_seed(spec.seed, 2));
    Rng affine_rng(derive_seed(spec.seed, 3));
    Rng anom_src(derive_seed(spec.seed, 4));
    Rng anom_tgt(derive_seed(spec.seed, 5));

    const std::size_t t_total = spec.length;
    const std::size_t d_max = std::max(spec.dims_source, spec.dims_target);

    // shared regime schedule: slow sinusoids so base one-step deltas stay small
    struct Regime {
        std::size_t end;
        double omega, amplitude;
        std::vector<double> phase;
    };
    std::vector<Regime> regimes;
    std::size_t pos = 0;
    while (pos < t_total) {
        Regime r;
        r.end = std::min(t_total, pos + 150 + regime_rng.uniform_int(150));
        r.omega = 6.283185307179586 / (120.0 + regime_rng.uniform(0.0, 120.0));
        r.amplitude = regime_rng.uniform(0.6, 1.0);
        r.phase.resize(d_max);
        for (auto& p : r.phase) p = regime_rng.uniform(0.0, 6.283185307179586);
        regimes.push_back(r);
        pos = r.end;
    }

    auto base_value = [&](std::size_t t, std::size_t dim) {
        for (const auto& r : regimes)
            if (t < r.end) return r.amplitude * std::sin(r.omega * static_cast<double>(t) + r.phase[dim]);
        const auto& r = regimes.back();
        return r.amplitude * std::sin(r.omega * static_cast<double>(t) + r.phase[dim]);
    };

    // per-dimension affine shift for the target domain
    std::vector<double> scale(spec.dims_target), offset(spec.dims_target), phase_shift(spec.dims_target);
    for (std::size_t j = 0; j < spec.dims_target; ++j) {
        scale[j] = affine_rng.uniform(0.75, 1.25);
        offset[j] = affine_rng.uniform(-0.3, 0.3);
        phase_shift[j] = affine_rng.uniform(-0.25, 0.25);
    }

    auto build_domain = [&](std::size_t dims, bool is_target, Rng& noise, Rng& anom,
                            std::vector<int>& labels) {
        Matrix values(t_total, dims);
        for (std::size_t t = 0; t < t_total; ++t)
            for (std::size_t j = 0; j < dims; ++j) {
                double v = base_value(t, j % d_max);
                if (is_target) {
                    // re-evaluate with a small phase offset, then affine-shift
                    for (const auto& r : regimes)
                        if (t < r.end) {
                            v = r.amplitude *
                                std::sin(r.omega * static_cast<double>(t) + r.phase[j % d_max] +
                                         phase_shift[j]);
                            break;
                        }
                    v = scale[j] * v + offset[j];
                }
                values(t, j) = v + spec.noise_sigma * noise.normal();
            }

        std::size_t n_spikes = 0;
        const auto lengths = detail::plan_event_lengths(budget, spike_len, drift_len, n_spikes);
        const auto events = detail::place_events(lengths, n_spikes, t_total,
                                                 std::max<std::size_t>(drift_len, 4) + 2, anom);

        labels.assign(t_total, 0);
        const std::size_t affected = (dims + 1) / 2;
        for (const auto& ev : events) {
            std::vector<std::size_t> dims_idx(dims);
            for (std::size_t j = 0; j < dims; ++j) dims_idx[j] = j;
            // deterministic partial shuffle picks the affected dimensions
            for (std::size_t j = 0; j < affected; ++j) {
                const std::size_t k = j + anom.uniform_int(dims - j);
                std::swap(dims_idx[j], dims_idx[k]);
            }
            for (std::size_t j = 0; j < affected; ++j) {
                const double sign = anom.uniform() < 0.5 ? -1.0 : 1.0;
                for (std::size_t k = 0; k < ev.length; ++k) {
                    const std::size_t t = ev.start + k;
                    if (ev.is_spike) {
                        values(t, dims_idx[j]) += sign * spec.spike_magnitude;
                    } else {
                        const double frac = static_cast<double>(k + 1) / static_cast<double>(ev.length);
                        values(t, dims_idx[j]) += sign * spec.drift_magnitude * frac;
                    }
                }
            }
            for (std::size_t k = 0; k < ev.length; ++k) labels[ev.start + k] = 1;
        }
        return values;
    };

    DomainPair pair;
    std::vector<int> src_labels, tgt_labels;
    pair.source.values = build_domain(spec.dims_source, false, noise_src, anom_src, src_labels);
    pair.source.labels = std::move(src_labels);
    pair.source.name = "synthetic-source";
    pair.target.values = build_domain(spec.dims_target, true, noise_tgt, anom_tgt, tgt_labels);
    pair.target.name = "synthetic-target";
    pair.target_labels = std::move(tgt_labels);
    return pair;
}

}  // namespace contextda
