#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "contextda/csv.hpp"
#include "contextda/matrix.hpp"

namespace contextda {

/// A length-T multivariate series with optional per-point binary labels
/// (0 = normal, 1 = anomaly). Immutable after construction by convention.
struct TimeSeries {
    Matrix values;  // T x d
    std::optional<std::vector<int>> labels;
    std::string name;

    std::size_t length() const { return values.rows; }
    std::size_t dims() const { return values.cols; }
};

/// A context window of `window_size` consecutive observations ending at
/// `end_index`. Indices below zero are filled by repeating observation 0.
struct Subsequence {
    std::size_t end_index = 0;
    std::size_t window_size = 0;
    Matrix values;  // window_size x d
};

/// Labeled source series plus an unlabeled target series. Target labels, when
/// known (synthetic data), ride along separately and are read only by
/// evaluation code.
struct DomainPair {
    TimeSeries source;
    TimeSeries target;
    std::optional<std::vector<int>> target_labels;

    bool heterogeneous() const { return source.dims() != target.dims(); }
};

/// Reads a CSV with a header row of feature columns and an optional trailing
/// "label" column holding 0/1.
inline TimeSeries load_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error("file '" + path + "' is empty");

    const auto header = split_csv_line(lines[0]);
    const bool has_label = !header.empty() && header.back() == "label";
    const std::size_t d = has_label ? header.size() - 1 : header.size();
    if (d == 0) throw std::runtime_error("file '" + path + "' has no feature columns");

    std::size_t t = 0;
    for (std::size_t i = 1; i < lines.size(); ++i)
        if (!lines[i].empty()) ++t;
    if (t == 0) throw std::runtime_error("file '" + path + "' has no data rows");

    TimeSeries ts;
    ts.name = path;
    ts.values = Matrix(t, d);
    std::vector<int> labels;
    if (has_label) labels.reserve(t);

    std::size_t r = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto cells = split_csv_line(lines[i]);
        if (cells.size() != header.size())
            throw std::runtime_error("row " + std::to_string(i + 1) + " of '" + path + "' has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        for (std::size_t c = 0; c < d; ++c) {
            const double v = parse_double_cell(cells[c], i + 1, c + 1);
            if (!std::isfinite(v))
                throw std::runtime_error("non-finite value at row " + std::to_string(i + 1) +
                                         ", column " + std::to_string(c + 1));
            ts.values(r, c) = v;
        }
        if (has_label) {
            const double lv = parse_double_cell(cells[d], i + 1, d + 1);
            if (lv != 0.0 && lv != 1.0)
                throw std::runtime_error("label value '" + cells[d] + "' outside {0,1} at row " +
                                         std::to_string(i + 1) + ", column " + std::to_string(d + 1));
            labels.push_back(static_cast<int>(lv));
        }
        ++r;
    }
    if (has_label) ts.labels = std::move(labels);
    return ts;
}

/// Per-feature min-max normalization to [0,1]. Constant features map to 0.
/// Idempotent: applying it twice equals applying it once.
inline TimeSeries normalize(const TimeSeries& ts) {
    TimeSeries out = ts;
    const std::size_t t = ts.length();
    const std::size_t d = ts.dims();
    for (std::size_t c = 0; c < d; ++c) {
        double lo = ts.values(0, c), hi = ts.values(0, c);
        for (std::size_t r = 1; r < t; ++r) {
            lo = std::min(lo, ts.values(r, c));
            hi = std::max(hi, ts.values(r, c));
        }
        const double range = hi - lo;
        for (std::size_t r = 0; r < t; ++r)
            out.values(r, c) = range > 0.0 ? (ts.values(r, c) - lo) / range : 0.0;
    }
    return out;
}

/// Extracts the window of `m` observations ending at index `t`, repeating
/// observation 0 for indices that would fall before the series start.
inline Subsequence sample_window(const TimeSeries& ts, std::size_t t, std::size_t m) {
    if (t >= ts.length())
        throw std::out_of_range("sample_window: index " + std::to_string(t) + " out of range [0, " +
                                std::to_string(ts.length()) + ")");
    if (m < 1) throw std::invalid_argument("sample_window: window size must be >= 1");

    Subsequence s;
    s.end_index = t;
    s.window_size = m;
    s.values = Matrix(m, ts.dims());
    for (std::size_t k = 0; k < m; ++k) {
        const long long idx = static_cast<long long>(t) - static_cast<long long>(m) + 1 +
                              static_cast<long long>(k);
        const std::size_t src = idx < 0 ? 0 : static_cast<std::size_t>(idx);
        for (std::size_t c = 0; c < ts.dims(); ++c) s.values(k, c) = ts.values(src, c);
    }
    return s;
}

}  // namespace contextda
