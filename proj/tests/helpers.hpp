#pragma once

// Shared test utilities: independent finite-difference gradient oracle and
// small data builders. The oracle only touches public parameter storage, so
// it stays independent of every analytic backward path it is used to check.

#include <cmath>
#include <functional>
#include <vector>

#include "contextda/matrix.hpp"
#include "contextda/nn.hpp"
#include "contextda/rng.hpp"
#include "contextda/timeseries.hpp"

namespace testutil {

/// Central finite differences of `loss` w.r.t. every entry of every tensor.
/// `loss` must be a pure function of the current parameter values.
inline std::vector<std::vector<double>> finite_difference_grads(
    const contextda::nn::ParamRefs& params, const std::function<double()>& loss,
    double step = 1e-4) {
    std::vector<std::vector<double>> grads;
    for (contextda::nn::Tensor* t : params) {
        std::vector<double> g(t->size());
        for (std::size_t i = 0; i < t->size(); ++i) {
            const double saved = t->val[i];
            t->val[i] = saved + step;
            const double up = loss();
            t->val[i] = saved - step;
            const double down = loss();
            t->val[i] = saved;
            g[i] = (up - down) / (2.0 * step);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

/// Largest relative error between analytic grads (stored in the tensors) and
/// finite-difference grads.
inline double max_grad_rel_error(const contextda::nn::ParamRefs& params,
                                 const std::vector<std::vector<double>>& fd) {
    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (std::size_t i = 0; i < params[p]->size(); ++i) {
            const double a = params[p]->grad[i];
            const double n = fd[p][i];
            const double denom = std::max(1.0, std::abs(a) + std::abs(n));
            worst = std::max(worst, std::abs(a - n) / denom);
        }
    }
    return worst;
}

inline contextda::Matrix random_matrix(std::size_t r, std::size_t c, contextda::Rng& rng,
                                       double lo = -1.0, double hi = 1.0) {
    contextda::Matrix m(r, c);
    for (auto& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

inline contextda::TimeSeries make_series(const std::vector<std::vector<double>>& rows,
                                         const std::vector<int>* labels = nullptr) {
    contextda::TimeSeries ts;
    ts.values = contextda::Matrix(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) ts.values(r, c) = rows[r][c];
    if (labels) ts.labels = *labels;
    return ts;
}

}  // namespace testutil
