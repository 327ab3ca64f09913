#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gzsb/error.hpp"
#include "gzsb/similarity.hpp"
#include "gzsb/types.hpp"

// Verification oracles. Deliberately written as straight-line re-derivations
// that never call into model.hpp / similarity.hpp scoring paths, so a bug in
// the production code cannot hide in its own checker.

namespace gzsb::oracle {

// Central differences (L(t+e_k*eps) - L(t-e_k*eps)) / (2 eps) per coordinate.
inline std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)>& loss, std::span<const double> params,
    double eps = 1e-5) {
    if (!(eps > 0.0)) throw ConfigError("finite_diff_grad: eps must be positive");
    std::vector<double> theta(params.begin(), params.end());
    std::vector<double> grad(theta.size(), 0.0);
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const double saved = theta[k];
        theta[k] = saved + eps;
        const double hi = loss(theta);
        theta[k] = saved - eps;
        const double lo = loss(theta);
        theta[k] = saved;
        if (!std::isfinite(hi) || !std::isfinite(lo)) {
            throw NumericError("finite_diff_grad: non-finite evaluation at coordinate " +
                               std::to_string(k));
        }
        grad[k] = (hi - lo) / (2.0 * eps);
    }
    return grad;
}

namespace detail {

inline double sim_scan(Metric metric, std::span<const double> a, std::span<const double> b) {
    double acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        switch (metric) {
            case Metric::neg_mae:
                acc1 += std::fabs(a[i] - b[i]);
                break;
            case Metric::neg_mse:
                acc1 += (a[i] - b[i]) * (a[i] - b[i]);
                break;
            case Metric::cosine:
                acc1 += a[i] * b[i];
                acc2 += a[i] * a[i];
                acc3 += b[i] * b[i];
                break;
            case Metric::ruzicka:
                acc1 += a[i] < b[i] ? a[i] : b[i];
                acc2 += a[i] < b[i] ? b[i] : a[i];
                break;
        }
    }
    switch (metric) {
        case Metric::neg_mae:
        case Metric::neg_mse:
            return -acc1 / static_cast<double>(a.size());
        case Metric::cosine:
            return acc1 / (std::sqrt(acc2) * std::sqrt(acc3));
        case Metric::ruzicka:
            return acc1 / acc2;
    }
    return 0.0;
}

}  // namespace detail

// Exhaustive scan with the production tie rule (lowest class id wins).
inline int brute_force_nearest(std::span<const double> query, std::span<const PoolEntry> pool,
                               Metric metric, std::optional<int> exclude_class = std::nullopt) {
    int best_id = -1;
    double best_sim = 0.0;
    for (const PoolEntry& entry : pool) {
        if (exclude_class && entry.class_id == *exclude_class) continue;
        const double sim = detail::sim_scan(metric, query, entry.semantic);
        if (best_id < 0 || sim > best_sim || (sim == best_sim && entry.class_id < best_id)) {
            best_id = entry.class_id;
            best_sim = sim;
        }
    }
    if (best_id < 0) throw DataError("brute_force_nearest: empty pool after exclusion");
    return best_id;
}

namespace detail {

// Fresh forward pass, including the model's baked-in semantic scale.
inline double compat_rederived(const ModelParams& p, std::span<const double> f,
                               std::span<const double> s_raw) {
    std::vector<double> s(s_raw.begin(), s_raw.end());
    for (double& v : s) v *= p.sem_scale;

    if (p.variant == Variant::linear) {
        double acc = 0.0;
        for (std::size_t r = 0; r < p.m; ++r) {
            for (std::size_t c = 0; c < p.n; ++c) acc += f[r] * p.w(r, c) * s[c];
        }
        return acc;
    }

    auto dense = [](const DenseLayer& layer, const std::vector<double>& x) {
        std::vector<double> y(layer.b);
        for (std::size_t r = 0; r < layer.w.rows; ++r) {
            for (std::size_t c = 0; c < layer.w.cols; ++c) y[r] += layer.w(r, c) * x[c];
        }
        return y;
    };
    auto relu_all = [](std::vector<double> v) {
        for (double& x : v) x = x > 0.0 ? x : 0.0;
        return v;
    };
    std::vector<double> a = relu_all(dense(p.layers[0], s));
    a = relu_all(dense(p.layers[1], a));
    std::vector<double> x(f.begin(), f.end());
    x.insert(x.end(), a.begin(), a.end());
    a = relu_all(dense(p.layers[2], x));
    a = dense(p.layers[3], a);
    return 1.0 / (1.0 + std::exp(-a[0]));
}

}  // namespace detail

// Independent re-evaluation of every candidate compatibility, then argmax
// with the tie rule.
inline int brute_force_classify(const ModelParams& params, std::span<const double> f,
                                std::span<const PoolEntry> label_space) {
    if (label_space.empty()) throw DataError("brute_force_classify: empty label space");
    int best_id = -1;
    double best_c = 0.0;
    for (const PoolEntry& entry : label_space) {
        const double c = detail::compat_rederived(params, f, entry.semantic);
        if (best_id < 0 || c > best_c || (c == best_c && entry.class_id < best_id)) {
            best_id = entry.class_id;
            best_c = c;
        }
    }
    return best_id;
}

}  // namespace gzsb::oracle
