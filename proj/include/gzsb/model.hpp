#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gzsb/error.hpp"
#include "gzsb/rng.hpp"
#include "gzsb/types.hpp"

// Compatibility functions c(f, s; theta) and their hand-derived parameter
// gradients.
//
//   linear     c = f^T W s
//   nonlinear  c = sigmoid(MLP2(concat(f, MLP1(s))))
//
// MLP1 is n->h1->m, MLP2 is 2m->h2->1. Every layer applies ReLU except the
// final one, which applies a sigmoid, so the nonlinear output is always in
// (0,1). The ReLU subgradient at exactly 0 is taken as 0.

namespace gzsb {

namespace detail {

struct LayerDims {
    std::size_t in, out;
};

// Layer shapes of the relation model, in flatten order.
inline std::array<LayerDims, 4> mlp_layer_dims(std::size_t m, std::size_t n, std::size_t h1,
                                               std::size_t h2) {
    return {{{n, h1}, {h1, m}, {2 * m, h2}, {h2, 1}}};
}

inline void affine(const DenseLayer& layer, std::span<const double> x, std::vector<double>& z) {
    z.assign(layer.b.begin(), layer.b.end());
    for (std::size_t r = 0; r < layer.w.rows; ++r) {
        double acc = 0.0;
        const auto row = layer.w.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * x[c];
        z[r] += acc;
    }
}

inline void relu(const std::vector<double>& z, std::vector<double>& a) {
    a.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

}  // namespace detail

inline std::size_t param_count(Variant variant, std::size_t m, std::size_t n, std::size_t h1,
                               std::size_t h2) {
    if (variant == Variant::linear) return m * n;
    std::size_t count = 0;
    for (const auto& d : detail::mlp_layer_dims(m, n, h1, h2)) count += d.out * d.in + d.out;
    return count;
}

inline std::size_t param_count(const ModelParams& params) {
    return param_count(params.variant, params.m, params.n, params.h1, params.h2);
}

// Deterministic by seed: weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)]
// drawn in flatten order, biases zero.
inline ModelParams init_params(Variant variant, std::size_t m, std::size_t n, MlpConfig mlp,
                               std::uint64_t seed) {
    if (m == 0 || n == 0) throw ConfigError("init_params: dimensions must be positive");
    ModelParams params;
    params.variant = variant;
    params.m = m;
    params.n = n;
    Rng rng(seed);
    if (variant == Variant::linear) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(n));
        params.w = Matrix(m, n);
        for (double& v : params.w.data) v = rng.uniform(-bound, bound);
        return params;
    }
    params.h1 = mlp.h1 ? mlp.h1 : m;
    params.h2 = mlp.h2 ? mlp.h2 : m;
    for (const auto& dims : detail::mlp_layer_dims(m, n, params.h1, params.h2)) {
        DenseLayer layer;
        layer.w = Matrix(dims.out, dims.in);
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims.in));
        for (double& v : layer.w.data) v = rng.uniform(-bound, bound);
        layer.b.assign(dims.out, 0.0);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

// Forward intermediates kept for the backward pass. Pre-activations are also
// what gradient-check harnesses inspect to stay away from ReLU kinks.
struct CompatCache {
    std::vector<double> z1, a1; // MLP1 hidden
    std::vector<double> z2, a2; // MLP1 output (mapped semantic)
    std::vector<double> x;      // concat(f, a2)
    std::vector<double> z3, a3; // MLP2 hidden
    double z4 = 0.0;            // MLP2 output pre-sigmoid
};

struct CompatibilityOutput {
    double value = 0.0;
    CompatCache cache;
};

namespace detail {
inline void check_dims(const ModelParams& params, std::span<const double> f,
                       std::span<const double> s) {
    if (f.size() != params.m || s.size() != params.n) {
        throw DataError("compatibility: dimension mismatch (feature " + std::to_string(f.size()) +
                        " vs m=" + std::to_string(params.m) + ", semantic " +
                        std::to_string(s.size()) + " vs n=" + std::to_string(params.n) + ")");
    }
}
}  // namespace detail

inline CompatibilityOutput compat_forward(const ModelParams& params, std::span<const double> f,
                                          std::span<const double> s) {
    detail::check_dims(params, f, s);
    CompatibilityOutput out;
    if (params.variant == Variant::linear) {
        double acc = 0.0;
        for (std::size_t r = 0; r < params.m; ++r) {
            const auto row = params.w.row(r);
            double dot = 0.0;
            for (std::size_t c = 0; c < params.n; ++c) dot += row[c] * s[c];
            acc += f[r] * dot;
        }
        out.value = acc;
        return out;
    }
    CompatCache& cc = out.cache;
    detail::affine(params.layers[0], s, cc.z1);
    detail::relu(cc.z1, cc.a1);
    detail::affine(params.layers[1], cc.a1, cc.z2);
    detail::relu(cc.z2, cc.a2);
    cc.x.assign(f.begin(), f.end());
    cc.x.insert(cc.x.end(), cc.a2.begin(), cc.a2.end());
    detail::affine(params.layers[2], cc.x, cc.z3);
    detail::relu(cc.z3, cc.a3);
    std::vector<double> z4;
    detail::affine(params.layers[3], cc.a3, z4);
    cc.z4 = z4[0];
    out.value = 1.0 / (1.0 + std::exp(-cc.z4));
    return out;
}

// Accumulates upstream * dc/dtheta into grad (flatten layout), reusing the
// forward cache.
inline void compat_grad_accum(const ModelParams& params, std::span<const double> f,
                              std::span<const double> s, const CompatCache& cache,
                              double upstream, std::span<double> grad) {
    detail::check_dims(params, f, s);
    if (grad.size() != param_count(params)) {
        throw DataError("compat_grad: gradient buffer length mismatch");
    }
    if (params.variant == Variant::linear) {
        std::size_t k = 0;
        for (std::size_t r = 0; r < params.m; ++r) {
            const double fr = upstream * f[r];
            for (std::size_t c = 0; c < params.n; ++c) grad[k++] += fr * s[c];
        }
        return;
    }

    const double value = 1.0 / (1.0 + std::exp(-cache.z4));
    const double dz4 = upstream * value * (1.0 - value);

    // flat offsets of each layer
    const auto dims = detail::mlp_layer_dims(params.m, params.n, params.h1, params.h2);
    std::array<std::size_t, 4> w_off{}, b_off{};
    std::size_t off = 0;
    for (int l = 0; l < 4; ++l) {
        w_off[l] = off;
        off += dims[l].out * dims[l].in;
        b_off[l] = off;
        off += dims[l].out;
    }

    auto backprop_layer = [&](int l, const std::vector<double>& input,
                              const std::vector<double>& dz, std::vector<double>& dinput) {
        const DenseLayer& layer = params.layers[static_cast<std::size_t>(l)];
        for (std::size_t r = 0; r < layer.w.rows; ++r) {
            const double g = dz[r];
            if (g != 0.0) {
                double* wg = grad.data() + w_off[static_cast<std::size_t>(l)] + r * layer.w.cols;
                for (std::size_t c = 0; c < layer.w.cols; ++c) wg[c] += g * input[c];
            }
            grad[b_off[static_cast<std::size_t>(l)] + r] += g;
        }
        dinput.assign(layer.w.cols, 0.0);
        for (std::size_t r = 0; r < layer.w.rows; ++r) {
            const double g = dz[r];
            if (g == 0.0) continue;
            const auto row = layer.w.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) dinput[c] += g * row[c];
        }
    };
    auto relu_back = [](const std::vector<double>& z, std::vector<double>& d) {
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (!(z[i] > 0.0)) d[i] = 0.0;
        }
    };

    std::vector<double> dz{dz4}, dinput;
    backprop_layer(3, cache.a3, dz, dinput);
    relu_back(cache.z3, dinput);
    backprop_layer(2, cache.x, dinput, dz);
    // the x gradient splits into the feature part (unused) and the mapped
    // semantic part
    std::vector<double> da2(dz.begin() + static_cast<std::ptrdiff_t>(params.m), dz.end());
    relu_back(cache.z2, da2);
    backprop_layer(1, cache.a1, da2, dinput);
    relu_back(cache.z1, dinput);
    backprop_layer(0, std::vector<double>(s.begin(), s.end()), dinput, dz);
}

// Convenience form recomputing the forward pass; returns a params-shaped
// gradient.
inline ModelParams compat_grad(const ModelParams& params, std::span<const double> f,
                               std::span<const double> s, double upstream);

inline std::vector<double> flatten(const ModelParams& params) {
    std::vector<double> flat;
    flat.reserve(param_count(params));
    if (params.variant == Variant::linear) {
        flat = params.w.data;
        return flat;
    }
    for (const DenseLayer& layer : params.layers) {
        flat.insert(flat.end(), layer.w.data.begin(), layer.w.data.end());
        flat.insert(flat.end(), layer.b.begin(), layer.b.end());
    }
    return flat;
}

inline ModelParams unflatten(std::span<const double> flat, const ModelParams& shape) {
    if (flat.size() != param_count(shape)) {
        throw DataError("unflatten: vector length " + std::to_string(flat.size()) +
                        " does not match parameter count " + std::to_string(param_count(shape)));
    }
    ModelParams out = shape;
    if (shape.variant == Variant::linear) {
        out.w.data.assign(flat.begin(), flat.end());
        return out;
    }
    std::size_t off = 0;
    for (DenseLayer& layer : out.layers) {
        const std::size_t wn = layer.w.data.size();
        layer.w.data.assign(flat.begin() + static_cast<std::ptrdiff_t>(off),
                            flat.begin() + static_cast<std::ptrdiff_t>(off + wn));
        off += wn;
        const std::size_t bn = layer.b.size();
        layer.b.assign(flat.begin() + static_cast<std::ptrdiff_t>(off),
                       flat.begin() + static_cast<std::ptrdiff_t>(off + bn));
        off += bn;
    }
    return out;
}

inline ModelParams compat_grad(const ModelParams& params, std::span<const double> f,
                               std::span<const double> s, double upstream) {
    std::vector<double> grad(param_count(params), 0.0);
    const CompatibilityOutput out = compat_forward(params, f, s);
    compat_grad_accum(params, f, s, out.cache, upstream, grad);
    ModelParams shaped = unflatten(grad, params);
    shaped.sem_scale = params.sem_scale;
    return shaped;
}

}  // namespace gzsb
